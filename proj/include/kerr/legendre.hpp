#pragma once
#include <span>

namespace kerr {

// Associated Legendre functions normalized on the sphere: Y_l^m(c) is the
// colatitude part of the spherical harmonic, so
//   2*pi * int_{-1}^{1} Y_l^m(c)^2 dc = 1.
// No Condon-Shortley phase; Y_l^m > 0 just below the north pole.
// All routines take m >= 0 (the basis only sees |k|).

// out[l - m] = Y_l^m(c) for l = m .. lmax.
void sph_legendre_row(int m, int lmax, double c, std::span<double> out);

// Values and derivatives d/dc.  c must lie strictly inside (-1, 1).
void sph_legendre_row_d(int m, int lmax, double c,
                        std::span<double> out, std::span<double> dout);

// Single value, convenience for tests and pointwise evaluation.
double sph_legendre(int l, int m, double c);

// Cosine coupling coefficient of the normalized basis:
//   c * Y_l^m = cl(l, m) Y_{l+1}^m + cl(l-1, m) Y_{l-1}^m,
//   cl(l, m) = sqrt(((l+1)^2 - m^2) / ((2l+1)(2l+3))),
// and cl(m-1, m) = 0: the tower truncates exactly at the bottom.
double cos_coupling(int l, int m);

}  // namespace kerr
