#include "kerr/legendre.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kerr {

double cos_coupling(int l, int m) {
  if (l < m) return 0.0;
  const double lp = l + 1.0;
  return std::sqrt((lp * lp - double(m) * m) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)));
}

void sph_legendre_row(int m, int lmax, double c, std::span<double> out) {
  if (m < 0 || lmax < m) throw std::invalid_argument("sph_legendre_row: need 0 <= m <= lmax");
  if (out.size() < size_t(lmax - m + 1)) throw std::invalid_argument("sph_legendre_row: output too small");

  // Seed Y_m^m = sqrt((2m+1)!! / (2m)!! / (4 pi)) * (1-c^2)^{m/2}, built as a
  // product to avoid factorial overflow.
  const double s2 = (1.0 - c) * (1.0 + c);
  double ymm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int j = 1; j <= m; ++j) ymm *= std::sqrt((2.0 * j + 1.0) / (2.0 * j) * s2);
  out[0] = ymm;
  if (lmax == m) return;

  // Three-term recurrence c Y_l = cl(l) Y_{l+1} + cl(l-1) Y_{l-1}.
  double ylm1 = 0.0, yl = ymm;
  for (int l = m; l < lmax; ++l) {
    const double ylp1 = (c * yl - cos_coupling(l - 1, m) * ylm1) / cos_coupling(l, m);
    out[l + 1 - m] = ylp1;
    ylm1 = yl;
    yl = ylp1;
  }
}

void sph_legendre_row_d(int m, int lmax, double c,
                        std::span<double> out, std::span<double> dout) {
  sph_legendre_row(m, lmax, c, out);
  if (dout.size() < size_t(lmax - m + 1)) throw std::invalid_argument("sph_legendre_row_d: output too small");
  const double s2 = (1.0 - c) * (1.0 + c);
  if (!(s2 > 0.0)) throw std::invalid_argument("sph_legendre_row_d: c must lie inside (-1, 1)");
  // (1-c^2) Y_l' = sqrt((2l+1)/(2l-1) (l^2-m^2)) Y_{l-1} - l c Y_l
  for (int l = m; l <= lmax; ++l) {
    const double below = (l == m) ? 0.0
        : std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (double(l) * l - double(m) * m)) * out[l - 1 - m];
    dout[l - m] = (below - l * c * out[l - m]) / s2;
  }
}

double sph_legendre(int l, int m, double c) {
  if (m < 0 || l < m) throw std::invalid_argument("sph_legendre: need 0 <= m <= l");
  double buf[128];
  if (l - m + 1 <= 128) {
    std::span<double> row(buf, size_t(l - m + 1));
    sph_legendre_row(m, l, c, row);
    return row[l - m];
  }
  // Tall towers: same recurrence without the scratch row.
  const double s2 = (1.0 - c) * (1.0 + c);
  double yl = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int j = 1; j <= m; ++j) yl *= std::sqrt((2.0 * j + 1.0) / (2.0 * j) * s2);
  double ylm1 = 0.0;
  for (int ll = m; ll < l; ++ll) {
    const double ylp1 = (c * yl - cos_coupling(ll - 1, m) * ylm1) / cos_coupling(ll, m);
    ylm1 = yl;
    yl = ylp1;
  }
  return yl;
}

}  // namespace kerr
