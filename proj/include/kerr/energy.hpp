#pragma once
#include <vector>

#include "kerr/field.hpp"
#include "kerr/geometry.hpp"

namespace kerr {

// Conserved energy density of mode k in Boyer-Lindquist-like coordinates,
// integrand of E = 2 pi int dens dr dcostheta:
//   dens = [ (r^2+a^2)^2/Delta - a^2 sin^2 ] |dtPhi|^2 + Delta |drPhi|^2
//        + sin^2 |dcPhi|^2 + [ k^2/sin^2 - a^2 k^2/Delta ] |Phi|^2.
// The |Phi|^2 coefficient turns negative exactly inside the ergosphere
// (Delta < a^2 sin^2), which is what makes superradiant amplification
// possible; every other coefficient is positive outside the horizon.
double energy_density(const KerrBackground& bg, double r, double costheta,
                      cplx phi, cplx dtphi, cplx drphi, cplx dcphi);

// Energy inner product of two states on the same grid (explicit 2 pi):
//   <s1, s2> = 2 pi int [ (r^2+a^2) conj(duPhi1) duPhi2
//                       + (Delta/(r^2+a^2)) ( sin^2 conj(dcPhi1) dcPhi2
//                                           + k^2/sin^2 conj(Phi1) Phi2 )
//                       - (a^2 k^2/(r^2+a^2)) conj(Phi1) Phi2
//                       + rho conj(psi2_1) psi2_2 ] du dcostheta.
// The rho weight on the second component is what makes the evolution
// Hamiltonian symmetric (and matches the dr-form density above through
// dr = (Delta/(r^2+a^2)) du).
//
// When both states carry exact derivative planes the integral is evaluated
// directly (Gauss in costheta, trapezoid in u: superalgebraically accurate
// for data vanishing near the u edges).  Otherwise it is the quadratic form
// of the discrete wave operator under its flat-u x Gauss measure, i.e. the
// quantity the semi-discrete evolution conserves to roundoff.
cplx energy_inner_product(const FieldState& s1, const FieldState& s2, const KerrBackground& bg);

// Energy outside r = R carried by a state: quadrature of energy_density over
// [R, r_max] x S^2 on the state's grid, with centered differences for the
// derivatives and drPhi = ((r^2+a^2)/Delta)^-1 ... i.e. dr = (Delta/s^2) du.
// Throws std::domain_error when R is at or below the horizon or outside the
// grid's radial coverage.
double exterior_energy(const FieldState& st, const KerrBackground& bg, double R);

struct EnergyReport {
  double t = 0.0;
  double R = 0.0;
  double exterior_energy = 0.0;
  double total_energy = 0.0;
  double min_density = 0.0;
  double min_density_r = 0.0;
  double min_density_costheta = 0.0;
  // Crude grid-truncation indicator: edge-row density level times the window.
  double tail_bound = 0.0;
  bool growth_alert = false;
};

// Energy report for each snapshot of an evolution; growth_alert marks
// exterior energy above growth_alert_factor times its first-snapshot value.
std::vector<EnergyReport> boundedness_sweep(const std::vector<FieldState>& snapshots,
                                            const KerrBackground& bg, double R,
                                            double growth_alert_factor = 2.0);

}  // namespace kerr
