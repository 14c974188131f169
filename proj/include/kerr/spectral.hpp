#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "kerr/angular.hpp"
#include "kerr/field.hpp"
#include "kerr/geometry.hpp"
#include "kerr/radial.hpp"

namespace kerr {

// Controls for the frequency-integral representation
//   Psi_N(t) = (1/2pi) sum_{n<=N} int dw/(w Omega) e^{-iwt}
//              sum_{ab} t_ab Psi_a^{wn} <Psi_b^{wn}, Psi0>_E .
// The integrand is bounded at the excluded frequencies {0, omega0} (the
// coefficients vanish there at the same rate as w resp. Omega), but the
// individual factors blow up, so the quadrature uses panels that abut and
// never contain those points, with widths shrinking geometrically to
// delta_min near them.
struct SynthesisConfig {
  std::size_t n_max = 6;  // angular mode lines n = 1 .. n_max
  double W = 0.0;         // window [-W, W]; 0 = auto from coefficient decay
  double J = 0.0;         // low-energy threshold; 0 = auto (95% of the
                          // projection mass inside [-2J, 2J])
  std::size_t panel_order = 8;     // Gauss points per panel
  double regular_width = 0.0;      // plain panel width; 0 = graded fill
                                   // (width ~ 0.35 max(0.3, |omega|))
  double exclusion_radius = 0.05;  // refined-zone half width at {0, omega0}
  double delta_min = 1e-4;         // innermost panel width at those points
  double radial_tol = 1e-11;       // Jost / transmission solve tolerance
  double angular_tol = 1e-12;      // spheroidal eigensolve tolerance
  double check_tol = 0.0;  // > 0: fail if the innermost panels near the
                           // excluded points still carry more than this
                           // fraction of the projection mass
};

// Composite Gauss rule over [-W, W] minus the excluded points.
struct OmegaRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

OmegaRule omega_quadrature(const KerrBackground& bg, const SynthesisConfig& cfg);

// Smallest window (capped at 16/M) outside which every line's projection
// coefficients have decayed below 1e-8 of their peak. Callers that need the
// resolved window (e.g. to clamp J) run this once and set cfg.W themselves;
// project_all calls it implicitly when cfg.W == 0.
double auto_window(const FieldState& psi0, const KerrBackground& bg,
                   const SynthesisConfig& cfg);

// One angular mode line sampled on the quadrature nodes: the spheroidal
// mode, the transmission data, and the two projection coefficients
// c_b = <Psi_b^{wn}, Psi0>_E per node.
struct ModeProjection {
  int n = 1;
  std::vector<double> omega;
  std::vector<double> weight;
  std::vector<AngularMode> modes;
  std::vector<Transmission> scattering;
  std::vector<cplx> c1, c2;
};

// <Psi_b^{wn}, Psi0>_E for b = 1, 2 by the integrated-by-parts closed form:
// the boundary terms vanish for data supported inside the grid, and the
// mode relation rho A Theta phi/s = [rho w^2 + 2akw(1 - Delta/s^2)] Theta phi/s
// turns the derivative blocks into multiplication, leaving
//   c_b = w int du (phi_b/s) { (w s^2 + 2ak(1 - Delta/s^2)) I0
//           - w a^2 (Delta/s^2) I2 + s^2 J0 - a^2 (Delta/s^2) J2 },
// with phi_1 = Re phi-acute, phi_2 = Im phi-acute and I/J the angular
// pairings of Theta against the two components of Psi0.
// Throws invalid_argument if the data touches the u boundary.
std::pair<cplx, cplx> project(const FieldState& psi0, const KerrBackground& bg,
                              const AngularMode& mode, double radial_tol = 1e-11);

// Single-point convenience: solves the angular problem for line n first.
std::pair<cplx, cplx> project(const FieldState& psi0, const KerrBackground& bg,
                              int n, double omega, double radial_tol = 1e-11,
                              double angular_tol = 1e-12);

// All lines n = 1..n_max on the quadrature grid (auto window if cfg.W == 0).
// Work is parallel over frequency nodes; results are independent of the
// thread count.
std::vector<ModeProjection> project_all(const FieldState& psi0,
                                        const KerrBackground& bg,
                                        SynthesisConfig cfg);

// Fraction of the total projection mass carried by the innermost panels
// around the excluded frequencies — an upper bound on what further panel
// refinement could still change.
double exclusion_residual(const std::vector<ModeProjection>& lines,
                          const KerrBackground& bg, const SynthesisConfig& cfg);

// f(H) applied line-wise: the synthesis sum with e^{-iwt} replaced by f(w).
// The output carries exact derivative planes. All-zero projections yield
// an exactly zero state.
FieldState functional_calculus(const std::function<cplx(double)>& f,
                               const std::vector<ModeProjection>& lines,
                               const KerrBackground& bg,
                               const std::vector<double>& u_grid,
                               const std::vector<double>& costheta_grid,
                               const SynthesisConfig& cfg);

// Single-line version: f(H)_n Psi0 for the line the projection was taken on.
FieldState functional_calculus(const std::function<cplx(double)>& f,
                               const ModeProjection& line,
                               const KerrBackground& bg,
                               const std::vector<double>& u_grid,
                               const std::vector<double>& costheta_grid,
                               const SynthesisConfig& cfg);

// Psi_N(t): functional calculus with f = e^{-iwt}.
FieldState synthesize(const std::vector<ModeProjection>& lines,
                      const KerrBackground& bg,
                      const std::vector<double>& u_grid,
                      const std::vector<double>& costheta_grid, double t,
                      const SynthesisConfig& cfg);

// Low/high energy splitting: chi_low is the C^2 quintic step, 1 on [-J, J]
// and 0 outside [-2J, 2J]; low = chi_low(H) Psi_N, high = (1-chi_low)(H) Psi_N.
// low_energy integrates chi(2 - chi) against the spectral measure
// d mu_n = (1/2pi) dw/(w Omega) sum_ab t_ab conj(c_a) c_b, and total_norm
// integrates 1 (i.e. <Psi_N, Psi_N>).
struct EnergySplit {
  FieldState low;
  FieldState high;
  double low_energy = 0.0;
  double total_norm = 0.0;
  double J = 0.0;  // threshold actually used
};

double chi_low(double omega, double J);

EnergySplit energy_split(const FieldState& psi0, const KerrBackground& bg,
                         SynthesisConfig cfg);

// Same split over projections computed elsewhere; cfg.W must already be
// resolved (> 0) since the automatic window needs the original data.
EnergySplit energy_split(const std::vector<ModeProjection>& lines,
                         const KerrBackground& bg,
                         const std::vector<double>& u_grid,
                         const std::vector<double>& costheta_grid,
                         SynthesisConfig cfg);

}  // namespace kerr
