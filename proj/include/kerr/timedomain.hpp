#pragma once
#include <cstddef>
#include <vector>

#include "kerr/field.hpp"
#include "kerr/geometry.hpp"

namespace kerr {

// Discretization of the first-order evolution
//   i d/dt (psi1, psi2) = H (psi1, psi2),  H(psi1, psi2) = (psi2, A psi1 + beta psi2)
// with
//   A    = (1/rho) [ -d_u (r^2+a^2) d_u - (Delta/(r^2+a^2)) Lap_k - a^2 k^2/(r^2+a^2) ]
//   Lap_k = d_c (1-c^2) d_c - k^2/(1-c^2)
//   beta = -(2 a k / rho) (1 - Delta/(r^2+a^2))
//   rho  = (r^2+a^2) - a^2 (1-c^2) Delta/(r^2+a^2)  > 0 outside the horizon.
//
// The u direction is a second-order flux-form stencil with face coefficients
// (r^2+a^2) at half nodes and ghost zeros at the ends.  The angular direction
// is Legendre collocation on the Gauss grid: -Lap_k is applied through its
// exact spectrum l(l+1) on the sphere-normalized basis Y_l^|k|, l <= nc-1,
// whose discrete Gram matrix under the Gauss weights is exactly the identity.
// That keeps the whole operator symmetric under the measure hu x gauss_w, so
// the semi-discrete energy is conserved to roundoff, pole behaviour is
// carried by the basis itself, and angular mode channels never mix through
// discretization error.
struct WaveOperator {
  int k = 0;
  std::size_t nu = 0, nc = 0;
  double hu = 0.0;
  KerrBackground bg;
  std::vector<double> u_grid, costheta_grid, gauss_w;
  std::vector<double> r_of_u;            // r(u_i)
  std::vector<double> ds2;               // (Delta/s^2)(u_i)
  std::vector<double> cdrad, cup, cum;   // per-row radial stencil: diag, +1, -1
  std::vector<double> rho, beta;         // per-node planes
  std::vector<cplx> mt;                  // nc x nc row-major; out_row = in_row * Mt
  double mu_max = 0.0;                   // largest angular eigenvalue l(l+1)

  // The template's u grid must be uniform and its angular grid the Gauss one.
  WaveOperator(const KerrBackground& bg_, const FieldState& grid);

  // out = rho A in (the symmetric quadratic-form core); in and out distinct.
  void apply_rho_a(const cplx* in, cplx* out) const;
  // (in1, in2) -> (in2, A in1 + beta in2); outputs distinct from inputs.
  void apply_h(const cplx* in1, const cplx* in2, cplx* out1, cplx* out2) const;
  // Same, scaled by -i: the right-hand side of d/dt psi = -i H psi.
  void apply_minus_i_h(const cplx* in1, const cplx* in2, cplx* out1, cplx* out2) const;

  // Rigorous upper bound on the spectral radius of H (Gershgorin over the
  // rho-symmetrized operator plus the first-order beta shift).
  double max_frequency() const;
};

// One H application on a state (components (psi2, A psi1 + beta psi2)).
FieldState apply_H(const FieldState& st, const KerrBackground& bg);

// Largest stable RK4 step: safety * 2.828 / max_frequency.
double cfl_time_step(const KerrBackground& bg, const FieldState& grid, double safety = 0.5);

struct EvolutionConfig {
  double t_end = 0.0;
  std::vector<double> snapshot_times;  // nondecreasing, >= 0; {t_end} if empty
  double dt = 0.0;                     // 0: largest stable step
  double cfl_safety = 0.5;             // fraction of the RK4 imaginary-axis limit
  double buffer_factor = 1.0;          // require edge clearance > factor * final time
  double boundary_tol = 1e-8;          // abort when this fraction of the initial
                                       // amplitude reaches the u boundary rows
};

struct Evolution {
  std::vector<FieldState> snapshots;
  std::vector<double> energy;  // conserved energy at each snapshot
  double dt = 0.0;
  std::size_t steps = 0;
};

// Classical RK4 on i d/dt psi = H psi, landing exactly on every snapshot
// time.  Throws std::invalid_argument for a CFL-violating dt or initial data
// without causal clearance from the u boundary, std::runtime_error when
// radiation reaches the boundary rows during the run.
Evolution evolve(const FieldState& psi0, const KerrBackground& bg, const EvolutionConfig& cfg);

}  // namespace kerr
