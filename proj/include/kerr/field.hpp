#pragma once
#include <complex>
#include <cstddef>
#include <vector>

#include "kerr/geometry.hpp"

namespace kerr {

using cplx = std::complex<double>;

// First-order field data for one azimuthal number k on a tensor grid in
// (u, costheta): psi1 = Phi, psi2 = i dPhi/dt.  Values are row-major with the
// angular index fastest, so one radial row is contiguous.
//
// States assembled from mode sums also carry the exact derivative planes
// du1 = dPhi/du and dc1 = dPhi/dcostheta (same layout).  Quadratic forms use
// them when both operands have them; states produced by grid evolution leave
// them empty and get consistent finite-difference treatment instead.
struct FieldState {
  int k = 0;
  std::vector<double> u_grid;         // strictly increasing
  std::vector<double> costheta_grid;  // strictly increasing, inside (-1, 1)
  std::vector<cplx> psi1, psi2;       // nu * nc each
  std::vector<cplx> du1, dc1;         // empty, or nu * nc each
  double time = 0.0;

  std::size_t nu() const { return u_grid.size(); }
  std::size_t nc() const { return costheta_grid.size(); }
  std::size_t size() const { return u_grid.size() * costheta_grid.size(); }
  std::size_t idx(std::size_t iu, std::size_t ic) const {
    return iu * costheta_grid.size() + ic;
  }
  bool has_planes() const { return !du1.empty() && !dc1.empty(); }
};

// Zero state on a uniform u grid (nu nodes, endpoints included) and the
// nc-point Gauss-Legendre angular grid.  The Gauss nodes keep every node off
// the poles and make the angular quadratures below exact for the polynomial
// integrands that mode products produce.
FieldState make_state(int k, double u_min, double u_max, std::size_t nu, std::size_t nc);

// Grid sanity: sizes consistent, grids strictly increasing, |costheta| < 1.
// Throws std::invalid_argument.
void validate_state(const FieldState& st);

// Exact node-for-node grid and k equality (states built by the same
// constructor compare equal; anything else is a real mismatch).
bool same_grids(const FieldState& a, const FieldState& b);
void require_same_grids(const FieldState& a, const FieldState& b);

// Uniform spacing of the u grid; throws std::invalid_argument if the grid is
// not uniform to relative 1e-9 (the discrete wave operator requires it).
double uniform_spacing(const std::vector<double>& grid);

// Quadrature weights for the angular grid: the matching Gauss-Legendre
// weights when the nodes are the nc-point Gauss nodes (to 1e-12), otherwise
// midpoint-cell weights that assume the integrand extends by zero to the
// poles (exact behaviour of k != 0 fields).
std::vector<double> angular_weights(const std::vector<double>& costheta_grid);

// Trapezoid weights on the grid span for the u direction.
std::vector<double> radial_weights(const std::vector<double>& u_grid);

// max over nodes of max(|psi1|, |psi2|).
double max_abs(const FieldState& st);

}  // namespace kerr
