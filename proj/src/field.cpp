#include "kerr/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kerr/quadrature.hpp"

namespace kerr {

FieldState make_state(int k, double u_min, double u_max, std::size_t nu, std::size_t nc) {
  if (nu < 2 || nc < 1) throw std::invalid_argument("make_state: need nu >= 2, nc >= 1");
  if (!(u_min < u_max)) throw std::invalid_argument("make_state: need u_min < u_max");
  FieldState st;
  st.k = k;
  st.u_grid.resize(nu);
  const double hu = (u_max - u_min) / double(nu - 1);
  for (std::size_t i = 0; i < nu; ++i) st.u_grid[i] = u_min + double(i) * hu;
  st.u_grid.back() = u_max;
  st.costheta_grid = gauss_legendre(int(nc)).x;
  st.psi1.assign(nu * nc, cplx(0.0, 0.0));
  st.psi2.assign(nu * nc, cplx(0.0, 0.0));
  return st;
}

void validate_state(const FieldState& st) {
  const std::size_t n = st.size();
  if (st.u_grid.size() < 2) throw std::invalid_argument("field: u grid needs at least 2 nodes");
  if (st.costheta_grid.empty()) throw std::invalid_argument("field: empty costheta grid");
  if (st.psi1.size() != n || st.psi2.size() != n)
    throw std::invalid_argument("field: component size does not match the grid");
  if (!st.du1.empty() && (st.du1.size() != n || st.dc1.size() != n))
    throw std::invalid_argument("field: derivative plane size does not match the grid");
  for (std::size_t i = 1; i < st.u_grid.size(); ++i)
    if (!(st.u_grid[i] > st.u_grid[i - 1]))
      throw std::invalid_argument("field: u grid must be strictly increasing");
  for (std::size_t j = 0; j < st.costheta_grid.size(); ++j) {
    const double c = st.costheta_grid[j];
    if (!(std::abs(c) < 1.0))
      throw std::invalid_argument("field: costheta nodes must lie strictly inside (-1, 1)");
    if (j > 0 && !(c > st.costheta_grid[j - 1]))
      throw std::invalid_argument("field: costheta grid must be strictly increasing");
  }
}

bool same_grids(const FieldState& a, const FieldState& b) {
  return a.k == b.k && a.u_grid == b.u_grid && a.costheta_grid == b.costheta_grid;
}

void require_same_grids(const FieldState& a, const FieldState& b) {
  if (!same_grids(a, b))
    throw std::invalid_argument("field: operands live on different grids or mode numbers");
}

double uniform_spacing(const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("uniform_spacing: need at least 2 nodes");
  const double h = (grid.back() - grid.front()) / double(grid.size() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = grid[i] - grid[i - 1];
    if (std::abs(d - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("uniform_spacing: grid is not uniform");
  }
  return h;
}

std::vector<double> angular_weights(const std::vector<double>& costheta_grid) {
  const std::size_t nc = costheta_grid.size();
  const GaussRule rule = gauss_legendre(int(nc));
  bool is_gauss = true;
  for (std::size_t j = 0; j < nc; ++j)
    if (std::abs(costheta_grid[j] - rule.x[j]) > 1e-12) { is_gauss = false; break; }
  if (is_gauss) return rule.w;
  std::vector<double> w(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const double lo = j == 0 ? -1.0 : costheta_grid[j - 1];
    const double hi = j + 1 == nc ? 1.0 : costheta_grid[j + 1];
    w[j] = 0.5 * (hi - lo);
  }
  return w;
}

std::vector<double> radial_weights(const std::vector<double>& u_grid) {
  const std::size_t nu = u_grid.size();
  std::vector<double> w(nu, 0.0);
  for (std::size_t i = 0; i + 1 < nu; ++i) {
    const double h = 0.5 * (u_grid[i + 1] - u_grid[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

double max_abs(const FieldState& st) {
  double m = 0.0;
  for (const cplx& v : st.psi1) m = std::max(m, std::abs(v));
  for (const cplx& v : st.psi2) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace kerr
