#include "kerr/timedomain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "kerr/energy.hpp"
#include "kerr/legendre.hpp"
#include "kerr/quadrature.hpp"
#include "kerr/simd.hpp"

namespace kerr {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRk4Limit = 2.828;  // |z| on the imaginary axis inside the RK4 region

using RowMajorC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

const double* dview(const cplx* p) { return reinterpret_cast<const double*>(p); }
double* dview(cplx* p) { return reinterpret_cast<double*>(p); }

}  // namespace

WaveOperator::WaveOperator(const KerrBackground& bg_, const FieldState& grid)
    : k(grid.k), nu(grid.nu()), nc(grid.nc()), bg(bg_),
      u_grid(grid.u_grid), costheta_grid(grid.costheta_grid) {
  if (k != bg.k) throw std::invalid_argument("wave operator: state k differs from background k");
  hu = uniform_spacing(u_grid);
  const GaussRule rule = gauss_legendre(int(nc));
  for (std::size_t j = 0; j < nc; ++j)
    if (std::abs(costheta_grid[j] - rule.x[j]) > 1e-12)
      throw std::invalid_argument(
          "wave operator: angular grid must be the Gauss-Legendre node set");
  gauss_w = rule.w;

  const int m = int(nc) - std::abs(k);
  if (m < 1)
    throw std::invalid_argument("wave operator: angular grid too small for this k");

  r_of_u.resize(nu);
  ds2.resize(nu);
  cdrad.resize(nu);
  cup.resize(nu);
  cum.resize(nu);
  rho.resize(nu * nc);
  beta.resize(nu * nc);

  std::vector<double> s2f(nu + 1);  // (r^2+a^2) at the u faces
  for (std::size_t i = 0; i <= nu; ++i) {
    const double uf = u_grid.front() + (double(i) - 0.5) * hu;
    const double rf = inverse_r(bg, uf);
    s2f[i] = rf * rf + bg.a * bg.a;
  }
  const double a2k2 = bg.a * bg.a * double(k) * double(k);
  for (std::size_t i = 0; i < nu; ++i) {
    const double r = inverse_r(bg, u_grid[i]);
    const double s2 = r * r + bg.a * bg.a;
    r_of_u[i] = r;
    ds2[i] = delta(bg, r) / s2;
    cdrad[i] = (s2f[i] + s2f[i + 1]) / (hu * hu) - a2k2 / s2;
    cup[i] = -s2f[i + 1] / (hu * hu);
    cum[i] = -s2f[i] / (hu * hu);
    for (std::size_t j = 0; j < nc; ++j) {
      const double sin2 = 1.0 - costheta_grid[j] * costheta_grid[j];
      const double rr = s2 - bg.a * bg.a * sin2 * ds2[i];
      rho[i * nc + j] = rr;
      beta[i * nc + j] = -2.0 * bg.a * double(k) * (1.0 - ds2[i]) / rr;
    }
  }

  // Angular collocation matrix (transposed for row-major application):
  //   Mt = 2 pi W B Lam B^T,  B(j, l-|k|) = Y_l^|k|(c_j),  Lam = diag l(l+1).
  const int mabs = std::abs(k);
  Eigen::MatrixXd B(nc, m);
  std::vector<double> row(m);
  for (std::size_t j = 0; j < nc; ++j) {
    sph_legendre_row(mabs, int(nc) - 1, costheta_grid[j], row);
    for (int l = 0; l < m; ++l) B(long(j), l) = row[l];
  }
  Eigen::VectorXd lam(m);
  for (int l = 0; l < m; ++l) {
    const double ll = double(l + mabs);
    lam(l) = ll * (ll + 1.0);
  }
  mu_max = lam(m - 1);
  Eigen::MatrixXd mtr = B * lam.asDiagonal() * B.transpose();
  mt.resize(nc * nc);
  for (std::size_t j = 0; j < nc; ++j)
    for (std::size_t jj = 0; jj < nc; ++jj)
      mt[j * nc + jj] = cplx(2.0 * kPi * gauss_w[j] * mtr(long(j), long(jj)), 0.0);
}

void WaveOperator::apply_rho_a(const cplx* in, cplx* out) const {
  Eigen::Map<const RowMajorC> pin(in, long(nu), long(nc));
  Eigen::Map<const RowMajorC> pmt(mt.data(), long(nc), long(nc));
  Eigen::Map<RowMajorC> pout(out, long(nu), long(nc));
  pout.noalias() = pin * pmt;

  const auto& kern = simd::active_kernels();
  for (std::size_t i = 0; i < nu; ++i) {
    cplx* orow = out + i * nc;
    const double d = ds2[i];
    for (std::size_t j = 0; j < nc; ++j) orow[j] *= d;
    kern.axpy_rr(cdrad[i], dview(in + i * nc), dview(orow), 2 * nc);
    if (i + 1 < nu) kern.axpy_rr(cup[i], dview(in + (i + 1) * nc), dview(orow), 2 * nc);
    if (i > 0) kern.axpy_rr(cum[i], dview(in + (i - 1) * nc), dview(orow), 2 * nc);
  }
}

void WaveOperator::apply_h(const cplx* in1, const cplx* in2, cplx* out1, cplx* out2) const {
  apply_rho_a(in1, out2);
  const std::size_t n = nu * nc;
  for (std::size_t p = 0; p < n; ++p) {
    out2[p] = out2[p] / rho[p] + beta[p] * in2[p];
    out1[p] = in2[p];
  }
}

void WaveOperator::apply_minus_i_h(const cplx* in1, const cplx* in2, cplx* out1,
                                   cplx* out2) const {
  apply_rho_a(in1, out2);
  const std::size_t n = nu * nc;
  for (std::size_t p = 0; p < n; ++p) {
    const cplx h2 = out2[p] / rho[p] + beta[p] * in2[p];
    out2[p] = cplx(h2.imag(), -h2.real());
    out1[p] = cplx(in2[p].imag(), -in2[p].real());
  }
}

double WaveOperator::max_frequency() const {
  std::vector<double> rowmin(nu);
  double beta_max = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    double m = std::numeric_limits<double>::max();
    for (std::size_t j = 0; j < nc; ++j) {
      m = std::min(m, rho[i * nc + j]);
      beta_max = std::max(beta_max, std::abs(beta[i * nc + j]));
    }
    rowmin[i] = m;
  }
  const double a2k2 = bg.a * bg.a * double(k) * double(k);
  double rad = 0.0, ang = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    double nb = rowmin[i];
    if (i > 0) nb = std::min(nb, rowmin[i - 1]);
    if (i + 1 < nu) nb = std::min(nb, rowmin[i + 1]);
    const double s2fsum = -(cup[i] + cum[i]) * hu * hu;  // s2f_i + s2f_{i+1}
    rad = std::max(rad, 2.0 * s2fsum / (hu * hu) / nb);
    ang = std::max(ang, ds2[i] * mu_max / rowmin[i]);
    const double r = r_of_u[i];
    mass = std::max(mass, a2k2 / (r * r + bg.a * bg.a) / rowmin[i]);
  }
  return std::sqrt(rad + ang + mass) + beta_max;
}

FieldState apply_H(const FieldState& st, const KerrBackground& bg) {
  validate_state(st);
  WaveOperator op(bg, st);
  FieldState out = st;
  out.du1.clear();
  out.dc1.clear();
  op.apply_h(st.psi1.data(), st.psi2.data(), out.psi1.data(), out.psi2.data());
  return out;
}

double cfl_time_step(const KerrBackground& bg, const FieldState& grid, double safety) {
  WaveOperator op(bg, grid);
  return safety * kRk4Limit / op.max_frequency();
}

Evolution evolve(const FieldState& psi0, const KerrBackground& bg, const EvolutionConfig& cfg) {
  validate_state(psi0);
  WaveOperator op(bg, psi0);

  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) {
    if (!(cfg.t_end > 0.0))
      throw std::invalid_argument("evolve: no snapshot times and t_end <= 0");
    times = {cfg.t_end};
  }
  if (times.front() < 0.0)
    throw std::invalid_argument("evolve: snapshot times must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1])
      throw std::invalid_argument("evolve: snapshot times must be nondecreasing");
  const double t_final = times.back();

  const double dt_max = cfg.cfl_safety * kRk4Limit / op.max_frequency();
  const double dt = cfg.dt > 0.0 ? cfg.dt : dt_max;
  if (dt > dt_max * (1.0 + 1e-9))
    throw std::invalid_argument("evolve: dt = " + std::to_string(dt) +
                                " violates the CFL bound " + std::to_string(dt_max));

  const double m0 = max_abs(psi0);
  const std::size_t nu = psi0.nu(), nc = psi0.nc();
  if (cfg.buffer_factor > 0.0 && m0 > 0.0) {
    double elo = psi0.u_grid.back(), ehi = psi0.u_grid.front();
    for (std::size_t i = 0; i < nu; ++i)
      for (std::size_t j = 0; j < nc; ++j) {
        const std::size_t p = i * nc + j;
        if (std::abs(psi0.psi1[p]) > 1e-13 * m0 || std::abs(psi0.psi2[p]) > 1e-13 * m0) {
          elo = std::min(elo, psi0.u_grid[i]);
          ehi = std::max(ehi, psi0.u_grid[i]);
        }
      }
    const double need = cfg.buffer_factor * t_final;
    if (elo - psi0.u_grid.front() <= need || psi0.u_grid.back() - ehi <= need)
      throw std::invalid_argument(
          "evolve: initial data lacks causal clearance from the u boundary (support [" +
          std::to_string(elo) + ", " + std::to_string(ehi) + "], need clearance " +
          std::to_string(need) + ")");
  }

  const std::size_t n = nu * nc;          // nodes per component
  const std::size_t nydbl = 4 * n;        // doubles in a stacked (psi1, psi2) vector
  std::vector<cplx> y(2 * n), st1(2 * n), st2(2 * n), acc(2 * n);
  std::copy(psi0.psi1.begin(), psi0.psi1.end(), y.begin());
  std::copy(psi0.psi2.begin(), psi0.psi2.end(), y.begin() + long(n));

  const auto& kern = simd::active_kernels();
  auto rhs = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    op.apply_minus_i_h(in.data(), in.data() + n, out.data(), out.data() + n);
  };
  auto check_boundary = [&](double t) {
    if (m0 <= 0.0) return;
    double edge = 0.0;
    for (std::size_t i : {std::size_t(0), std::size_t(1), nu - 2, nu - 1})
      for (std::size_t j = 0; j < nc; ++j) {
        edge = std::max(edge, std::abs(y[i * nc + j]));
        edge = std::max(edge, std::abs(y[n + i * nc + j]));
      }
    if (!std::isfinite(edge))
      throw std::runtime_error("evolve: non-finite field values at t = " + std::to_string(t));
    if (edge > cfg.boundary_tol * m0)
      throw std::runtime_error("evolve: radiation reached the u boundary at t = " +
                               std::to_string(t) + " (edge amplitude " + std::to_string(edge) +
                               " vs initial " + std::to_string(m0) + ")");
  };

  Evolution ev;
  ev.dt = dt;
  double t = 0.0;
  FieldState frame = psi0;
  frame.du1.clear();
  frame.dc1.clear();

  for (double target : times) {
    const long nstep = target > t ? long(std::ceil((target - t) / dt - 1e-12)) : 0;
    const double h = nstep > 0 ? (target - t) / double(nstep) : 0.0;
    for (long s = 0; s < nstep; ++s) {
      rhs(y, st2);                               // k1
      std::copy(st2.begin(), st2.end(), acc.begin());
      kern.add_scaled(dview(y.data()), 0.5 * h, dview(st2.data()), dview(st1.data()), nydbl);
      rhs(st1, st2);                             // k2
      kern.axpy_rr(2.0, dview(st2.data()), dview(acc.data()), nydbl);
      kern.add_scaled(dview(y.data()), 0.5 * h, dview(st2.data()), dview(st1.data()), nydbl);
      rhs(st1, st2);                             // k3
      kern.axpy_rr(2.0, dview(st2.data()), dview(acc.data()), nydbl);
      kern.add_scaled(dview(y.data()), h, dview(st2.data()), dview(st1.data()), nydbl);
      rhs(st1, st2);                             // k4
      kern.axpy_rr(1.0, dview(st2.data()), dview(acc.data()), nydbl);
      kern.axpy_rr(h / 6.0, dview(acc.data()), dview(y.data()), nydbl);
      ++ev.steps;
      t += h;
      if (ev.steps % 16 == 0) check_boundary(t);
    }
    t = target;
    check_boundary(t);
    frame.time = t;
    std::copy(y.begin(), y.begin() + long(n), frame.psi1.begin());
    std::copy(y.begin() + long(n), y.end(), frame.psi2.begin());
    ev.snapshots.push_back(frame);
    ev.energy.push_back(energy_inner_product(frame, frame, bg).real());
  }
  return ev;
}

}  // namespace kerr
