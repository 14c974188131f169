#include "kerr/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kerr/timedomain.hpp"

namespace kerr {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Centered differences of psi1 on the grid; ghost zeros at the poles for
// k != 0 (where the field vanishes like sin^|k|), one-sided there for k = 0,
// one-sided at the u ends.
struct FdPlanes {
  std::vector<cplx> du, dc;
};

FdPlanes fd_planes(const FieldState& st) {
  const std::size_t nu = st.nu(), nc = st.nc();
  FdPlanes out;
  out.du.resize(nu * nc);
  out.dc.resize(nu * nc);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t ip = std::min(i + 1, nu - 1), im = i > 0 ? i - 1 : 0;
    const double den = st.u_grid[ip] - st.u_grid[im];
    for (std::size_t j = 0; j < nc; ++j)
      out.du[i * nc + j] = (st.psi1[ip * nc + j] - st.psi1[im * nc + j]) / den;
  }
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      cplx lo, hi;
      double clo, chi;
      if (j + 1 < nc) { hi = st.psi1[i * nc + j + 1]; chi = st.costheta_grid[j + 1]; }
      else if (st.k != 0) { hi = 0.0; chi = 1.0; }
      else { hi = st.psi1[i * nc + j]; chi = st.costheta_grid[j]; }
      if (j > 0) { lo = st.psi1[i * nc + j - 1]; clo = st.costheta_grid[j - 1]; }
      else if (st.k != 0) { lo = 0.0; clo = -1.0; }
      else { lo = st.psi1[i * nc + j]; clo = st.costheta_grid[j]; }
      if (chi == clo) { out.dc[i * nc + j] = 0.0; continue; }
      out.dc[i * nc + j] = (hi - lo) / (chi - clo);
    }
  // k = 0 pole-side nodes: fall back to one-sided differences.
  if (st.k == 0 && nc >= 2)
    for (std::size_t i = 0; i < nu; ++i) {
      out.dc[i * nc] = (st.psi1[i * nc + 1] - st.psi1[i * nc]) /
                       (st.costheta_grid[1] - st.costheta_grid[0]);
      out.dc[i * nc + nc - 1] = (st.psi1[i * nc + nc - 1] - st.psi1[i * nc + nc - 2]) /
                                (st.costheta_grid[nc - 1] - st.costheta_grid[nc - 2]);
    }
  return out;
}

// Per-row angular integrals of the density in the r measure:
//   F_i = 2 pi (Delta/s^2)_i sum_j wc_j dens_ij,
// so that E(> R) = int F du over [u(R), u_max].
std::vector<double> density_rows(const FieldState& st, const KerrBackground& bg,
                                 std::vector<double>* dens_out) {
  const std::size_t nu = st.nu(), nc = st.nc();
  const FdPlanes fd = fd_planes(st);
  const std::vector<double> wc = angular_weights(st.costheta_grid);
  std::vector<double> rows(nu, 0.0);
  if (dens_out) dens_out->assign(nu * nc, 0.0);
  for (std::size_t i = 0; i < nu; ++i) {
    const double r = inverse_r(bg, st.u_grid[i]);
    const double s2 = r * r + bg.a * bg.a;
    const double ds2 = delta(bg, r) / s2;
    double acc = 0.0;
    for (std::size_t j = 0; j < nc; ++j) {
      const std::size_t p = i * nc + j;
      const cplx dtphi = cplx(st.psi2[p].imag(), -st.psi2[p].real());  // -i psi2
      const cplx drphi = fd.du[p] / ds2;                               // du/dr = s^2/Delta
      const double d = energy_density(bg, r, st.costheta_grid[j], st.psi1[p], dtphi,
                                      drphi, fd.dc[p]);
      if (dens_out) (*dens_out)[p] = d;
      acc += wc[j] * d;
    }
    rows[i] = 2.0 * kPi * ds2 * acc;
  }
  return rows;
}

double integrate_rows_from(const std::vector<double>& rows, const std::vector<double>& u,
                           double u_start, double* tail_bound) {
  const std::size_t nu = u.size();
  std::size_t i0 = 0;
  while (i0 < nu && u[i0] < u_start) ++i0;
  if (i0 >= nu) throw std::domain_error("exterior_energy: R beyond the grid's radial coverage");
  double sum = 0.0;
  if (i0 > 0 && u[i0] > u_start) {
    const double f = rows[i0 - 1] +
                     (rows[i0] - rows[i0 - 1]) * (u_start - u[i0 - 1]) / (u[i0] - u[i0 - 1]);
    sum += 0.5 * (u[i0] - u_start) * (f + rows[i0]);
  }
  for (std::size_t i = i0; i + 1 < nu; ++i)
    sum += 0.5 * (u[i + 1] - u[i]) * (rows[i] + rows[i + 1]);
  if (tail_bound) *tail_bound = std::abs(rows[nu - 1]) * (u[nu - 1] - u_start);
  return sum;
}

double exterior_energy_impl(const FieldState& st, const KerrBackground& bg, double R,
                            double* tail_bound) {
  validate_state(st);
  if (st.k != bg.k)
    throw std::invalid_argument("exterior_energy: state k differs from background k");
  if (!(R > bg.r1)) throw std::domain_error("exterior_energy: R must lie outside the horizon");
  const double u_start = tortoise_u(bg, R);
  if (u_start < st.u_grid.front() - 1e-9)
    throw std::domain_error("exterior_energy: R below the grid's radial coverage");
  const std::vector<double> rows = density_rows(st, bg, nullptr);
  return integrate_rows_from(rows, st.u_grid, std::max(u_start, st.u_grid.front()), tail_bound);
}

}  // namespace

double energy_density(const KerrBackground& bg, double r, double costheta,
                      cplx phi, cplx dtphi, cplx drphi, cplx dcphi) {
  const double dl = delta(bg, r);
  if (!(dl > 0.0))
    throw std::domain_error("energy_density: r must lie outside the horizon");
  const double s2 = r * r + bg.a * bg.a;
  const double sin2 = 1.0 - costheta * costheta;
  const double k2 = double(bg.k) * double(bg.k);
  return (s2 * s2 / dl - bg.a * bg.a * sin2) * std::norm(dtphi) + dl * std::norm(drphi) +
         sin2 * std::norm(dcphi) + (k2 / sin2 - bg.a * bg.a * k2 / dl) * std::norm(phi);
}

cplx energy_inner_product(const FieldState& s1, const FieldState& s2,
                          const KerrBackground& bg) {
  validate_state(s1);
  validate_state(s2);
  require_same_grids(s1, s2);
  if (s1.k != bg.k)
    throw std::invalid_argument("energy_inner_product: state k differs from background k");
  const std::size_t nu = s1.nu(), nc = s1.nc();
  const std::vector<double> wc = angular_weights(s1.costheta_grid);
  const double a2k2 = bg.a * bg.a * double(bg.k) * double(bg.k);
  cplx sum = 0.0;

  if (s1.has_planes() && s2.has_planes()) {
    const std::vector<double> wu = radial_weights(s1.u_grid);
    for (std::size_t i = 0; i < nu; ++i) {
      const double r = inverse_r(bg, s1.u_grid[i]);
      const double s2v = r * r + bg.a * bg.a;
      const double ds2 = delta(bg, r) / s2v;
      cplx row = 0.0;
      for (std::size_t j = 0; j < nc; ++j) {
        const std::size_t p = i * nc + j;
        const double sin2 = 1.0 - s1.costheta_grid[j] * s1.costheta_grid[j];
        const double rho = s2v - bg.a * bg.a * sin2 * ds2;
        cplx term = s2v * std::conj(s1.du1[p]) * s2.du1[p] +
                    ds2 * (sin2 * std::conj(s1.dc1[p]) * s2.dc1[p] +
                           (double(bg.k) * double(bg.k) / sin2) * std::conj(s1.psi1[p]) *
                               s2.psi1[p]) -
                    (a2k2 / s2v) * std::conj(s1.psi1[p]) * s2.psi1[p] +
                    rho * std::conj(s1.psi2[p]) * s2.psi2[p];
        row += wc[j] * term;
      }
      sum += wu[i] * row;
    }
    return 2.0 * kPi * sum;
  }

  WaveOperator op(bg, s1);
  std::vector<cplx> lp(nu * nc);
  op.apply_rho_a(s2.psi1.data(), lp.data());
  for (std::size_t i = 0; i < nu; ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < nc; ++j) {
      const std::size_t p = i * nc + j;
      row += wc[j] * (std::conj(s1.psi1[p]) * lp[p] +
                      op.rho[p] * std::conj(s1.psi2[p]) * s2.psi2[p]);
    }
    sum += row;
  }
  return 2.0 * kPi * op.hu * sum;
}

double exterior_energy(const FieldState& st, const KerrBackground& bg, double R) {
  return exterior_energy_impl(st, bg, R, nullptr);
}

std::vector<EnergyReport> boundedness_sweep(const std::vector<FieldState>& snapshots,
                                            const KerrBackground& bg, double R,
                                            double growth_alert_factor) {
  std::vector<EnergyReport> reports;
  reports.reserve(snapshots.size());
  double ref = 0.0;
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const FieldState& st = snapshots[s];
    EnergyReport rep;
    rep.t = st.time;
    rep.R = R;
    rep.exterior_energy = exterior_energy_impl(st, bg, R, &rep.tail_bound);
    rep.total_energy = energy_inner_product(st, st, bg).real();
    std::vector<double> dens;
    density_rows(st, bg, &dens);
    std::size_t pmin = 0;
    for (std::size_t p = 1; p < dens.size(); ++p)
      if (dens[p] < dens[pmin]) pmin = p;
    rep.min_density = dens[pmin];
    rep.min_density_r = inverse_r(bg, st.u_grid[pmin / st.nc()]);
    rep.min_density_costheta = st.costheta_grid[pmin % st.nc()];
    if (s == 0)
      ref = std::max(rep.exterior_energy,
                     1e-12 * std::max(std::abs(rep.total_energy), 1.0));
    rep.growth_alert = rep.exterior_energy > growth_alert_factor * ref;
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace kerr
