#include "kerr/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kerr/quadrature.hpp"
#include "kerr/simd.hpp"
#include "kerr/threadpool.hpp"

namespace kerr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Per-row radial geometry shared by projection and synthesis.
struct RadialGeom {
  std::vector<double> r, s2, ds2, sinv, dlns;  // dlns = (ds/du)/s = r Delta / s^4
  std::vector<double> wu;                      // trapezoid weights
};

RadialGeom radial_geom(const KerrBackground& bg, const std::vector<double>& u) {
  RadialGeom g;
  const std::size_t nu = u.size();
  g.r.resize(nu);
  g.s2.resize(nu);
  g.ds2.resize(nu);
  g.sinv.resize(nu);
  g.dlns.resize(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    const double r = inverse_r(bg, u[i]);
    const double s2 = r * r + bg.a * bg.a;
    const double d = delta(bg, r);
    g.r[i] = r;
    g.s2[i] = s2;
    g.ds2[i] = d / s2;
    g.sinv[i] = 1.0 / std::sqrt(s2);
    g.dlns[i] = r * d / (s2 * s2);
  }
  g.wu = radial_weights(u);
  return g;
}

// The integrated-by-parts projection formula drops boundary terms, so the
// data must vanish at the u ends.
void require_interior_support(const FieldState& st) {
  const double m0 = max_abs(st);
  if (m0 == 0.0) return;
  const std::size_t nu = st.nu(), nc = st.nc();
  double edge = 0.0;
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, nu - 2, nu - 1})
    for (std::size_t j = 0; j < nc; ++j) {
      edge = std::max(edge, std::abs(st.psi1[st.idx(i, j)]));
      edge = std::max(edge, std::abs(st.psi2[st.idx(i, j)]));
    }
  if (edge > 1e-10 * m0)
    throw std::invalid_argument(
        "initial data must be compactly supported away from the u-grid boundary");
}

std::pair<cplx, cplx> project_impl(const FieldState& psi0, const KerrBackground& bg,
                                   const RadialGeom& geom, const std::vector<double>& wc,
                                   const AngularMode& mode, const JostSolution& js) {
  const std::size_t nu = psi0.nu(), nc = psi0.nc();
  const double w = mode.omega, a = bg.a;
  std::vector<double> w0(nc), w2(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const double c = psi0.costheta_grid[j];
    w0[j] = kTwoPi * wc[j] * theta_eval(mode, c);
    w2[j] = w0[j] * (1.0 - c * c);
  }
  cplx c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    const cplx* p1 = psi0.psi1.data() + i * nc;
    const cplx* p2 = psi0.psi2.data() + i * nc;
    cplx i0 = 0.0, i2 = 0.0, j0 = 0.0, j2 = 0.0;
    for (std::size_t j = 0; j < nc; ++j) {
      i0 += w0[j] * p1[j];
      i2 += w2[j] * p1[j];
      j0 += w0[j] * p2[j];
      j2 += w2[j] * p2[j];
    }
    const double s2 = geom.s2[i], ds2 = geom.ds2[i];
    const cplx f = (w * s2 + 2.0 * a * bg.k * (1.0 - ds2)) * i0 - w * a * a * ds2 * i2 +
                   s2 * j0 - a * a * ds2 * j2;
    const double common = geom.wu[i] * geom.sinv[i];
    c1 += common * js.phi[i].real() * f;
    c2 += common * js.phi[i].imag() * f;
  }
  return {w * c1, w * c2};
}

// t-matrix contraction d_a = sum_b t_ab c_b.
std::pair<cplx, cplx> contract(const Transmission& t, cplx c1, cplx c2) {
  return {t.t11 * c1 + t.t12 * c2, t.t12 * c1 + t.t22 * c2};
}

FieldState assemble(const std::function<cplx(double)>& f,
                    const std::vector<ModeProjection>& lines, const KerrBackground& bg,
                    const std::vector<double>& u_grid,
                    const std::vector<double>& costheta_grid, const SynthesisConfig& cfg) {
  FieldState out;
  out.k = bg.k;
  out.u_grid = u_grid;
  out.costheta_grid = costheta_grid;
  const std::size_t nu = u_grid.size(), nc = costheta_grid.size();
  out.psi1.assign(nu * nc, 0.0);
  out.psi2.assign(nu * nc, 0.0);
  out.du1.assign(nu * nc, 0.0);
  out.dc1.assign(nu * nc, 0.0);
  validate_state(out);

  if (cfg.check_tol > 0.0) {
    const double res = exclusion_residual(lines, bg, cfg);
    if (res > cfg.check_tol)
      throw std::runtime_error(
          "frequency quadrature not converged: the innermost panels at the excluded "
          "points still carry a relative mass of " +
          std::to_string(res));
  }

  bool any = false;
  for (const auto& line : lines)
    for (std::size_t q = 0; q < line.c1.size() && !any; ++q)
      any = line.c1[q] != 0.0 || line.c2[q] != 0.0;
  if (!any) return out;  // degenerate data: exactly zero output

  const RadialGeom geom = radial_geom(bg, u_grid);
  const auto& kern = simd::active_kernels();
  std::vector<double> th(nc), thd(nc);
  auto* o1 = reinterpret_cast<double*>(out.psi1.data());
  auto* o2 = reinterpret_cast<double*>(out.psi2.data());
  auto* od = reinterpret_cast<double*>(out.du1.data());
  auto* oc = reinterpret_cast<double*>(out.dc1.data());

  for (const auto& line : lines) {
    for (std::size_t q = 0; q < line.omega.size(); ++q) {
      const double w = line.omega[q];
      auto [d1, d2] = contract(line.scattering[q], line.c1[q], line.c2[q]);
      if (d1 == 0.0 && d2 == 0.0) continue;
      const cplx coef = f(w) * (line.weight[q] / (kTwoPi * w * (w - bg.omega0)));
      if (coef == 0.0) continue;
      const RadialPotential pot(bg, w, line.modes[q].lambda);
      const JostSolution js = jost_acute(pot, u_grid, cfg.radial_tol);
      for (std::size_t j = 0; j < nc; ++j)
        theta_eval_d(line.modes[q], costheta_grid[j], &th[j], &thd[j]);
      for (std::size_t i = 0; i < nu; ++i) {
        // Psi_a^{wn} = (Theta phi_a / s)(1, w)^T with phi_1 = Re, phi_2 = Im
        const cplx gph = d1 * js.phi[i].real() + d2 * js.phi[i].imag();
        const cplx gdp = d1 * js.dphi[i].real() + d2 * js.dphi[i].imag();
        const cplx g = coef * geom.sinv[i] * gph;
        const cplx gp = coef * geom.sinv[i] * gdp - g * geom.dlns[i];
        kern.axpy_cr(g.real(), g.imag(), th.data(), o1 + 2 * i * nc, nc);
        kern.axpy_cr(w * g.real(), w * g.imag(), th.data(), o2 + 2 * i * nc, nc);
        kern.axpy_cr(gp.real(), gp.imag(), th.data(), od + 2 * i * nc, nc);
        kern.axpy_cr(g.real(), g.imag(), thd.data(), oc + 2 * i * nc, nc);
      }
    }
  }
  return out;
}

}  // namespace

OmegaRule omega_quadrature(const KerrBackground& bg, const SynthesisConfig& cfg) {
  if (!(cfg.W > 0.0))
    throw std::invalid_argument("omega window W must be positive (set it or use auto_window)");
  if (!(cfg.exclusion_radius > 0.0) || !(cfg.delta_min > 0.0) || cfg.panel_order < 2)
    throw std::invalid_argument("quadrature controls must be positive, panel_order >= 2");
  const double W = cfg.W, dmin = cfg.delta_min;

  // Excluded points inside the window; omega0 merges into 0 when too close.
  std::vector<double> pts{0.0};
  if (std::abs(bg.omega0) >= 2.0 * dmin && std::abs(bg.omega0) < W - dmin)
    pts.push_back(bg.omega0);
  std::sort(pts.begin(), pts.end());

  std::vector<double> bp{-W, W};
  for (std::size_t p = 0; p < pts.size(); ++p) {
    double rad = cfg.exclusion_radius;
    if (pts.size() > 1)
      rad = std::min(rad, 0.45 * std::abs(pts[p == 0 ? 1 : p - 1] - pts[p]));
    rad = std::max(rad, dmin);
    bp.push_back(pts[p]);
    for (double off = dmin; off < rad; off *= 2.0) {
      bp.push_back(pts[p] - off);
      bp.push_back(pts[p] + off);
    }
    bp.push_back(pts[p] - rad);
    bp.push_back(pts[p] + rad);
  }
  std::sort(bp.begin(), bp.end());
  std::vector<double> clean;
  for (double x : bp) {
    if (x < -W || x > W) continue;
    if (clean.empty() || x - clean.back() > 0.05 * dmin) clean.push_back(x);
  }

  // Fill the unrefined gaps.  With an explicit regular_width the fill is
  // uniform; by default panels grow with |omega| (the transmission
  // coefficients vary on the barrier scale near the origin and flatten
  // far out, so width ~ 0.35 max(0.3, |omega|) resolves both regimes at
  // a near-minimal node count).
  auto fill_gap = [&](double g0, double g1, std::vector<double>& out) {
    if (cfg.regular_width > 0.0) {
      const double gap = g1 - g0;
      if (gap > cfg.regular_width * 1.0001) {
        const auto m = static_cast<std::size_t>(std::ceil(gap / cfg.regular_width));
        for (std::size_t q = 1; q < m; ++q)
          out.push_back(g0 + gap * double(q) / double(m));
      }
      return;
    }
    // graded march away from the origin (gaps never straddle 0)
    if (g0 >= 0.0) {
      for (double x = g0 + 0.35 * std::max(0.3, g0); x < g1 - 1e-12;
           x += 0.35 * std::max(0.3, x))
        out.push_back(x);
    } else {
      std::vector<double> tmp;
      for (double x = -g1 + 0.35 * std::max(0.3, -g1); x < -g0 - 1e-12;
           x += 0.35 * std::max(0.3, x))
        tmp.push_back(-x);
      out.insert(out.end(), tmp.rbegin(), tmp.rend());
    }
  };
  std::vector<double> full;
  for (std::size_t i = 0; i + 1 < clean.size(); ++i) {
    full.push_back(clean[i]);
    fill_gap(clean[i], clean[i + 1], full);
  }
  full.push_back(clean.back());

  OmegaRule rule;
  for (std::size_t i = 0; i + 1 < full.size(); ++i) {
    const GaussRule gr = gauss_legendre(cfg.panel_order, full[i], full[i + 1]);
    rule.nodes.insert(rule.nodes.end(), gr.x.begin(), gr.x.end());
    rule.weights.insert(rule.weights.end(), gr.w.begin(), gr.w.end());
  }
  // Nudge any node that landed dangerously close to an excluded point (the
  // radial solver floors |omega| and |Omega| at 1e-8).
  for (double& x : rule.nodes)
    for (double e : {0.0, bg.omega0})
      if (std::abs(x - e) < 1e-7) x = e + (x >= e ? 1e-7 : -1e-7);
  return rule;
}

std::pair<cplx, cplx> project(const FieldState& psi0, const KerrBackground& bg,
                              const AngularMode& mode, double radial_tol) {
  validate_state(psi0);
  if (psi0.k != bg.k || mode.k != bg.k)
    throw std::invalid_argument("field state, background and mode disagree on k");
  require_interior_support(psi0);
  const RadialGeom geom = radial_geom(bg, psi0.u_grid);
  const auto wc = angular_weights(psi0.costheta_grid);
  const RadialPotential pot(bg, mode.omega, mode.lambda);
  const JostSolution js = jost_acute(pot, psi0.u_grid, radial_tol);
  return project_impl(psi0, bg, geom, wc, mode, js);
}

std::pair<cplx, cplx> project(const FieldState& psi0, const KerrBackground& bg, int n,
                              double omega, double radial_tol, double angular_tol) {
  if (n < 1) throw std::invalid_argument("mode index n is 1-based");
  const auto eigs = spheroidal_eigs(bg, omega, n, angular_tol);
  return project(psi0, bg, eigs[static_cast<std::size_t>(n) - 1], radial_tol);
}

double auto_window(const FieldState& psi0, const KerrBackground& bg,
                   const SynthesisConfig& cfg) {
  if (max_abs(psi0) == 0.0) return 1.0;
  const double step = 0.25, cap = 16.0;
  const RadialGeom geom = radial_geom(bg, psi0.u_grid);
  const auto wc = angular_weights(psi0.costheta_grid);
  double peak = 0.0, last = step;
  int quiet = 0;
  for (double lvl = step; lvl <= cap + 1e-12; lvl += step) {
    double m = 0.0;
    for (double sgn : {1.0, -1.0}) {
      double w = sgn * lvl;
      for (double e : {0.0, bg.omega0})
        if (std::abs(w - e) < 0.02) w += (w >= e ? 0.0131 : -0.0131);
      const auto eigs = spheroidal_eigs(bg, w, static_cast<int>(cfg.n_max), cfg.angular_tol);
      for (const auto& md : eigs) {
        const RadialPotential pot(bg, w, md.lambda);
        const JostSolution js = jost_acute(pot, psi0.u_grid, cfg.radial_tol);
        const auto [c1, c2] = project_impl(psi0, bg, geom, wc, md, js);
        m = std::max({m, std::abs(c1), std::abs(c2)});
      }
    }
    peak = std::max(peak, m);
    last = lvl;
    if (peak > 0.0 && m < 1e-8 * peak) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
  }
  return std::min(cap, last + 0.5);
}

std::vector<ModeProjection> project_all(const FieldState& psi0, const KerrBackground& bg,
                                        SynthesisConfig cfg) {
  validate_state(psi0);
  if (psi0.k != bg.k)
    throw std::invalid_argument("field state and background disagree on k");
  require_interior_support(psi0);
  if (cfg.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (cfg.W <= 0.0) cfg.W = auto_window(psi0, bg, cfg);
  if (cfg.J > 0.0 && cfg.W < 2.0 * cfg.J - 1e-12)
    throw std::invalid_argument("window W must cover [-2J, 2J]");

  const OmegaRule rule = omega_quadrature(bg, cfg);
  const std::size_t nq = rule.nodes.size();
  const RadialGeom geom = radial_geom(bg, psi0.u_grid);
  const auto wc = angular_weights(psi0.costheta_grid);

  std::vector<ModeProjection> lines(cfg.n_max);
  for (std::size_t n = 0; n < cfg.n_max; ++n) {
    lines[n].n = static_cast<int>(n) + 1;
    lines[n].omega.resize(nq);
    lines[n].weight.resize(nq);
    lines[n].modes.resize(nq);
    lines[n].scattering.resize(nq);
    lines[n].c1.resize(nq);
    lines[n].c2.resize(nq);
  }
  parallel_for(nq, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t q = lo; q < hi; ++q) {
      const double w = rule.nodes[q];
      const auto eigs = spheroidal_eigs(bg, w, static_cast<int>(cfg.n_max), cfg.angular_tol);
      for (std::size_t n = 0; n < cfg.n_max; ++n) {
        const RadialPotential pot(bg, w, eigs[n].lambda);
        const JostSolution js = jost_acute(pot, psi0.u_grid, cfg.radial_tol);
        const auto [c1, c2] = project_impl(psi0, bg, geom, wc, eigs[n], js);
        auto& line = lines[n];
        line.omega[q] = w;
        line.weight[q] = rule.weights[q];
        line.modes[q] = eigs[n];
        line.scattering[q] = transmission(pot, cfg.radial_tol);
        line.c1[q] = c1;
        line.c2[q] = c2;
      }
    }
  });
  return lines;
}

double exclusion_residual(const std::vector<ModeProjection>& lines,
                          const KerrBackground& bg, const SynthesisConfig& cfg) {
  double inner = 0.0, total = 0.0;
  for (const auto& line : lines)
    for (std::size_t q = 0; q < line.omega.size(); ++q) {
      const double mass =
          line.weight[q] * (std::norm(line.c1[q]) + std::norm(line.c2[q]));
      total += mass;
      if (std::abs(line.omega[q]) < cfg.delta_min ||
          std::abs(line.omega[q] - bg.omega0) < cfg.delta_min)
        inner += mass;
    }
  return total > 0.0 ? inner / total : 0.0;
}

FieldState functional_calculus(const std::function<cplx(double)>& f,
                               const std::vector<ModeProjection>& lines,
                               const KerrBackground& bg,
                               const std::vector<double>& u_grid,
                               const std::vector<double>& costheta_grid,
                               const SynthesisConfig& cfg) {
  return assemble(f, lines, bg, u_grid, costheta_grid, cfg);
}

FieldState functional_calculus(const std::function<cplx(double)>& f,
                               const ModeProjection& line, const KerrBackground& bg,
                               const std::vector<double>& u_grid,
                               const std::vector<double>& costheta_grid,
                               const SynthesisConfig& cfg) {
  return assemble(f, {line}, bg, u_grid, costheta_grid, cfg);
}

FieldState synthesize(const std::vector<ModeProjection>& lines, const KerrBackground& bg,
                      const std::vector<double>& u_grid,
                      const std::vector<double>& costheta_grid, double t,
                      const SynthesisConfig& cfg) {
  FieldState out = assemble(
      [t](double w) { return std::polar(1.0, -w * t); }, lines, bg, u_grid,
      costheta_grid, cfg);
  out.time = t;
  return out;
}

double chi_low(double omega, double J) {
  const double x = std::abs(omega);
  if (x <= J) return 1.0;
  if (x >= 2.0 * J) return 0.0;
  const double y = x / J - 1.0;
  return 1.0 - y * y * y * (10.0 - y * (15.0 - 6.0 * y));
}

EnergySplit energy_split(const FieldState& psi0, const KerrBackground& bg,
                         SynthesisConfig cfg) {
  if (cfg.W <= 0.0) cfg.W = auto_window(psi0, bg, cfg);
  return energy_split(project_all(psi0, bg, cfg), bg, psi0.u_grid,
                      psi0.costheta_grid, cfg);
}

EnergySplit energy_split(const std::vector<ModeProjection>& lines,
                         const KerrBackground& bg,
                         const std::vector<double>& u_grid,
                         const std::vector<double>& costheta_grid,
                         SynthesisConfig cfg) {
  if (cfg.W <= 0.0)
    throw std::invalid_argument(
        "energy_split over precomputed projections needs an explicit window W");

  double J = cfg.J;
  if (J <= 0.0) {
    // smallest threshold catching 95% of the projection mass in [-2J, 2J]
    std::vector<std::pair<double, double>> mass;
    double total = 0.0;
    for (const auto& line : lines)
      for (std::size_t q = 0; q < line.omega.size(); ++q) {
        const double m =
            line.weight[q] * (std::norm(line.c1[q]) + std::norm(line.c2[q]));
        mass.emplace_back(std::abs(line.omega[q]), m);
        total += m;
      }
    std::sort(mass.begin(), mass.end());
    double run = 0.0, x = cfg.W;
    for (const auto& [aw, m] : mass) {
      run += m;
      if (run >= 0.95 * total) {
        x = aw;
        break;
      }
    }
    J = std::clamp(x / 2.0, 4.0 * cfg.delta_min, cfg.W / 2.0);
  } else if (cfg.W < 2.0 * J - 1e-12) {
    throw std::invalid_argument("window W must cover [-2J, 2J]");
  }

  EnergySplit split;
  split.J = J;
  split.low = functional_calculus([J](double w) { return cplx(chi_low(w, J)); }, lines,
                                  bg, u_grid, costheta_grid, cfg);
  split.high =
      functional_calculus([J](double w) { return cplx(1.0 - chi_low(w, J)); }, lines,
                          bg, u_grid, costheta_grid, cfg);
  for (const auto& line : lines)
    for (std::size_t q = 0; q < line.omega.size(); ++q) {
      const Transmission& t = line.scattering[q];
      const double qf = t.t11 * std::norm(line.c1[q]) +
                        2.0 * t.t12 * (std::conj(line.c1[q]) * line.c2[q]).real() +
                        t.t22 * std::norm(line.c2[q]);
      const double dmu = line.weight[q] /
                         (kTwoPi * line.omega[q] * (line.omega[q] - bg.omega0)) * qf;
      const double chi = chi_low(line.omega[q], J);
      split.low_energy += chi * (2.0 - chi) * dmu;
      split.total_norm += dmu;
    }
  return split;
}

}  // namespace kerr
