#include "kerr/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "kerr/angular.hpp"
#include "kerr/energy.hpp"
#include "kerr/timedomain.hpp"

namespace kerr {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double default_eta(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double default_eta_d(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return default_eta(x) * (-2.0 * x / (q * q));
}

}  // namespace

double carrier_frequency(const WavePacketSpec& spec, const KerrBackground& bg) {
  if (std::isnan(spec.omega_tilde)) return 0.5 * bg.omega0;
  return spec.omega_tilde;
}

FieldState build_wavepacket(const WavePacketSpec& spec, const KerrBackground& bg,
                            const std::vector<double>& u_grid,
                            const std::vector<double>& costheta_grid) {
  if (spec.k != bg.k)
    throw std::invalid_argument("wave packet and background disagree on k");
  if (!(spec.L > 0.0)) throw std::invalid_argument("packet scale L must be positive");
  if (spec.n_tilde < 1) throw std::invalid_argument("seed mode index is 1-based");

  const double wt = carrier_frequency(spec, bg);
  const double lo = spec.L * spec.L - spec.L;
  const double hi = spec.L * spec.L + spec.L;
  if (u_grid.size() < 2 || u_grid.front() >= lo || u_grid.back() <= hi)
    throw std::invalid_argument(
        "wave packet support [L^2-L, L^2+L] must lie strictly inside the u grid");

  double h_max = 0.0;
  for (std::size_t i = 1; i < u_grid.size(); ++i)
    h_max = std::max(h_max, u_grid[i] - u_grid[i - 1]);
  if (wt != 0.0 && kTwoPi / std::abs(wt) < 16.0 * h_max)
    throw std::invalid_argument(
        "under-resolved carrier: fewer than 16 grid points per wavelength 2pi/|omega_tilde|");

  const auto modes = spheroidal_eigs(bg, wt, static_cast<int>(spec.n_tilde));
  const AngularMode& mode = modes[spec.n_tilde - 1];

  const auto eta = spec.eta ? spec.eta : default_eta;
  std::function<double(double)> eta_d = spec.eta_d;
  if (!eta_d) {
    if (spec.eta) {
      eta_d = [eta](double x) { return (eta(x + 1e-6) - eta(x - 1e-6)) / 2e-6; };
    } else {
      eta_d = default_eta_d;
    }
  }

  FieldState st;
  st.k = spec.k;
  st.u_grid = u_grid;
  st.costheta_grid = costheta_grid;
  const std::size_t nu = u_grid.size(), nc = costheta_grid.size();
  st.psi1.assign(nu * nc, 0.0);
  st.psi2.assign(nu * nc, 0.0);
  st.du1.assign(nu * nc, 0.0);
  st.dc1.assign(nu * nc, 0.0);
  validate_state(st);

  std::vector<double> tv(nc), td(nc);
  for (std::size_t j = 0; j < nc; ++j)
    theta_eval_d(mode, costheta_grid[j], &tv[j], &td[j]);

  const double sqrtL = std::sqrt(spec.L);
  for (std::size_t i = 0; i < nu; ++i) {
    const double u = u_grid[i];
    const double x = (u - spec.L * spec.L) / spec.L;
    if (std::abs(x) >= 1.0) continue;
    const double env = eta(x) / sqrtL;
    const double denv = eta_d(x) / (spec.L * sqrtL);

    const double r = inverse_r(bg, u);
    const double s2 = r * r + bg.a * bg.a;
    const double sinv = 1.0 / std::sqrt(s2);
    const double dlns = r * delta(bg, r) / (s2 * s2);

    const cplx ein = std::polar(1.0, -wt * u);
    const cplx eout = std::polar(1.0, wt * u);
    const cplx mix = spec.c_in * ein + spec.c_out * eout;
    const cplx radial1 = env * sinv * mix;
    const cplx radial2 = env * sinv * wt * (spec.c_in * ein - spec.c_out * eout);
    const cplx dradial1 = (denv - env * dlns) * sinv * mix +
                          env * sinv * cplx(0.0, wt) * (spec.c_out * eout - spec.c_in * ein);

    for (std::size_t j = 0; j < nc; ++j) {
      const std::size_t p = i * nc + j;
      st.psi1[p] = tv[j] * radial1;
      st.psi2[p] = tv[j] * radial2;
      st.du1[p] = tv[j] * dradial1;
      st.dc1[p] = td[j] * radial1;
    }
  }
  return st;
}

UMatrices u_matrix(const Transmission& tr, double omega) {
  if (std::abs(omega - tr.omega) > 1e-9 * std::max(1.0, std::abs(omega)))
    throw std::invalid_argument("u_matrix: omega does not match the transmission data");
  if (std::abs(omega) < 1e-8 || std::abs(tr.Omega) < 1e-8)
    throw std::domain_error("u_matrix: spectral point excluded (omega at 0 or omega0)");

  UMatrices m;
  const double pref = 1.0 / (2.0 * omega * omega);
  const cplx q = tr.alpha / std::conj(tr.beta);
  m.U << pref, -pref * q, -pref * std::conj(q), pref;

  m.U_minus.setZero();
  if (omega * tr.Omega < 0.0) {
    const double amp = (std::abs(q) - 1.0) / (4.0 * omega * omega);
    const cplx ab = tr.alpha * tr.beta;
    const cplx phase = ab / std::abs(ab);
    m.U_minus << amp, amp * phase, amp * std::conj(phase), amp;
  }
  m.U_plus = m.U + m.U_minus;
  return m;
}

std::vector<SuperradianceRun> superradiance_experiment(
    const std::vector<WavePacketSpec>& specs, const KerrBackground& bg,
    const SuperradianceConfig& cfg) {
  std::vector<SuperradianceRun> out;
  out.reserve(specs.size());
  const double R = cfg.R > 0.0 ? cfg.R : 1.2 * bg.r1;

  for (const auto& spec : specs) {
    SuperradianceRun run;
    const double wt = carrier_frequency(spec, bg);
    run.L = spec.L;
    run.omega_tilde = wt;
    run.superradiant = wt * (wt - bg.omega0) < 0.0;

    // grid: packet support plus the causal reach of the run on both sides
    const double lo = spec.L * spec.L - spec.L;
    const double hi = spec.L * spec.L + spec.L;
    double du = cfg.du;
    if (wt != 0.0) du = std::min(du, kTwoPi / (17.0 * std::abs(wt)));
    const double u_min = std::min(cfg.u_min, lo - cfg.t_end - cfg.grid_buffer);
    const double u_max = hi + cfg.t_end + cfg.grid_buffer;
    const auto nu = static_cast<std::size_t>(std::ceil((u_max - u_min) / du)) + 1;
    const FieldState grid = make_state(spec.k, u_min, u_max, nu, cfg.ncostheta);

    const FieldState psi0 = build_wavepacket(spec, bg, grid.u_grid, grid.costheta_grid);
    run.total_energy = energy_inner_product(psi0, psi0, bg).real();

    SynthesisConfig scfg = cfg.spectral;
    if (scfg.W <= 0.0) scfg.W = auto_window(psi0, bg, scfg);
    const auto lines = project_all(psi0, bg, scfg);
    const EnergySplit split =
        energy_split(lines, bg, psi0.u_grid, psi0.costheta_grid, scfg);
    run.low_energy = split.low_energy;
    run.split_J = split.J;

    run.mode_energy.assign(lines.size(), 0.0);
    for (std::size_t n = 0; n < lines.size(); ++n)
      for (std::size_t q = 0; q < lines[n].omega.size(); ++q) {
        const Transmission& t = lines[n].scattering[q];
        const double qf =
            t.t11 * std::norm(lines[n].c1[q]) +
            2.0 * t.t12 * (std::conj(lines[n].c1[q]) * lines[n].c2[q]).real() +
            t.t22 * std::norm(lines[n].c2[q]);
        run.mode_energy[n] +=
            lines[n].weight[q] / (kTwoPi * t.omega * t.Omega) * qf;
      }
    run.tail_energy.assign(lines.size(), 0.0);
    for (std::size_t n0 = lines.size(); n0-- > 0;)
      run.tail_energy[n0] = run.mode_energy[n0] +
                            (n0 + 1 < lines.size() ? run.tail_energy[n0 + 1] : 0.0);

    // channel flux ratios |alpha/beta|^2 at the carrier
    const auto modes = spheroidal_eigs(
        bg, wt, static_cast<int>(std::max(scfg.n_max, spec.n_tilde)),
        scfg.angular_tol);
    run.flux_ratio_by_mode.reserve(modes.size());
    for (const auto& m : modes) {
      const Transmission tr =
          transmission(RadialPotential(bg, wt, m.lambda), scfg.radial_tol);
      run.flux_ratio_by_mode.push_back(std::norm(tr.alpha / tr.beta));
    }
    run.flux_ratio = run.flux_ratio_by_mode[spec.n_tilde - 1];

    EvolutionConfig ecfg;
    ecfg.t_end = cfg.t_end;
    ecfg.cfl_safety = cfg.cfl_safety;
    const Evolution ev = evolve(psi0, bg, ecfg);
    run.exterior_energy = exterior_energy(ev.snapshots.back(), bg, R);
    run.amplification =
        run.total_energy != 0.0 ? run.exterior_energy / run.total_energy : 0.0;

    out.push_back(std::move(run));
  }
  return out;
}

std::string superradiance_json(const std::vector<SuperradianceRun>& runs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : runs) {
    arr.push_back(nlohmann::json{{"L", r.L},
                                 {"omega_tilde", r.omega_tilde},
                                 {"total_energy", r.total_energy},
                                 {"exterior_energy", r.exterior_energy},
                                 {"amplification", r.amplification},
                                 {"low_energy", r.low_energy},
                                 {"split_J", r.split_J},
                                 {"flux_ratio", r.flux_ratio},
                                 {"flux_ratio_by_mode", r.flux_ratio_by_mode},
                                 {"mode_energy", r.mode_energy},
                                 {"tail_energy", r.tail_energy},
                                 {"superradiant", r.superradiant}});
  }
  return arr.dump(2);
}

}  // namespace kerr
