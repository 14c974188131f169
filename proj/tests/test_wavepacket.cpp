#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "json.hpp"
#include "kerr/angular.hpp"
#include "kerr/energy.hpp"
#include "kerr/field.hpp"
#include "kerr/geometry.hpp"
#include "kerr/radial.hpp"
#include "kerr/wavepacket.hpp"

using namespace kerr;

namespace {

// packet on its own grid: support [L^2-L, L^2+L] plus a margin on both sides
FieldState packet_on_margin_grid(const WavePacketSpec& spec, const KerrBackground& bg,
                                 double margin, double h, std::size_t nc) {
  const double lo = spec.L * spec.L - spec.L - margin;
  const double hi = spec.L * spec.L + spec.L + margin;
  const auto nu = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  const FieldState g = make_state(spec.k, lo, hi, nu, nc);
  return build_wavepacket(spec, bg, g.u_grid, g.costheta_grid);
}

double min_eig(const Eigen::Matrix2cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("carrier frequency: explicit value wins, NaN falls to the band midpoint") {
  const KerrBackground bg(1.0, 0.9, 1);
  WavePacketSpec spec;
  CHECK(carrier_frequency(spec, bg) == doctest::Approx(0.5 * bg.omega0).epsilon(1e-15));
  spec.omega_tilde = 0.37;
  CHECK(carrier_frequency(spec, bg) == 0.37);
}

TEST_CASE("packet profile: envelope peak, support, and the c_out = 0 mode relation") {
  const KerrBackground bg(1.0, 0.5, 1);
  WavePacketSpec spec;
  spec.L = 4.0;  // support [12, 20], peak at u = 16

  const FieldState g = make_state(1, 6.0, 26.0, 201, 8);
  const FieldState st = build_wavepacket(spec, bg, g.u_grid, g.costheta_grid);
  CHECK(st.has_planes());
  CHECK(st.time == 0.0);

  const double wt = carrier_frequency(spec, bg);
  const auto mode = spheroidal_eigs(bg, wt, 1)[0];

  // |psi1| at the peak node u = 16 is eta(0)/sqrt(L) * |Theta| / sqrt(r^2+a^2)
  const std::size_t iu = 100;
  REQUIRE(g.u_grid[iu] == doctest::Approx(16.0).epsilon(1e-14));
  const double r = inverse_r(bg, 16.0);
  const double s = std::sqrt(r * r + bg.a * bg.a);
  for (std::size_t j = 0; j < st.nc(); ++j) {
    const double expect = std::abs(theta_eval(mode, st.costheta_grid[j])) / (2.0 * s);
    CHECK(std::abs(st.psi1[st.idx(iu, j)]) == doctest::Approx(expect).epsilon(1e-12));
  }

  // outside the support the state vanishes identically
  for (std::size_t i = 0; i < st.nu(); ++i) {
    if (st.u_grid[i] > 12.0 && st.u_grid[i] < 20.0) continue;
    for (std::size_t j = 0; j < st.nc(); ++j) {
      CHECK(st.psi1[st.idx(i, j)] == cplx(0.0, 0.0));
      CHECK(st.du1[st.idx(i, j)] == cplx(0.0, 0.0));
    }
  }

  // c_out = 0: the packet rides a single mode, so i d_t psi = omega psi
  double worst = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < st.size(); ++p) {
    worst = std::max(worst, std::abs(st.psi2[p] - wt * st.psi1[p]));
    scale = std::max(scale, std::abs(st.psi1[p]));
  }
  CHECK(worst <= 1e-14 * std::abs(wt) * scale);
}

TEST_CASE("packet construction rejects bad input") {
  const KerrBackground bg(1.0, 0.5, 1);
  const FieldState g = make_state(1, 0.0, 30.0, 301, 8);

  WavePacketSpec spec;  // L = 6: support [30, 42] runs past u_max = 30
  CHECK_THROWS_AS(build_wavepacket(spec, bg, g.u_grid, g.costheta_grid),
                  std::invalid_argument);

  spec.L = 4.0;
  spec.omega_tilde = 3.0;  // wavelength ~2.1 vs 16 h = 1.6: resolved is 16 pts
  const FieldState coarse = make_state(1, 0.0, 30.0, 31, 8);
  CHECK_THROWS_AS(build_wavepacket(spec, bg, coarse.u_grid, coarse.costheta_grid),
                  std::invalid_argument);
  spec.omega_tilde = 0.5;
  CHECK_NOTHROW(build_wavepacket(spec, bg, g.u_grid, g.costheta_grid));

  spec.k = 2;  // background carries k = 1
  CHECK_THROWS_AS(build_wavepacket(spec, bg, g.u_grid, g.costheta_grid),
                  std::invalid_argument);
  spec.k = 1;

  spec.L = -1.0;
  CHECK_THROWS_AS(build_wavepacket(spec, bg, g.u_grid, g.costheta_grid),
                  std::invalid_argument);
  spec.L = 4.0;

  spec.n_tilde = 0;
  CHECK_THROWS_AS(build_wavepacket(spec, bg, g.u_grid, g.costheta_grid),
                  std::invalid_argument);
}

TEST_CASE("packet norm is L-stable once the carrier dominates the envelope") {
  // <Psi, Psi> ~ C [2 wt^2 <eta^2> + <eta'^2>/L^2]: at wt = 3 the L-dependent
  // piece is under one percent, so the norm settles to its limit within 2%.
  const KerrBackground bg(1.0, 0.9, 1);
  std::vector<double> norms;
  for (double L : {4.0, 6.0, 8.0}) {
    WavePacketSpec spec;
    spec.L = L;
    spec.omega_tilde = 3.0;
    const FieldState st = packet_on_margin_grid(spec, bg, 5.0, 0.06, 12);
    norms.push_back(energy_inner_product(st, st, bg).real());
  }
  const double lo = std::min({norms[0], norms[1], norms[2]});
  const double hi = std::max({norms[0], norms[1], norms[2]});
  CHECK(lo > 0.0);
  CHECK(hi / lo - 1.0 < 0.02);
}

TEST_CASE("packet norm approaches its limit like 1/L^2 at a slow carrier") {
  // At the default carrier omega0/2 the envelope-derivative energy <eta'^2>/L^2
  // dominates the norm, so the norm itself is nowhere near L-independent; what
  // is universal is the scaling law norm(L) = c0 + c1/L^2, checked here through
  // the constant-free ratio (n4 - n8)/(n6 - n8) = (1/16 - 1/64)/(1/36 - 1/64).
  const KerrBackground bg(1.0, 0.9, 1);
  std::vector<double> norms;
  for (double L : {4.0, 6.0, 8.0}) {
    WavePacketSpec spec;
    spec.L = L;
    const FieldState st = packet_on_margin_grid(spec, bg, 5.0, 0.05, 12);
    norms.push_back(energy_inner_product(st, st, bg).real());
  }
  const double ratio = (norms[0] - norms[2]) / (norms[1] - norms[2]);
  CHECK(ratio == doctest::Approx(27.0 / 7.0).epsilon(0.05));
}

TEST_CASE("U matrices: the positive split turns on exactly on the superradiant set") {
  const KerrBackground bg(1.0, 0.5, 1);
  for (double w : {0.4, -0.5, 0.25, 0.5 * bg.omega0}) {
    CAPTURE(w);
    const auto mode = spheroidal_eigs(bg, w, 1)[0];
    const Transmission tr = transmission(RadialPotential(bg, w, mode.lambda));
    const UMatrices m = u_matrix(tr, w);

    CHECK((m.U - (m.U_plus - m.U_minus)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(m.U(0, 1) - std::conj(m.U(1, 0))) <= 1e-14 * std::abs(m.U(0, 0)));

    if (w * tr.Omega < 0.0) {
      CHECK(m.U_minus.cwiseAbs().maxCoeff() > 0.0);
      CHECK(min_eig(m.U_minus) >= -1e-12);
      CHECK(min_eig(m.U_plus) >= -1e-12);
      CHECK(min_eig(m.U) < 0.0);  // the genuinely indefinite case
    } else {
      CHECK(m.U_minus.cwiseAbs().maxCoeff() == 0.0);
      CHECK(min_eig(m.U) >= -1e-12);
    }
  }

  // excluded spectral points and mismatched data are rejected
  Transmission tr;
  tr.alpha = 1.0;
  tr.beta = 0.5;
  tr.omega = 1e-12;
  tr.Omega = 0.3;
  CHECK_THROWS_AS(u_matrix(tr, 1e-12), std::domain_error);
  tr.omega = 0.3;
  tr.Omega = 1e-12;
  CHECK_THROWS_AS(u_matrix(tr, 0.3), std::domain_error);
  tr.Omega = 0.5;
  CHECK_THROWS_AS(u_matrix(tr, 0.31), std::invalid_argument);
}

TEST_CASE("U matrix reproduces the two-point transmission quadratic form") {
  // (1/(w W)) sum_ab t_ab phi_a(u) phi_b(v) with phi_1 = Re phi-acute,
  // phi_2 = Im phi-acute equals <(grave(u), conj grave(u)), U (grave(v), ...)>.
  const std::vector<double> grid = {-8.0, -6.0, -3.0, 1.0, 2.0, 7.0, 9.0};
  struct Sample {
    double a;
    double w;  // 0 -> omega0/2
  };
  for (const Sample smp : {Sample{0.5, 0.4}, Sample{0.5, 0.0}, Sample{0.9, 0.0}}) {
    const KerrBackground bg(1.0, smp.a, 1);
    const double w = smp.w != 0.0 ? smp.w : 0.5 * bg.omega0;
    CAPTURE(smp.a);
    CAPTURE(w);
    const auto mode = spheroidal_eigs(bg, w, 1)[0];
    const RadialPotential pot(bg, w, mode.lambda);
    const JostSolution acute = jost_acute(pot, grid, 1e-12);
    const JostSolution grave = jost_grave(pot, grid, 1e-12);
    const Transmission tr = transmission(pot, 1e-12);
    const Eigen::Matrix2cd U = u_matrix(tr, w).U;

    const double tnorm = (std::abs(tr.t11) + 2.0 * std::abs(tr.t12) +
                          std::abs(tr.t22)) /
                         std::abs(w * tr.Omega);
    for (std::size_t iu : {0u, 2u, 4u, 5u}) {
      for (std::size_t iv : {1u, 3u, 6u}) {
        const cplx au = acute.phi[iu], av = acute.phi[iv];
        const double lhs = (tr.t11 * au.real() * av.real() +
                            tr.t12 * (au.real() * av.imag() + au.imag() * av.real()) +
                            tr.t22 * au.imag() * av.imag()) /
                           (w * tr.Omega);
        const Eigen::Vector2cd x(grave.phi[iu], std::conj(grave.phi[iu]));
        const Eigen::Vector2cd y(grave.phi[iv], std::conj(grave.phi[iv]));
        const cplx rhs = x.dot(U * y);  // Eigen dot conjugates the first slot
        // Each side of the identity contracts solutions that grow to ~|beta|
        // on one side of the barrier, cancelling that many digits, so the
        // residual is measured against the terms actually being cancelled.
        const double term_u = U.cwiseAbs().maxCoeff() * std::abs(grave.phi[iu]) *
                              std::abs(grave.phi[iv]);
        const double term_t = tnorm * std::abs(au) * std::abs(av);
        const double scale = std::max({1.0, std::abs(lhs), term_u, term_t});
        CHECK(std::abs(lhs - rhs.real()) <= 1e-7 * scale);
        CHECK(std::abs(rhs.imag()) <= 1e-7 * scale);
        // away from large amplitudes the plain relative residual holds too
        if (term_u + term_t <= 20.0 * std::max(1.0, std::abs(lhs)))
          CHECK(std::abs(lhs - rhs.real()) <= 1e-7 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("superradiance experiment: amplified seed channel, decaying mode tail") {
  const KerrBackground bg(1.0, 0.9, 1);

  WavePacketSpec seed;  // default carrier omega0/2 sits inside the band
  seed.L = 4.0;
  WavePacketSpec control = seed;
  control.omega_tilde = 0.3;  // outside the band: w (w - omega0) > 0

  SuperradianceConfig cfg;
  cfg.t_end = 6.0;
  cfg.u_min = -30.0;
  cfg.du = 0.15;
  cfg.ncostheta = 12;
  cfg.grid_buffer = 6.0;
  cfg.spectral.n_max = 3;
  cfg.spectral.W = 1.5;
  cfg.spectral.radial_tol = 1e-10;

  const auto runs = superradiance_experiment({seed, control}, bg, cfg);
  REQUIRE(runs.size() == 2);

  const SuperradianceRun& sr = runs[0];
  CHECK(sr.superradiant);
  CHECK(sr.omega_tilde == doctest::Approx(0.5 * bg.omega0).epsilon(1e-15));
  CHECK(sr.flux_ratio > 1.0 + 1e-7);  // the seed channel amplifies
  CHECK(sr.total_energy > 0.0);
  CHECK(std::isfinite(sr.exterior_energy));
  CHECK(sr.amplification == doctest::Approx(sr.exterior_energy / sr.total_energy));
  CHECK(sr.split_J > 0.0);
  CHECK(std::isfinite(sr.low_energy));

  REQUIRE(sr.tail_energy.size() == 3);
  CHECK(sr.tail_energy[0] > 0.0);
  for (std::size_t i = 0; i + 1 < sr.tail_energy.size(); ++i)
    CHECK(sr.tail_energy[i] >= sr.tail_energy[i + 1] - 1e-12 * sr.tail_energy[0]);
  CHECK(sr.mode_energy[0] > 0.9 * sr.tail_energy[0]);  // seed line dominates

  const SuperradianceRun& ct = runs[1];
  CHECK_FALSE(ct.superradiant);
  CHECK(ct.flux_ratio < 1.0);  // |alpha|^2 - |beta|^2 = -w/W < 0 off the band
  CHECK(ct.total_energy > 0.0);

  // the JSON report round-trips the per-run record
  const auto j = nlohmann::json::parse(superradiance_json(runs));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  for (const char* key : {"L", "omega_tilde", "total_energy", "exterior_energy",
                          "amplification", "low_energy", "split_J", "flux_ratio",
                          "flux_ratio_by_mode", "mode_energy", "tail_energy",
                          "superradiant"})
    CHECK(j[0].contains(key));
  CHECK(j[0]["L"].get<double>() == 4.0);
  CHECK(j[0]["superradiant"].get<bool>());
  CHECK_FALSE(j[1]["superradiant"].get<bool>());
  CHECK(j[0]["flux_ratio"].get<double>() == doctest::Approx(sr.flux_ratio));
  CHECK(j[0]["tail_energy"].size() == 3);
}
