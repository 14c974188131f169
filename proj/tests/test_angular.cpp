#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kerr/angular.hpp"
#include "kerr/legendre.hpp"
#include "kerr/quadrature.hpp"
#include "oracles/dense_jacobi.hpp"

using namespace kerr;
namespace nb = std::numbers;

namespace {

// Independent assembly route for the oracle: matrix elements of
// A_w = Legendre(k) + 2akw + a^2 w^2 sin^2 by Gauss quadrature of the sin^2
// part (the Legendre part is diagonal in this basis by definition).
std::vector<std::vector<double>> quadrature_matrix(const KerrBackground& bg, double omega, int N) {
  const int m = std::abs(bg.k);
  const auto rule = gauss_legendre(2 * (m + N) + 8);
  std::vector<std::vector<double>> A(N, std::vector<double>(N, 0.0));
  std::vector<double> row(N);
  for (size_t q = 0; q < rule.x.size(); ++q) {
    const double c = rule.x[q];
    sph_legendre_row(m, m + N - 1, c, row);
    const double s2 = 1.0 - c * c;
    const double wfac = 2.0 * nb::pi * rule.w[q] * bg.a * bg.a * omega * omega * s2;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) A[i][j] += wfac * row[i] * row[j];
  }
  for (int i = 0; i < N; ++i) {
    const double l = m + i;
    A[i][i] += l * (l + 1.0) + 2.0 * bg.a * bg.k * omega;
  }
  return A;
}

}  // namespace

TEST_CASE("a=0: pure Legendre spectrum l(l+1)") {
  KerrBackground bg(1.0, 0.0, 1);
  const auto modes = spheroidal_eigs(bg, 0.37, 3);
  REQUIRE(modes.size() == 3);
  CHECK(std::abs(modes[0].lambda - 2.0) < 1e-10);
  CHECK(std::abs(modes[1].lambda - 6.0) < 1e-10);
  CHECK(std::abs(modes[2].lambda - 12.0) < 1e-10);
  for (const auto& md : modes) {
    CHECK(md.k == 1);
    CHECK(md.n_basis >= 3);
  }
}

TEST_CASE("a*w = 0 kills both corrections even at a != 0") {
  KerrBackground bg(1.0, 0.5, 1);
  const auto modes = spheroidal_eigs(bg, 0.0, 1);
  CHECK(std::abs(modes[0].lambda - 2.0) < 1e-12);
}

TEST_CASE("eigenvalues match a dense Jacobi oracle at doubled truncation") {
  KerrBackground bg(1.0, 0.5, 1);
  const double omega = 0.4;
  const auto modes = spheroidal_eigs(bg, omega, 4);

  const int N = 2 * modes[0].n_basis;
  const auto oracle_res = oracle::jacobi_eig(quadrature_matrix(bg, omega, N));
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(modes[n].lambda - oracle_res.values[n]) < 1e-10);
}

TEST_CASE("spectrum is strictly ascending and coefficient tails decay") {
  KerrBackground bg(1.0, 0.9, 2);
  const auto modes = spheroidal_eigs(bg, 1.1, 6);
  for (size_t n = 1; n < modes.size(); ++n) CHECK(modes[n].lambda > modes[n - 1].lambda);
  for (const auto& md : modes) {
    double cmax = 0.0;
    for (double c : md.coeffs) cmax = std::max(cmax, std::abs(c));
    CHECK(std::abs(md.coeffs.back()) < 1e-10 * cmax);
  }
}

TEST_CASE("theta_eval: poles, normalization, Legendre limit") {
  KerrBackground bg(1.0, 0.5, 1);
  const auto modes = spheroidal_eigs(bg, 0.3, 2);

  CHECK(theta_eval(modes[0], 1.0) == 0.0);
  CHECK(theta_eval(modes[0], -1.0) == 0.0);

  // 2 pi int Theta^2 dc = 1
  const auto rule = gauss_legendre(200);
  for (const auto& md : modes) {
    double acc = 0.0;
    for (size_t q = 0; q < rule.x.size(); ++q) {
      const double v = theta_eval(md, rule.x[q]);
      acc += 2.0 * nb::pi * rule.w[q] * v * v;
    }
    CHECK(std::abs(acc - 1.0) < 1e-10);
  }

  // a = 0 reduces Theta_{1} to the normalized Legendre function itself
  KerrBackground sch(1.0, 0.0, 1);
  const auto smodes = spheroidal_eigs(sch, 0.7, 1);
  for (double c : {-0.9, -0.3, 0.0, 0.42, 0.88})
    CHECK(std::abs(theta_eval(smodes[0], c) - sph_legendre(1, 1, c)) < 1e-12);
}

TEST_CASE("theta_eval_d matches finite differences") {
  KerrBackground bg(1.0, 0.8, 1);
  const auto modes = spheroidal_eigs(bg, 0.6, 3);
  for (double c : {-0.7, 0.1, 0.55}) {
    for (const auto& md : modes) {
      double v, dv;
      theta_eval_d(md, c, &v, &dv);
      CHECK(v == doctest::Approx(theta_eval(md, c)).epsilon(1e-13));
      const double h = 1e-6;
      const double fd = (theta_eval(md, c + h) - theta_eval(md, c - h)) / (2 * h);
      CHECK(dv == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("orthonormality at fixed omega") {
  KerrBackground bg(1.0, 0.7, 1);
  const auto modes = spheroidal_eigs(bg, 0.5, 4);
  for (size_t i = 0; i < modes.size(); ++i)
    for (size_t j = 0; j < modes.size(); ++j)
      CHECK(std::abs(angular_overlap(modes[i], modes[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
}

TEST_CASE("sin^2 matrix: pentadiagonal structure against quadrature") {
  KerrBackground bg(1.0, 0.5, 1);
  const int m = 1, N = 10;
  const auto rule = gauss_legendre(64);
  std::vector<double> row(N);
  std::vector<std::vector<double>> S(N, std::vector<double>(N, 0.0));
  for (size_t q = 0; q < rule.x.size(); ++q) {
    sph_legendre_row(m, m + N - 1, rule.x[q], row);
    const double s2 = 1.0 - rule.x[q] * rule.x[q];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) S[i][j] += 2.0 * nb::pi * rule.w[q] * s2 * row[i] * row[j];
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const int d = std::abs(i - j);
      if (d != 0 && d != 2) {
        CHECK(std::abs(S[i][j]) < 1e-12);  // couples l, l+-2 only
      } else {
        // analytic band: diag 1 - c_{l-1}^2 - c_l^2, off -c_l c_{l+1}
        const int l = m + std::min(i, j);
        const double expect = (d == 0)
            ? 1.0 - std::pow(cos_coupling(l - 1, m), 2) - std::pow(cos_coupling(l, m), 2)
            : -cos_coupling(l, m) * cos_coupling(l + 1, m);
        CHECK(S[i][j] == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("frequency-coupling identity across a 5x5 grid, n,n' <= 4") {
  KerrBackground bg(1.0, 0.5, 1);
  const std::vector<double> omegas = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::vector<AngularMode>> banks;
  for (double w : omegas) banks.push_back(spheroidal_eigs(bg, w, 4));

  double worst = 0.0;
  for (size_t wi = 0; wi < omegas.size(); ++wi) {
    for (size_t wj = 0; wj < omegas.size(); ++wj) {
      if (wi == wj) continue;  // same frequency: plain orthonormality, tested above
      for (int n = 0; n < 4; ++n) {
        for (int np = 0; np < 4; ++np) {
          const auto& m1 = banks[wi][n];
          const auto& m2 = banks[wj][np];
          const double alpha = alpha_coupling(bg, m1, m2);
          const double lhs = angular_overlap(m1, m2);
          const double rhs = (m1.omega - m2.omega) * alpha;
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("alpha_coupling oracle: quadrature of both inner products") {
  KerrBackground bg(1.0, 0.5, 1);
  const auto b1 = spheroidal_eigs(bg, 0.2, 2);
  const auto b2 = spheroidal_eigs(bg, 0.3, 2);
  const auto& m1 = b1[0];
  const auto& m2 = b2[1];

  const auto rule = gauss_legendre(256);
  double ov = 0.0, s2ov = 0.0;
  for (size_t q = 0; q < rule.x.size(); ++q) {
    const double c = rule.x[q];
    const double t1 = theta_eval(m1, c), t2 = theta_eval(m2, c);
    ov += 2.0 * nb::pi * rule.w[q] * t1 * t2;
    s2ov += 2.0 * nb::pi * rule.w[q] * (1.0 - c * c) * t1 * t2;
  }
  const double alpha_quad = (2.0 * bg.a * bg.k * ov + bg.a * bg.a * (m1.omega + m2.omega) * s2ov) /
                            (m1.lambda - m2.lambda);
  CHECK(std::abs(angular_overlap(m1, m2) - ov) < 1e-10);
  CHECK(std::abs(angular_sin2_overlap(m1, m2) - s2ov) < 1e-10);
  CHECK(std::abs(alpha_coupling(bg, m1, m2) - alpha_quad) < 1e-8);
  // the identity itself, against the quadratured overlap
  CHECK(std::abs(ov - (m1.omega - m2.omega) * alpha_coupling(bg, m1, m2)) < 1e-8);
}

TEST_CASE("alpha_coupling rejects degenerate pairs") {
  KerrBackground bg(1.0, 0.5, 1);
  const auto modes = spheroidal_eigs(bg, 0.25, 2);
  CHECK_THROWS_AS((void)alpha_coupling(bg, modes[0], modes[0]), std::invalid_argument);
}

TEST_CASE("a=0: alpha vanishes for distinct modes") {
  KerrBackground bg(1.0, 0.0, 1);
  const auto b1 = spheroidal_eigs(bg, 0.2, 2);
  const auto b2 = spheroidal_eigs(bg, 0.5, 2);
  CHECK(std::abs(alpha_coupling(bg, b1[0], b2[1])) < 1e-14);
}

TEST_CASE("omega-continuity: no mode crossings along the window") {
  KerrBackground bg(1.0, 0.9, 1);
  std::vector<AngularMode> prev = spheroidal_eigs(bg, -1.2, 4);
  for (double w = -1.1; w <= 1.21; w += 0.1) {
    const auto cur = spheroidal_eigs(bg, w, 4);
    for (int n = 0; n < 4; ++n) {
      CHECK(angular_overlap(prev[n], cur[n]) > 0.99);
      CHECK(std::abs(cur[n].lambda - prev[n].lambda) < 3.0);  // O(h) with modest slope
    }
    prev = cur;
  }
}
