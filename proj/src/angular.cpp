#include "kerr/angular.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kerr/legendre.hpp"

namespace kerr {

namespace {

// Dense symmetric matrix of A_omega in the normalized Legendre basis of size N
// starting at l0 = |k|.  Pentadiagonal by the exact algebraic split.
Eigen::MatrixXd assemble(const KerrBackground& bg, double omega, int k, int N) {
  const int m = std::abs(k);
  const double aw = bg.a * omega;
  const double aw2 = aw * aw;
  const double shift = 2.0 * bg.a * k * omega;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const double l = m + i;
    const double cm1 = cos_coupling(m + i - 1, m);  // 0 at the bottom row
    const double c0 = cos_coupling(m + i, m);
    // (I - C^2) diagonal: 1 - c_{l-1}^2 - c_l^2
    A(i, i) = l * (l + 1.0) + shift + aw2 * (1.0 - cm1 * cm1 - c0 * c0);
    if (i + 2 < N) {
      const double c1 = cos_coupling(m + i + 1, m);
      A(i, i + 2) = A(i + 2, i) = -aw2 * c0 * c1;
    }
  }
  return A;
}

std::vector<double> solve_lowest(const KerrBackground& bg, double omega, int k, int N,
                                 int n_max, Eigen::MatrixXd* vecs) {
  const Eigen::MatrixXd A = assemble(bg, omega, k, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spheroidal_eigs: eigensolver failed to converge");
  std::vector<double> lam(n_max);
  for (int n = 0; n < n_max; ++n) lam[n] = es.eigenvalues()(n);
  if (vecs) *vecs = es.eigenvectors().leftCols(n_max);
  return lam;
}

}  // namespace

std::vector<AngularMode> spheroidal_eigs(const KerrBackground& bg, double omega,
                                         int n_max, double tol) {
  if (n_max < 1) throw std::invalid_argument("spheroidal_eigs: n_max must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("spheroidal_eigs: tol must be positive");
  const int m = std::abs(bg.k);
  const double aw = std::abs(bg.a * omega);

  int N = std::max(16, m + 8 * int(std::ceil(aw)) + 2 * n_max);
  constexpr int kCap = 4096;
  std::vector<double> lam = solve_lowest(bg, omega, bg.k, N, n_max, nullptr);
  Eigen::MatrixXd vecs;
  while (true) {
    const int N2 = 2 * N;
    if (N2 > kCap)
      throw std::runtime_error("spheroidal_eigs: basis cap reached without eigenvalue convergence");
    std::vector<double> lam2 = solve_lowest(bg, omega, bg.k, N2, n_max, &vecs);
    double move = 0.0;
    for (int n = 0; n < n_max; ++n)
      move = std::max(move, std::abs(lam2[n] - lam[n]) / std::max(1.0, std::abs(lam2[n])));
    lam = std::move(lam2);
    N = N2;
    if (move < tol) break;
  }

  std::vector<AngularMode> out(n_max);
  for (int n = 0; n < n_max; ++n) {
    AngularMode& md = out[n];
    md.k = bg.k;
    md.n = n + 1;
    md.omega = omega;
    md.lambda = lam[n];
    md.n_basis = N;
    md.coeffs.resize(N);
    Eigen::VectorXd v = vecs.col(n);
    // Sign convention: dominant coefficient positive (keeps Theta continuous in omega).
    int imax = 0;
    for (int i = 1; i < N; ++i)
      if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
    if (v(imax) < 0.0) v = -v;
    for (int i = 0; i < N; ++i) md.coeffs[i] = v(i);
  }
  return out;
}

double theta_eval(const AngularMode& mode, double costheta) {
  const int m = std::abs(mode.k);
  std::vector<double> row(mode.n_basis);
  sph_legendre_row(m, m + mode.n_basis - 1, costheta, row);
  double acc = 0.0;
  for (int i = 0; i < mode.n_basis; ++i) acc += mode.coeffs[i] * row[i];
  return acc;
}

void theta_eval_d(const AngularMode& mode, double costheta, double* value, double* dvalue) {
  const int m = std::abs(mode.k);
  std::vector<double> row(mode.n_basis), drow(mode.n_basis);
  sph_legendre_row_d(m, m + mode.n_basis - 1, costheta, row, drow);
  double acc = 0.0, dacc = 0.0;
  for (int i = 0; i < mode.n_basis; ++i) {
    acc += mode.coeffs[i] * row[i];
    dacc += mode.coeffs[i] * drow[i];
  }
  *value = acc;
  *dvalue = dacc;
}

double angular_overlap(const AngularMode& m1, const AngularMode& m2) {
  if (m1.k != m2.k) throw std::invalid_argument("angular_overlap: modes must share k");
  const int n = std::min(m1.n_basis, m2.n_basis);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += m1.coeffs[i] * m2.coeffs[i];
  return acc;
}

double angular_sin2_overlap(const AngularMode& m1, const AngularMode& m2) {
  if (m1.k != m2.k) throw std::invalid_argument("angular_sin2_overlap: modes must share k");
  const int m = std::abs(m1.k);
  const int n = std::max(m1.n_basis, m2.n_basis);
  auto padded = [&](const AngularMode& md, int i) {
    return i < md.n_basis ? md.coeffs[i] : 0.0;
  };
  // <x, (I - C^2) y> = x.y - (Cx).(Cy); C maps coefficient i to i -/+ 1 with
  // couplings c_{l-1}, c_l.  The C image needs one extra slot at the top.
  auto apply_C = [&](const AngularMode& md) {
    std::vector<double> out(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
      const double lo = (i > 0) ? cos_coupling(m + i - 1, m) * padded(md, i - 1) : 0.0;
      const double hi = cos_coupling(m + i, m) * padded(md, i + 1);
      out[i] = lo + hi;
    }
    return out;
  };
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += padded(m1, i) * padded(m2, i);
  const auto c1 = apply_C(m1), c2 = apply_C(m2);
  double cdot = 0.0;
  for (int i = 0; i <= n; ++i) cdot += c1[i] * c2[i];
  return dot - cdot;
}

double alpha_coupling(const KerrBackground& bg, const AngularMode& m1, const AngularMode& m2) {
  if (m1.k != m2.k) throw std::invalid_argument("alpha_coupling: modes must share k");
  const double dl = m1.lambda - m2.lambda;
  const double scale = std::max({1.0, std::abs(m1.lambda), std::abs(m2.lambda)});
  if (std::abs(dl) < 1e-9 * scale)
    throw std::invalid_argument("alpha_coupling: degenerate eigenvalue pair");
  const double num = 2.0 * bg.a * bg.k * angular_overlap(m1, m2) +
                     bg.a * bg.a * (m1.omega + m2.omega) * angular_sin2_overlap(m1, m2);
  return num / dl;
}

}  // namespace kerr
