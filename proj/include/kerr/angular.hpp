#pragma once
#include <vector>

#include "kerr/geometry.hpp"

namespace kerr {

// One eigenpair of the spheroidal operator
//   A_w = -d/dc (1-c^2) d/dc + (a w (1-c^2) + k)^2 / (1-c^2)
// at fixed frequency w, expanded in the sphere-normalized associated
// Legendre basis Y_l^|k|, l = |k| .. |k| + n_basis - 1.
struct AngularMode {
  int k = 0;
  int n = 1;           // 1-based, eigenvalues ascending; at a*w = 0, l = |k| + n - 1
  double omega = 0.0;
  double lambda = 0.0;
  std::vector<double> coeffs;  // coeffs[l - |k|], unit Euclidean norm
  int n_basis = 0;
};

// The n_max lowest eigenpairs of A_omega.  The algebraic split
//   (a w sin^2 + k)^2 / sin^2 = k^2/sin^2 + 2 a k w + a^2 w^2 sin^2
// is exact, so the matrix is pentadiagonal: diag(l(l+1) + 2akw) plus
// a^2 w^2 (I - C^2) with C the tridiagonal cosine coupling.  The basis is
// doubled until every returned eigenvalue moves by less than tol.
// Eigenvectors are L2(S^2)-normalized with the dominant coefficient positive.
std::vector<AngularMode> spheroidal_eigs(const KerrBackground& bg, double omega,
                                         int n_max, double tol = 1e-12);

// Theta_{n,w}(costheta) = sum_l coeffs[l] Y_l^|k|(costheta).
double theta_eval(const AngularMode& mode, double costheta);

// Value and d/d(costheta); costheta strictly inside (-1, 1).
void theta_eval_d(const AngularMode& mode, double costheta, double* value, double* dvalue);

// <Theta, Theta'> on L2(S^2): coefficient dot product (same basis family).
// Modes must share k.
double angular_overlap(const AngularMode& m1, const AngularMode& m2);

// <Theta, sin^2(theta) Theta'> via the exact band: x.y - (Cx).(Cy).
double angular_sin2_overlap(const AngularMode& m1, const AngularMode& m2);

// Frequency-coupling coefficient
//   alpha = [2 a k <Theta,Theta'> + a^2 (w + w') <Theta, sin^2 Theta'>] / (lambda - lambda'),
// defined for non-degenerate pairs; satisfies <Theta,Theta'> = (w - w') alpha.
double alpha_coupling(const KerrBackground& bg, const AngularMode& m1, const AngularMode& m2);

}  // namespace kerr
