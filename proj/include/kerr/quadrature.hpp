#pragma once
#include <vector>

namespace kerr {

struct GaussRule {
  std::vector<double> x, w;
};

// n-point Gauss-Legendre rule on [a, b]; nodes by Newton iteration on the
// Legendre recurrence.  Exact for polynomials of degree <= 2n - 1.
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Composite rule: an order-`order` Gauss panel on every consecutive pair of
// breakpoints (breakpoints strictly increasing).
GaussRule composite_gauss(const std::vector<double>& breakpoints, int order);

}  // namespace kerr
