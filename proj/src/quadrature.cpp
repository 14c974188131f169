#include "kerr/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kerr {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[i] = xm - xl * z;
    rule.x[n - 1 - i] = xm + xl * z;
    rule.w[i] = rule.w[n - 1 - i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
  }
  return rule;
}

GaussRule composite_gauss(const std::vector<double>& breakpoints, int order) {
  if (breakpoints.size() < 2) throw std::invalid_argument("composite_gauss: need >= 2 breakpoints");
  const GaussRule base = gauss_legendre(order);
  GaussRule rule;
  rule.x.reserve((breakpoints.size() - 1) * order);
  rule.w.reserve((breakpoints.size() - 1) * order);
  for (size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p], b = breakpoints[p + 1];
    if (!(b > a)) throw std::invalid_argument("composite_gauss: breakpoints must increase");
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
      rule.x.push_back(mid + hw * base.x[i]);
      rule.w.push_back(hw * base.w[i]);
    }
  }
  return rule;
}

}  // namespace kerr
