#include "kerr/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace kerr {

KerrBackground::KerrBackground(double M_, double a_, int k_) : M(M_), a(a_), k(k_) {
  if (!(M > 0.0))
    throw std::invalid_argument("KerrBackground: M must be positive");
  if (!(M * M > a * a))
    throw std::invalid_argument("KerrBackground: non-extreme background requires M^2 > a^2");
  auto [rp, rm] = horizon_radii(M, a);
  r1 = rp;
  r2 = rm;
  omega0 = -a * k / (r1 * r1 + a * a);  // r1^2 + a^2 = 2 M r1
}

std::pair<double, double> horizon_radii(double M, double a) {
  const double s = std::sqrt((M - a) * (M + a));
  const double rp = M + s;
  // r2 as a^2/r1 keeps the product r1*r2 = a^2 exact and avoids cancellation
  // as a -> 0.
  return {rp, a * a / rp};
}

double delta(const KerrBackground& bg, double r) {
  return (r - bg.r1) * (r - bg.r2);
}

double tortoise_u(const KerrBackground& bg, double r) {
  if (!(r > bg.r1))
    throw std::invalid_argument("tortoise_u: r must lie outside the outer horizon");
  const double M = bg.M, r1 = bg.r1, r2 = bg.r2;
  return r + (2 * M * r1 * std::log((r - r1) / M) - 2 * M * r2 * std::log((r - r2) / M)) / (r1 - r2);
}

namespace {

// Shared Newton core: returns r - r1 (exact near the horizon via the
// log substitution r = r1 + M e^x).
double solve_excess(const KerrBackground& bg, double u) {
  const double M = bg.M, a = bg.a, r1 = bg.r1, r2 = bg.r2;
  const double kappa = (r1 - r2) / (2 * M * r1);  // exponential approach rate at the horizon

  if (u > r1 + 4 * M) {
    // Far branch: Newton in r, u ~ r - O(log r).
    double r = u;
    for (int it = 0; it < 100; ++it) {
      const double f = tortoise_u(bg, r) - u;
      const double dudr = (r * r + a * a) / delta(bg, r);
      double step = f / dudr;
      if (r - step <= r1) step = 0.5 * (r - r1);  // never cross the horizon
      r -= step;
      if (std::abs(step) <= 1e-15 * r) return r - r1;
    }
    throw std::runtime_error("inverse_r: far-branch Newton failed to converge");
  }

  // Horizon branch: Newton in x = ln((r-r1)/M).  Substituting r = r1 + M e^x
  // removes the r - r1 cancellation entirely:
  //   u(x) = r1 + M e^x + [2 M r1 x - 2 M r2 ln((r1 + M e^x - r2)/M)] / (r1 - r2)
  // with du/dx = (r^2 + a^2)/(r - r2), which is O(1) uniformly.
  auto u_of_x = [&](double x) {
    const double ex = std::exp(x);
    const double r = r1 + M * ex;
    return r + (2 * M * r1 * x - 2 * M * r2 * std::log((r - r2) / M)) / (r1 - r2);
  };
  const double c2 = (2 * M * r2 / (r1 - r2)) * std::log((r1 - r2) / M);
  double x = kappa * (u - r1 + c2);
  if (x < -745.0) return 0.0;  // e^x underflows
  for (int it = 0; it < 100; ++it) {
    const double r = r1 + M * std::exp(x);
    const double dudx = (r * r + a * a) / (r - r2);
    const double step = (u_of_x(x) - u) / dudx;
    x -= step;
    if (x < -745.0) return 0.0;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x)))
      return M * std::exp(x);
  }
  throw std::runtime_error("inverse_r: horizon-branch Newton failed to converge");
}

}  // namespace

double inverse_r(const KerrBackground& bg, double u) {
  return bg.r1 + solve_excess(bg, u);
}

double inverse_r_excess(const KerrBackground& bg, double u) {
  return solve_excess(bg, u);
}

double ergosphere_indicator(const KerrBackground& bg, double r, double costheta) {
  return delta(bg, r) - bg.a * bg.a * (1.0 - costheta * costheta);
}

}  // namespace kerr
