#include "rectdirac/dirac1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rectdirac/errors.hpp"
#include "rectdirac/types.hpp"

namespace rectdirac::dirac1d {

namespace {

void check_mass_param(double mu) {
  if (!std::isfinite(mu) || mu < 0.0) {
    throw DomainError("dirac1d: mass parameter must be finite and >= 0");
  }
}

double root_function(double mu, double nu) { return mu * std::sin(nu) + nu * std::cos(nu); }

}  // namespace

Root1D nu1(double mu) {
  check_mass_param(mu);
  if (mu == 0.0) {
    return {kPi / 2.0, 0.0};
  }

  // f(nu) = mu sin(nu) + nu cos(nu) is strictly decreasing on (pi/2, pi):
  // f' = (mu + 1) cos(nu) - nu sin(nu) < 0 there. f(pi/2) = mu > 0 and
  // f(pi) = -pi < 0, so there is exactly one sign change.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double lo = kPi / 2.0 * (1.0 + eps);
  double hi = kPi * (1.0 - eps);
  double f_lo = root_function(mu, lo);
  double f_hi = root_function(mu, hi);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    throw ConsistencyError("dirac1d::nu1: bracket lost its sign change");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const double f_mid = root_function(mu, mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      f_lo = f_hi = 0.0;
      break;
    }
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  if (std::abs(f_lo) <= std::abs(f_hi)) {
    return {lo, std::abs(f_lo)};
  }
  return {hi, std::abs(f_hi)};
}

double nu1_lower(double mu) {
  check_mass_param(mu);
  // 1/(1 + 1/mu) is read as 0 at mu = 0.
  const double factor = mu == 0.0 ? 0.0 : mu / (mu + 1.0);
  if (factor <= 0.5) {
    return kPi * 0.5;
  }
  // Two ulps down: for large mu the bound sits within 1e-17 of the root.
  return std::nextafter(std::nextafter(kPi * factor, 0.0), 0.0);
}

double lambda1_1d(double a, double m) {
  if (!std::isfinite(a) || a <= 0.0) {
    throw DomainError("dirac1d::lambda1_1d: length must be positive");
  }
  check_mass_param(m);
  const double nu = nu1(m * a).nu;
  return std::hypot(m, nu / a);
}

}  // namespace rectdirac::dirac1d
