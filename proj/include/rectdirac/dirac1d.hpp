#pragma once

// Ground state of the one-dimensional Dirac operator on an interval with
// infinite-mass boundary conditions phi_2(+-a/2) = +-i phi_1(+-a/2).

namespace rectdirac::dirac1d {

struct Root1D {
  double nu = 0.0;        ///< in [pi/2, pi)
  double residual = 0.0;  ///< |mu sin(nu) + nu cos(nu)|
};

/// Unique root of tan(nu)/nu = -1/mu in [pi/2, pi), found by bisection on
/// the pole-free form mu sin(nu) + nu cos(nu) = 0. mu = 0 returns pi/2.
/// Throws DomainError for negative or non-finite mu.
Root1D nu1(double mu);

/// pi * max{1/(1+1/mu), 1/2}; a lower bound for nu1(mu).
double nu1_lower(double mu);

/// sqrt(m^2 + (nu1(m a)/a)^2), the lowest positive eigenvalue on (-a/2, a/2).
double lambda1_1d(double a, double m);

}  // namespace rectdirac::dirac1d
