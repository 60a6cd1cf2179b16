#include "rectdirac/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "rectdirac/dirac1d.hpp"
#include "rectdirac/eigsolve.hpp"
#include "rectdirac/errors.hpp"

namespace rectdirac::bounds {

namespace {

double squared(double x) { return x * x; }

// max{1/(1+(mu)^-1), 1/2}, with the first entry read as 0 at mu = 0.
double mass_factor(double mu) { return dirac1d::nu1_lower(mu) / kPi; }

}  // namespace

double thm_lower(double a, double b, double m) {
  validate(Geometry{a, b, m});
  return squared(kPi / a) * squared(mass_factor(m * a)) + squared(kPi / b) * squared(mass_factor(m * b));
}

double sharp_lower(double a, double b, double m) {
  validate(Geometry{a, b, m});
  return squared(dirac1d::nu1(m * a).nu / a) + squared(dirac1d::nu1(m * b).nu / b);
}

double dirichlet_lambda(double a, double b) {
  validate(Geometry{a, b, 0.0});
  return squared(kPi / a) + squared(kPi / b);
}

double thm_upper(double a, double b, double m) {
  validate(Geometry{a, b, m});
  return dirichlet_lambda(a, b);
}

std::optional<Constraint> parse_constraint(const std::string& s) {
  if (s == "area") {
    return Constraint::area;
  }
  if (s == "perimeter") {
    return Constraint::perimeter;
  }
  return std::nullopt;
}

const char* to_string(Constraint c) { return c == Constraint::area ? "area" : "perimeter"; }

std::vector<Condition> corollary_conditions(double a, double m, Constraint constraint) {
  validate(Geometry{a, 1.0, m});
  std::vector<Condition> out;
  if (constraint == Constraint::area) {
    const double ecc = std::abs(a * a - 4.0);
    out.push_back({"cond_a", ecc > std::sqrt(15.0), ecc - std::sqrt(15.0)});

    const double heavy = m * (1.0 / (a * a) + a * a - 2.0);
    out.push_back({"cond_b", heavy >= 56.0, heavy - 56.0});

    const double initial = m * (1.0 / (a * a) + a * a - 2.0) / (1.0 / (a * a * a) + a * a * a);
    out.push_back({"cond_initial_area", initial > 2.0, initial - 2.0});
    return out;
  }

  if (!(a > 0.0 && a < 2.0)) {
    throw DomainError("perimeter conditions need a in (0, 2)");
  }
  const double c = 2.0 - a;
  const double ecc = squared(a - 1.0);
  const double threshold = (9.0 - std::sqrt(33.0)) / 8.0;
  out.push_back({"cond_a_prime", ecc > threshold, ecc - threshold});

  const double heavy = m * (1.0 / (a * a) + 1.0 / (c * c) - 2.0);
  out.push_back({"cond_b_prime", heavy >= 56.0, heavy - 56.0});

  const double initial = m * (1.0 / (a * a) + 1.0 / (c * c) - 2.0) / (1.0 / (a * a * a) + 1.0 / (c * c * c));
  out.push_back({"cond_initial_perimeter", initial > 2.0, initial - 2.0});
  return out;
}

BoundsReport report(const Geometry& g) {
  validate(g);
  BoundsReport r;
  r.geometry = g;
  r.thm_lower = thm_lower(g.a, g.b, g.m);
  r.sharp_lower = sharp_lower(g.a, g.b, g.m);
  r.thm_upper = thm_upper(g.a, g.b, g.m);
  r.dirichlet = dirichlet_lambda(g.a, g.b);
  r.conditions = corollary_conditions(g.a, g.m, Constraint::area);
  if (g.a < 2.0) {
    const auto per = corollary_conditions(g.a, g.m, Constraint::perimeter);
    r.conditions.insert(r.conditions.end(), per.begin(), per.end());
  }
  return r;
}

Bracket bracket_from(const Geometry& g, double mu_discrete) {
  validate(g);
  const double m2 = g.m * g.m;
  Bracket b;
  b.mu_discrete = mu_discrete;
  b.lower = m2 + std::max(thm_lower(g.a, g.b, g.m), sharp_lower(g.a, g.b, g.m));
  b.upper = std::min(mu_discrete, m2 + thm_upper(g.a, g.b, g.m));
  if (!(b.lower <= b.upper)) {
    throw ConsistencyError("empty bracket for lambda_1^2: analytic lower bound exceeds the upper bound");
  }
  return b;
}

void check_sandwich(const Geometry& g, double mu, double trial_quotient) {
  const double lo = thm_lower(g.a, g.b, g.m);
  const double sharp = sharp_lower(g.a, g.b, g.m);
  const double shifted = mu - g.m * g.m;
  // Rounding room only: thm_lower and sharp_lower coincide at m = 0.
  const double eps = 1e-12 * std::max(1.0, sharp);
  if (!(lo <= sharp + eps)) {
    throw ConsistencyError("sandwich: thm_lower exceeds sharp_lower");
  }
  if (!(sharp <= shifted)) {
    throw ConsistencyError("sandwich: analytic lower bound exceeds the discrete value mu - m^2");
  }
  if (!(mu <= trial_quotient * (1.0 + 1e-12))) {
    throw ConsistencyError("sandwich: discrete value exceeds the trial-field quotient");
  }
}

Bracket bracket(const Geometry& g, int n) {
  const EigenResult r = lambda1_2d(g.a, g.b, g.m, n);
  return bracket_from(g, r.mu);
}

}  // namespace rectdirac::bounds
