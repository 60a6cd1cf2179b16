#pragma once

// Closed-form two-sided bounds for lambda_1(a,b)^2 - m^2 and the explicit
// parameter regions where the square is provably optimal.

#include <optional>
#include <string>
#include <vector>

#include "rectdirac/types.hpp"

namespace rectdirac::bounds {

/// (pi/a)^2 max{1/(1+(ma)^-1), 1/2}^2 + (pi/b)^2 max{1/(1+(mb)^-1), 1/2}^2
double thm_lower(double a, double b, double m);

/// (nu1(ma)/a)^2 + (nu1(mb)/b)^2 >= thm_lower
double sharp_lower(double a, double b, double m);

/// (pi/a)^2 + (pi/b)^2, the Dirichlet Laplacian ground state.
double thm_upper(double a, double b, double m);
double dirichlet_lambda(double a, double b);

enum class Constraint { area, perimeter };

std::optional<Constraint> parse_constraint(const std::string& s);
const char* to_string(Constraint c);

struct Condition {
  std::string name;
  bool holds = false;
  double margin = 0.0;  ///< left side minus threshold
};

/// Area family (a, 1/a): cond_a, cond_b, cond_initial_area.
/// Perimeter family (a, 2-a): cond_a_prime, cond_b_prime,
/// cond_initial_perimeter; requires a in (0, 2).
std::vector<Condition> corollary_conditions(double a, double m, Constraint constraint);

struct BoundsReport {
  Geometry geometry;
  double thm_lower = 0.0;
  double sharp_lower = 0.0;
  double thm_upper = 0.0;
  double dirichlet = 0.0;
  std::vector<Condition> conditions;  ///< area set, then perimeter set if a in (0, 2)
};

BoundsReport report(const Geometry& g);

struct Bracket {
  double lower = 0.0;   ///< m^2 + max(thm_lower, sharp_lower)
  double upper = 0.0;   ///< min(mu_discrete, m^2 + thm_upper)
  double mu_discrete = 0.0;
};

/// Bracket for lambda_1^2 from an already computed conforming value. Throws
/// ConsistencyError if the interval is empty.
Bracket bracket_from(const Geometry& g, double mu_discrete);

/// thm_lower <= sharp_lower <= mu - m^2 and mu <= trial_quotient, where
/// trial_quotient is the Dirichlet trial field's quotient on the same grid.
/// Throws ConsistencyError naming the first violated relation.
void check_sandwich(const Geometry& g, double mu, double trial_quotient);

/// Solves at grid size n and brackets.
Bracket bracket(const Geometry& g, int n);

}  // namespace rectdirac::bounds
