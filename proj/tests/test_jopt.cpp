#include <doctest.h>

#include <cmath>

#include "rectdirac/eigsolve.hpp"
#include "rectdirac/errors.hpp"
#include "rectdirac/formgrid.hpp"
#include "rectdirac/jopt.hpp"
#include "rectdirac/symmetry.hpp"

using namespace rectdirac;
using namespace rectdirac::jopt;

namespace {

const FormMatrices& fm() {
  static const FormMatrices f = assemble(Grid(16));
  return f;
}

double square_mu(double m) { return lambda1_2d(fm(), Geometry{1.0, 1.0, m}).mu - m * m; }

}  // namespace

TEST_SUITE("jopt") {

TEST_CASE("J from energies") {
  FormEnergies e;
  e.k1 = 4.0;
  e.k2 = 9.0;
  e.mass = 2.0;
  e.trace_par = 1.0;
  e.trace_eq = 16.0;
  // (2 * 2 * 3 + 2 * 5 * 1 * 4) / 2
  CHECK(j_value(e, 5.0) == doctest::Approx(26.0));
  CHECK(j_value(e, 0.0) == doctest::Approx(6.0));
  e.mass = 0.0;
  CHECK_THROWS_AS(j_value(e, 1.0), DomainError);
}

TEST_CASE("ratios and their guards") {
  FormEnergies e;
  e.k1 = 16.0;
  e.k2 = 1.0;
  e.mass = 1.0;
  e.trace_par = 4.0;
  e.trace_eq = 1.0;
  const Ratios r = ratios(e, 1.0);
  CHECK(r.A == doctest::Approx(2.0));
  CHECK(r.B == doctest::Approx(2.0));
  e.trace_eq = 0.0;
  CHECK_THROWS_AS(ratios(e, 1.0), DegenerateRatioError);
  CHECK(ratios(e, 0.0).B == 1.0);
  e.trace_par = 0.0;
  CHECK_THROWS_AS(ratios(e, 1.0), DegenerateRatioError);
  CHECK(ratios(e, 1.0, true).B == 1.0);
  e.k2 = 0.0;
  CHECK_THROWS_AS(ratios(e, 0.0), DegenerateRatioError);
}

TEST_CASE("J never exceeds the square quotient and equals it on balanced fields") {
  // AM-GM: J <= q(1, 1, m) - m^2 with equality when the norms pair up
  for (double m : {0.0, 1.0, 10.0}) {
    const SpinorField psi{16, seeded_random_vector(fm().grid.reduced_dimension(), 21)};
    CHECK(j_value(fm(), m, psi) <= quotient(fm(), 1.0, 1.0, m, psi) - m * m + 1e-9);
  }
  const auto cluster = lowest_cluster(lambda1_2d(fm(), Geometry{1.0, 1.0, 1.0}).pairs);
  const auto c = classify_symmetry(fm(), cluster, true);
  const SpinorField& phi = c.states[0].representative;
  CHECK(j_value(fm(), 1.0, phi) == doctest::Approx(square_mu(1.0)).epsilon(1e-6));
}

TEST_CASE("Euler form at A = B = 1 is the square form minus m^2") {
  const SparseMatrix e = euler_form(fm(), 1.0, 1.0, 2.0);
  const SparseMatrix q = form_matrix(fm(), 1.0, 1.0, 2.0);
  CHECK(SparseMatrix(e + 4.0 * fm().mass - q).norm() <= 1e-12 * q.norm());
  const EulerResult r = euler_solve(fm(), 1.0, 1.0, 2.0);
  CHECK(r.mu == doctest::Approx(square_mu(2.0)).epsilon(1e-10));
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("Euler solve in a sector") {
  EulerOptions o;
  o.sector = Complex(1, 0);
  const EulerResult r = euler_solve(fm(), 1.0, 1.0, 1.0, o);
  CHECK(r.mu == doctest::Approx(square_mu(1.0)).epsilon(1e-8));
  const Rotation rot(fm().grid);
  CHECK((rot.apply(r.psi.coeffs) - r.psi.coeffs).norm() <= 1e-8 * r.psi.coeffs.norm());
  o.sector = Complex(-1, 0);
  CHECK(euler_solve(fm(), 1.0, 1.0, 1.0, o).mu > r.mu * (1 + 1e-3));
}

TEST_CASE("fixed point from the trial field at m = 0") {
  const MinimizerState s = fixed_point_minimize(fm(), 0.0, trial_dirichlet(fm().grid));
  CHECK(s.converged);
  CHECK(is_monotone(s));
  CHECK(s.A == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.mu == doctest::Approx(square_mu(0.0)).epsilon(1e-8));
  REQUIRE(s.history.size() == static_cast<std::size_t>(s.iteration) + 1);
  CHECK(s.history.back().mu == s.mu);
}

TEST_CASE("fixed point at m = 0 from a skewed start lands on the rectangle chain") {
  // the final (A, mu) must satisfy mu = mu_discrete(A, 1/A, 0)
  const SpinorField init = euler_solve(fm(), 1.4, 1.0, 0.0).psi;
  const MinimizerState s = fixed_point_minimize(fm(), 0.0, init);
  CHECK(s.converged);
  CHECK(is_monotone(s));
  const double rect = lambda1_2d(fm(), Geometry{s.A, 1 / s.A, 0.0}).mu;
  CHECK(std::abs(s.mu - rect) <= 1e-6 * s.mu);
}

TEST_CASE("damping and iteration limits") {
  FixedPointOptions o;
  o.damping = 0.5;
  o.maxit = 2;
  const MinimizerState s = fixed_point_minimize(fm(), 1.0, trial_dirichlet(fm().grid), o);
  CHECK(s.iteration <= 2);
  CHECK(is_monotone(s));
  o.damping = 0.0;
  CHECK_THROWS_AS(fixed_point_minimize(fm(), 1.0, trial_dirichlet(fm().grid), o), DomainError);
  o.damping = 1.0;
  CHECK_THROWS_AS(fixed_point_minimize(fm(), -1.0, trial_dirichlet(fm().grid), o), DomainError);
}

TEST_CASE("monotonicity helper") {
  MinimizerState s;
  s.history = {{3.0, 1, 1, 0}, {2.0, 1, 1, 0}, {2.0, 1, 1, 0}};
  CHECK(is_monotone(s));
  s.history.push_back({2.1, 1, 1, 0});
  CHECK_FALSE(is_monotone(s));
}

TEST_CASE("restart battery at m = 0") {
  const ConjectureEvidence ev = probe_conjecture_symmetry(fm(), 0.0, 3, 5);
  REQUIRE(ev.restarts.size() == 3);
  CHECK(ev.restarts[0].kind == StartKind::trial);
  CHECK(ev.restarts[1].kind == StartKind::symmetric);
  CHECK(ev.restarts[2].kind == StartKind::random);
  CHECK(ev.all_monotone);
  CHECK(ev.best_mu <= square_mu(0.0) + 1e-8);
  CHECK(ev.best_index >= 0);
  CHECK_THROWS_AS(probe_conjecture_symmetry(fm(), 0.0, 2, 5), DomainError);
}

TEST_CASE("restart battery is independent of the thread count") {
  FixedPointOptions o;
  o.maxit = 5;
  const ConjectureEvidence a = probe_conjecture_symmetry(fm(), 1.0, 3, 9, o, 1);
  const ConjectureEvidence b = probe_conjecture_symmetry(fm(), 1.0, 3, 9, o, 3);
  REQUIRE(a.restarts.size() == b.restarts.size());
  for (std::size_t i = 0; i < a.restarts.size(); ++i) {
    CHECK(a.restarts[i].state.mu == b.restarts[i].state.mu);
    CHECK(a.restarts[i].state.history.size() == b.restarts[i].state.history.size());
  }
  CHECK(a.best_mu == b.best_mu);
}

TEST_CASE("comparison chain at m = 1") {
  const ChainReport c = verify_theorem_idea_chain(fm(), 1.0, {0.5, 1.0, 1.5}, square_mu(1.0) - 1e-3);
  CHECK(c.area_ok);
  CHECK(c.perimeter_ok);
  REQUIRE(c.sector_minima.size() == 4);
  CHECK(c.symmetric_gap <= 1e-8);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[1].mu_area == doctest::Approx(c.square_mu));
}

}
