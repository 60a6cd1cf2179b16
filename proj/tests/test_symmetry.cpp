#include <doctest.h>

#include <cmath>

#include "rectdirac/eigsolve.hpp"
#include "rectdirac/errors.hpp"
#include "rectdirac/formgrid.hpp"
#include "rectdirac/symmetry.hpp"

using namespace rectdirac;

namespace {

const FormMatrices& fm() {
  static const FormMatrices f = assemble(Grid(16));
  return f;
}

double m_norm(const ComplexVector& x) { return std::sqrt(x.dot(fm().mass * x).real()); }

std::vector<EigenPair> pairs(const Geometry& g, int k) {
  SolverOptions o;
  o.k = k;
  return lambda1_2d(fm(), g, o).pairs;
}

}  // namespace

TEST_SUITE("symmetry") {

TEST_CASE("R^4 is the identity and R is an M-isometry") {
  const Rotation rot(fm().grid);
  const ComplexVector x = seeded_random_vector(fm().grid.reduced_dimension(), 11);
  CHECK(rot.apply(x, 4) == x);
  CHECK(rot.apply(rot.apply(x, 3), 1) == x);
  CHECK(rot.apply(x, -1) == rot.apply(x, 3));
  const ComplexVector y = rot.apply(x);
  CHECK(std::abs(m_norm(y) - m_norm(x)) <= 1e-14 * m_norm(x));
}

TEST_CASE("reduced map matches the nodal rotation") {
  const Grid& grid = fm().grid;
  const Rotation rot(grid);
  const SpinorField psi{grid.n(), seeded_random_vector(grid.reduced_dimension(), 5)};
  const NodalSpinor direct = reconstruct(grid, rot.apply(psi));
  const NodalSpinor via = rot.apply_nodal(reconstruct(grid, psi));
  CHECK((direct.u1 - via.u1).norm() == 0.0);
  CHECK((direct.u2 - via.u2).norm() == 0.0);
  CHECK(constraint_defect(grid, via) <= 1e-15);
}

TEST_CASE("rotation of a hand-placed nodal field") {
  // (R u)(x1, x2) = (i u1(-x2, x1), u2(-x2, x1)) at node (i, j) reads node (n - j, i)
  const Grid grid(4);
  const Rotation rot(grid);
  NodalSpinor u{ComplexVector::Zero(grid.node_count()), ComplexVector::Zero(grid.node_count())};
  u.u1[grid.node(1, 2)] = 2.0;
  u.u2[grid.node(1, 2)] = 3.0;
  const NodalSpinor r = rot.apply_nodal(u);
  // (n - j, i) = (1, 2) gives (i, j) = (2, 3)
  CHECK(r.u1[grid.node(2, 3)] == Complex(0.0, 2.0));
  CHECK(r.u2[grid.node(2, 3)] == Complex(3.0, 0.0));
  CHECK(r.u1.cwiseAbs().sum() == doctest::Approx(2.0));
}

TEST_CASE("square form is invariant, rectangle form maps to its swap") {
  CHECK(commutation_check(fm(), 1.0, 0.0) <= 1e-12);
  CHECK(commutation_check(fm(), 1.0, 3.0) <= 1e-12);
  CHECK(commutation_check(fm(), 1.5, 0.6, 2.0, 1) <= 1e-12);
  CHECK(commutation_check(fm(), 1.5, 0.6, 2.0, 2) <= 1e-12);
  CHECK(commutation_check(fm(), 1.5, 0.6, 2.0, 1, 4, 7, 2) == commutation_check(fm(), 1.5, 0.6, 2.0, 1, 4, 7, 1));
}

TEST_CASE("symmetrise projects onto the sector") {
  const Rotation rot(fm().grid);
  const ComplexVector x = seeded_random_vector(fm().grid.reduced_dimension(), 9);
  ComplexVector sum = ComplexVector::Zero(x.size());
  for (Complex alpha : rotation_labels()) {
    const ComplexVector p = symmetrise(rot, x, alpha);
    CHECK((rot.apply(p) - alpha * p).norm() <= 1e-13 * x.norm());
    sum += p;
  }
  CHECK((sum - x).norm() <= 1e-13 * x.norm());
  CHECK_THROWS_AS(symmetrise(rot, x, Complex(2.0, 0.0)), DomainError);
}

TEST_CASE("labels are in the fixed order") {
  const auto l = rotation_labels();
  REQUIRE(l.size() == 4);
  CHECK(l[0] == Complex(1, 0));
  CHECK(l[1] == Complex(0, 1));
  CHECK(l[2] == Complex(-1, 0));
  CHECK(l[3] == Complex(0, -1));
}

TEST_CASE("square ground cluster is the {1, i} pair") {
  for (double m : {0.0, 1.0, 10.0}) {
    CAPTURE(m);
    const auto cluster = lowest_cluster(pairs(Geometry{1.0, 1.0, m}, 6));
    REQUIRE(cluster.size() == 2);
    const Classification c = classify_symmetry(fm(), cluster, true);
    CHECK(c.spread <= kClusterTolerance);
    CHECK(c.invariance <= 1e-6);
    REQUIRE(c.states.size() == 2);
    CHECK(c.states[0].label == Complex(1, 0));
    CHECK(c.states[1].label == Complex(0, 1));
    for (const auto& s : c.states) {
      CHECK(std::abs(std::pow(s.eigenvalue, 4) - 1.0) <= 1e-6);
      CHECK(s.residual <= 1e-6);
      const NormDeviation d = verify_norm_identities(fm(), s.representative);
      CHECK(d.d1 <= 1e-6);
      if (m > 0) {
        CHECK(d.d2 <= 1e-6);
      }
    }
  }
}

TEST_CASE("rectangle classification under R^2") {
  const auto cl = lowest_cluster(pairs(Geometry{1.5, 1 / 1.5, 1.0}, 4));
  const Classification c = classify_symmetry(fm(), cl, false);
  CHECK_FALSE(c.square);
  for (const auto& s : c.states) {
    CHECK((s.label == Complex(1, 0) || s.label == Complex(-1, 0)));
    CHECK(s.label_error <= 1e-6);
  }
}

TEST_CASE("a non-invariant span is rejected") {
  auto p = pairs(Geometry{1.0, 1.0, 1.0}, 4);
  p.resize(1);
  const ComplexVector x = seeded_random_vector(fm().grid.reduced_dimension(), 3);
  p[0].vector = x / m_norm(x);
  CHECK_THROWS_AS(classify_symmetry(fm(), p, true), SymmetryResolutionError);
  // two pairs far apart in mu
  auto q = pairs(Geometry{1.0, 1.0, 1.0}, 4);
  q.erase(q.begin() + 1);
  q.resize(2);
  CHECK_THROWS_AS(classify_symmetry(fm(), q, true), SymmetryResolutionError);
  CHECK_THROWS_AS(classify_symmetry(fm(), {}, true), DomainError);
}

TEST_CASE("norm deviation formula") {
  FormEnergies e;
  e.k1 = 4.0;
  e.k2 = 1.0;
  e.trace_par = 9.0;
  e.trace_eq = 9.0;
  const NormDeviation d = norm_deviation(e);
  CHECK(d.d1 == doctest::Approx(0.5));
  CHECK(d.d2 == 0.0);
  e.trace_par = e.trace_eq = 0.0;
  CHECK(norm_deviation(e).d2 == 0.0);
}

TEST_CASE("separability of product fields") {
  const Grid grid(16);
  const SpinorField trial = trial_dirichlet(grid);
  const Separability s = separability_residual(trial);
  REQUIRE(s.u1.has_value());
  CHECK(*s.u1 <= 1e-12);
  CHECK_FALSE(s.u2.has_value());

  const auto cluster = lowest_cluster(pairs(Geometry{1.0, 1.0, 0.0}, 4));
  const auto c = classify_symmetry(fm(), cluster, true);
  const Separability g = separability_residual(c.states[0].representative);
  REQUIRE(g.u1.has_value());
  REQUIRE(g.u2.has_value());
  CHECK(std::min(*g.u1, *g.u2) > 1e-3);
}

}
