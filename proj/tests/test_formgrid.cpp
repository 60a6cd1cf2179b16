#include <doctest.h>

#include <cmath>

#include "rectdirac/eigsolve.hpp"
#include "rectdirac/errors.hpp"
#include "rectdirac/formgrid.hpp"

using namespace rectdirac;

namespace {

// Direct quadrature of ||H psi||^2 with
//   H = -i (sigma_1 d1 / a + sigma_2 d2 / b) + m sigma_3
// on the reference square, 2x2 Gauss points per cell (exact for products of
// bilinear functions and their derivatives).
double direct_energy(int n, const ComplexVector& u1, const ComplexVector& u2, double a, double b, double m) {
  const double h = 1.0 / n;
  const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  auto at = [n](const ComplexVector& u, int i, int j) { return u[i + (n + 1) * j]; };
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (double s : g) {
        for (double t : g) {
          auto value = [&](const ComplexVector& u) {
            return (1 - s) * (1 - t) * at(u, i, j) + s * (1 - t) * at(u, i + 1, j) + (1 - s) * t * at(u, i, j + 1) +
                   s * t * at(u, i + 1, j + 1);
          };
          auto dx = [&](const ComplexVector& u) {
            return ((1 - t) * (at(u, i + 1, j) - at(u, i, j)) + t * (at(u, i + 1, j + 1) - at(u, i, j + 1))) / h;
          };
          auto dy = [&](const ComplexVector& u) {
            return ((1 - s) * (at(u, i, j + 1) - at(u, i, j)) + s * (at(u, i + 1, j + 1) - at(u, i + 1, j))) / h;
          };
          const Complex I{0.0, 1.0};
          const Complex h1 = m * value(u1) - I * dx(u2) / a - dy(u2) / b;
          const Complex h2 = -I * dx(u1) / a + dy(u1) / b - m * value(u2);
          total += 0.25 * h * h * (std::norm(h1) + std::norm(h2));
        }
      }
    }
  }
  return total;
}

// Random nodal spinor with u2 = i (n1 + i n2) u1 on the edges and zero corners,
// built without the library's constraint bookkeeping.
NodalSpinor random_admissible(int n, std::uint64_t seed) {
  const int npa = n + 1;
  const ComplexVector r1 = seeded_random_vector(npa * npa, seed);
  const ComplexVector r2 = seeded_random_vector(npa * npa, seed + 1000);
  NodalSpinor u{r1, r2};
  const Complex I{0.0, 1.0};
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int p = i + npa * j;
      double n1 = 0, n2 = 0;
      if (i == 0) n1 = -1;
      if (i == n) n1 = 1;
      if (j == 0) n2 = -1;
      if (j == n) n2 = 1;
      if (n1 != 0 && n2 != 0) {
        u.u1[p] = u.u2[p] = 0.0;
      } else if (n1 != 0 || n2 != 0) {
        u.u2[p] = I * Complex(n1, n2) * u.u1[p];
      }
    }
  }
  return u;
}

double max_abs(const SparseMatrix& a) {
  double v = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      v = std::max(v, std::abs(it.value()));
    }
  }
  return v;
}

}  // namespace

TEST_SUITE("formgrid") {

TEST_CASE("grid sizes and errors") {
  const Grid g4(4);
  CHECK(g4.node_count() == 25);
  CHECK(g4.h() == 0.25);
  CHECK(g4.reduced_dimension() == 30);
  CHECK(Grid(64).reduced_dimension() == 8190);
  CHECK(reduced_dimension_for(64) == 8190);
  CHECK(g4.coordinate(0) == -0.5);
  CHECK(g4.coordinate(2) == 0.0);
  CHECK(g4.coordinate(4) == 0.5);
  CHECK_THROWS_AS(Grid(5), DomainError);
  CHECK_THROWS_AS(Grid(2), DomainError);
  CHECK_THROWS_AS(Grid(-4), DomainError);
}

TEST_CASE("constraint factors and node classes") {
  CHECK(boundary_factor(NodeClass::edge_top) == Complex(-1, 0));
  CHECK(boundary_factor(NodeClass::edge_bottom) == Complex(1, 0));
  CHECK(boundary_factor(NodeClass::edge_right) == Complex(0, 1));
  CHECK(boundary_factor(NodeClass::edge_left) == Complex(0, -1));
  const Grid g(6);
  CHECK(g.node_class(g.node(0, 0)) == NodeClass::corner);
  CHECK(g.node_class(g.node(6, 6)) == NodeClass::corner);
  CHECK(g.node_class(g.node(3, 6)) == NodeClass::edge_top);
  CHECK(g.node_class(g.node(0, 3)) == NodeClass::edge_left);
  CHECK(g.first_dof(g.node(0, 0)) == -1);
  CHECK(g.dof_count(g.node(3, 3)) == 2);
  CHECK(g.dof_count(g.node(6, 3)) == 1);
}

TEST_CASE("reconstruction satisfies the boundary constraint exactly") {
  const Grid g(8);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SpinorField psi{8, seeded_random_vector(g.reduced_dimension(), seed)};
    const NodalSpinor u = reconstruct(g, psi);
    CHECK(constraint_defect(g, u) == 0.0);
    const SpinorField back = reduce(g, u);
    CHECK(back.coeffs == psi.coeffs);
  }
  CHECK_THROWS_AS(reconstruct(g, SpinorField{6, ComplexVector::Zero(Grid(6).reduced_dimension())}), DomainError);
}

TEST_CASE("form equals the directly integrated ||H psi||^2") {
  const int n = 8;
  const Grid g(n);
  const FormMatrices fm = assemble(g);
  for (auto [a, b, m] : {std::tuple{1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}, {2.0, 0.5, 3.0}, {0.7, 1.9, 0.4}}) {
    for (std::uint64_t seed : {11u, 12u}) {
      const NodalSpinor u = random_admissible(n, seed);
      const SpinorField psi = reduce(g, u);
      REQUIRE(constraint_defect(g, reconstruct(g, psi)) < 1e-15);
      const double form = psi.coeffs.dot(form_matrix(fm, a, b, m) * psi.coeffs).real();
      const double direct = direct_energy(n, u.u1, u.u2, a, b, m);
      CAPTURE(a);
      CAPTURE(m);
      CHECK(form == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("a wrong boundary sign breaks the identity") {
  // Negative control: flip the constraint on the top edge.
  const int n = 8;
  const Grid g(n);
  const FormMatrices fm = assemble(g);
  NodalSpinor u = random_admissible(n, 5);
  for (int i = 1; i < n; ++i) {
    u.u2[i + (n + 1) * n] *= -1.0;
  }
  const double direct = direct_energy(n, u.u1, u.u2, 1.0, 1.0, 1.0);
  const double form = reduce(g, u).coeffs.dot(form_matrix(fm, 1.0, 1.0, 1.0) * reduce(g, u).coeffs).real();
  CHECK(std::abs(form - direct) > 1e-3 * direct);
}

TEST_CASE("matrices are Hermitian, PSD and M is positive definite") {
  const Grid g(16);
  const FormMatrices fm = assemble(g);
  for (const SparseMatrix* a : {&fm.k1, &fm.k2, &fm.mass, &fm.trace_par, &fm.trace_eq}) {
    const SparseMatrix d = *a - SparseMatrix(a->adjoint());
    CHECK(max_abs(d) <= 1e-14 * max_abs(*a));
  }
  const SparseMatrix q = form_matrix(fm, 1.3, 0.8, 2.0);
  CHECK(max_abs(q - SparseMatrix(q.adjoint())) <= 1e-14 * max_abs(q));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexVector x = seeded_random_vector(g.reduced_dimension(), 100 + seed);
    CHECK(x.dot(fm.k1 * x).real() >= 0.0);
    CHECK(x.dot(fm.k2 * x).real() >= 0.0);
    CHECK(x.dot(fm.trace_par * x).real() >= 0.0);
    CHECK(x.dot(fm.mass * x).real() > 0.0);
  }
}

TEST_CASE("trace matrices live on boundary unknowns only") {
  const Grid g(8);
  const FormMatrices fm = assemble(g);
  std::vector<char> boundary(g.reduced_dimension(), 0);
  for (int p = 0; p < g.node_count(); ++p) {
    const NodeClass c = g.node_class(p);
    if (c != NodeClass::interior && c != NodeClass::corner) {
      boundary[g.first_dof(p)] = 1;
    }
  }
  for (const SparseMatrix* t : {&fm.trace_par, &fm.trace_eq}) {
    for (int k = 0; k < t->outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(*t, k); it; ++it) {
        CHECK(boundary[it.row()]);
        CHECK(boundary[it.col()]);
      }
    }
  }
}

TEST_CASE("scalar mass rows sum to the nodal patch areas at n = 4") {
  const Grid g(4);
  const ScalarMatrices s = assemble_scalar(g);
  const double h2 = 1.0 / 16.0;
  double total = 0.0;
  for (int j = 0; j <= 4; ++j) {
    for (int i = 0; i <= 4; ++i) {
      double row = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(s.mass, g.node(i, j)); it; ++it) {
        row += it.value();
      }
      const int edges = (i == 0 || i == 4) + (j == 0 || j == 4);
      const double expect = h2 / (edges == 0 ? 1.0 : edges == 1 ? 2.0 : 4.0);
      CHECK(row == doctest::Approx(expect).epsilon(1e-14));
      total += row;
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero mass has no trace contribution") {
  const Grid g(8);
  const FormMatrices fm = assemble(g);
  const SparseMatrix q = form_matrix(fm, 1.5, 0.5, 0.0);
  const SparseMatrix expect = (1.0 / 2.25) * fm.k1 + 4.0 * fm.k2;
  CHECK(max_abs(q - expect) <= 1e-15 * max_abs(expect));
  CHECK(max_abs(form_matrix(fm, 1.0, 1.0, 0.0) - SparseMatrix(fm.k1 + fm.k2)) == 0.0);
  CHECK_THROWS_AS(form_matrix(fm, 0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(form_matrix(fm, 1.0, -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(form_matrix(fm, 1.0, 1.0, -0.1), DomainError);
}

TEST_CASE("the populated constant field is not in the kernel of the traces") {
  const Grid g(8);
  const FormMatrices fm = assemble(g);
  NodalSpinor u{ComplexVector::Ones(g.node_count()), ComplexVector::Ones(g.node_count())};
  for (int p = 0; p < g.node_count(); ++p) {
    const NodeClass c = g.node_class(p);
    if (c == NodeClass::corner) {
      u.u1[p] = u.u2[p] = 0.0;
    } else if (c != NodeClass::interior) {
      u.u2[p] = boundary_factor(c) * u.u1[p];
    }
  }
  const SpinorField psi = reduce(g, u);
  CHECK(psi.coeffs.dot((fm.trace_par + fm.trace_eq) * psi.coeffs).real() > 0.5);
}

TEST_CASE("quotient: homogeneity, zero field, lower bound") {
  const Grid g(8);
  const FormMatrices fm = assemble(g);
  const SpinorField psi{8, seeded_random_vector(g.reduced_dimension(), 9)};
  SpinorField scaled = psi;
  scaled.coeffs *= Complex(-2.5, 1.0);
  CHECK(quotient(fm, 1.2, 0.9, 1.0, scaled) == doctest::Approx(quotient(fm, 1.2, 0.9, 1.0, psi)).epsilon(1e-13));
  CHECK(quotient(fm, 1.0, 1.0, 0.0, psi) >= kPi * kPi / 2);
  CHECK(quotient(fm, 1.0, 1.0, 3.0, psi) > 9.0);
  const SpinorField zero{8, ComplexVector::Zero(g.reduced_dimension())};
  CHECK_THROWS_AS(quotient(fm, 1.0, 1.0, 0.0, zero), DomainError);
}

TEST_CASE("Dirichlet trial field") {
  double prev = 1e300;
  for (int n : {16, 32, 64}) {
    const Grid g(n);
    const FormMatrices fm = assemble(g);
    const SpinorField t = trial_dirichlet(g);
    const NodalSpinor u = reconstruct(g, t);
    CHECK(u.u1[g.node(n / 2, n / 2)] == Complex(1.0, 0.0));
    CHECK(u.u2.norm() == 0.0);
    for (int p = 0; p < g.node_count(); ++p) {
      if (g.node_class(p) != NodeClass::interior) {
        CHECK(u.u1[p] == Complex(0.0, 0.0));
      }
    }
    const double q0 = quotient(fm, 1.0, 1.0, 0.0, t);
    CHECK(quotient(fm, 1.0, 1.0, 5.0, t) - 25.0 == doctest::Approx(q0).epsilon(1e-12));
    CHECK(q0 > 2 * kPi * kPi);
    CHECK(q0 < prev);
    prev = q0;
  }
  CHECK(prev == doctest::Approx(2 * kPi * kPi).epsilon(1e-3));
}

TEST_CASE("dyadic prolongation is exact") {
  const Grid g(8);
  const FormMatrices coarse = assemble(g);
  const FormMatrices fine = assemble(Grid(16));
  const SpinorField psi{8, seeded_random_vector(g.reduced_dimension(), 21)};
  const SpinorField up = prolongate(g, psi);
  CHECK(constraint_defect(fine.grid, reconstruct(fine.grid, up)) < 1e-15);
  for (auto [a, b, m] : {std::tuple{1.0, 1.0, 0.0}, {0.6, 1.7, 2.0}}) {
    CHECK(quotient(fine, a, b, m, up) == doctest::Approx(quotient(coarse, a, b, m, psi)).epsilon(1e-12));
  }
}

TEST_CASE("one-dimensional matrices") {
  const FormMatrices1D f = assemble_1d(8);
  CHECK(f.mass.rows() == 2 * 7 + 2);
  CHECK_THROWS_AS(assemble_1d(3), DomainError);
  const SparseMatrix q = form_matrix_1d(f, 1.0, 0.0);
  CHECK(max_abs(q - SparseMatrix(f.stiffness)) == 0.0);
}

}
