#include "rectdirac/formgrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rectdirac/errors.hpp"

namespace rectdirac {

void validate(const Geometry& g) {
  if (!std::isfinite(g.a) || g.a <= 0.0 || !std::isfinite(g.b) || g.b <= 0.0) {
    throw DomainError("side lengths must be positive and finite");
  }
  if (!std::isfinite(g.m) || g.m < 0.0) {
    throw DomainError("mass must be finite and >= 0");
  }
}

Complex boundary_factor(NodeClass c) {
  switch (c) {
    case NodeClass::edge_top:
      return {-1.0, 0.0};
    case NodeClass::edge_bottom:
      return {1.0, 0.0};
    case NodeClass::edge_right:
      return {0.0, 1.0};
    case NodeClass::edge_left:
      return {0.0, -1.0};
    default:
      return {0.0, 0.0};
  }
}

Grid::Grid(int n) : n_(n) {
  if (n < 4 || n % 2 != 0) {
    throw DomainError("grid size must be even and >= 4, got " + std::to_string(n));
  }
  const int npa = n + 1;
  classes_.resize(static_cast<std::size_t>(npa) * npa);
  first_dof_.resize(classes_.size());
  int next = 0;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const bool left = i == 0, right = i == n, bottom = j == 0, top = j == n;
      NodeClass c = NodeClass::interior;
      if ((left || right) && (bottom || top)) {
        c = NodeClass::corner;
      } else if (top) {
        c = NodeClass::edge_top;
      } else if (bottom) {
        c = NodeClass::edge_bottom;
      } else if (left) {
        c = NodeClass::edge_left;
      } else if (right) {
        c = NodeClass::edge_right;
      }
      const int p = node(i, j);
      classes_[p] = c;
      if (c == NodeClass::corner) {
        first_dof_[p] = -1;
      } else {
        first_dof_[p] = next;
        next += c == NodeClass::interior ? 2 : 1;
      }
    }
  }
  reduced_dim_ = next;
}

int Grid::dof_count(int p) const noexcept {
  switch (classes_[p]) {
    case NodeClass::corner:
      return 0;
    case NodeClass::interior:
      return 2;
    default:
      return 1;
  }
}

namespace {

using RealSparse = Eigen::SparseMatrix<double>;
using RealTriplet = Eigen::Triplet<double>;
using ComplexTriplet = Eigen::Triplet<Complex>;

// Global P1 matrices on (-1/2, 1/2) with n uniform cells.
RealSparse mass_1d(int n) {
  const double h = 1.0 / n;
  std::vector<RealTriplet> t;
  for (int e = 0; e < n; ++e) {
    t.emplace_back(e, e, h / 3.0);
    t.emplace_back(e + 1, e + 1, h / 3.0);
    t.emplace_back(e, e + 1, h / 6.0);
    t.emplace_back(e + 1, e, h / 6.0);
  }
  RealSparse m(n + 1, n + 1);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse stiffness_1d(int n) {
  const double inv_h = static_cast<double>(n);
  std::vector<RealTriplet> t;
  for (int e = 0; e < n; ++e) {
    t.emplace_back(e, e, inv_h);
    t.emplace_back(e + 1, e + 1, inv_h);
    t.emplace_back(e, e + 1, -inv_h);
    t.emplace_back(e + 1, e, -inv_h);
  }
  RealSparse k(n + 1, n + 1);
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

RealSparse endpoints_1d(int n) {
  RealSparse e(n + 1, n + 1);
  e.insert(0, 0) = 1.0;
  e.insert(n, n) = 1.0;
  e.makeCompressed();
  return e;
}

// (Ax (x) Ay)(p, q) = Ax(i_p, i_q) Ay(j_p, j_q) with p = i + (n+1) j.
RealSparse kron2(const RealSparse& ax, const RealSparse& ay) {
  const int npa = static_cast<int>(ax.rows());
  std::vector<RealTriplet> t;
  t.reserve(static_cast<std::size_t>(ax.nonZeros()) * ay.nonZeros());
  for (int cy = 0; cy < ay.outerSize(); ++cy) {
    for (RealSparse::InnerIterator ity(ay, cy); ity; ++ity) {
      for (int cx = 0; cx < ax.outerSize(); ++cx) {
        for (RealSparse::InnerIterator itx(ax, cx); itx; ++itx) {
          t.emplace_back(static_cast<int>(itx.row() + npa * ity.row()),
                         static_cast<int>(itx.col() + npa * ity.col()), itx.value() * ity.value());
        }
      }
    }
  }
  RealSparse out(npa * npa, npa * npa);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// Reduced unknown and coefficient representing component c at a node.
struct DofRef {
  int index = -1;
  Complex coeff{0.0, 0.0};
};

template <typename ClassOf, typename FirstOf>
DofRef dof_ref(int p, int c, ClassOf class_of, FirstOf first_of) {
  const NodeClass nc = class_of(p);
  if (nc == NodeClass::corner) {
    return {};
  }
  const int first = first_of(p);
  if (nc == NodeClass::interior) {
    return {first + c, {1.0, 0.0}};
  }
  return {first, c == 0 ? Complex{1.0, 0.0} : boundary_factor(nc)};
}

// P^H blockdiag(S, S) P for the constraint map P.
template <typename ClassOf, typename FirstOf>
SparseMatrix reduce_scalar(const RealSparse& s, int dim, ClassOf class_of, FirstOf first_of) {
  std::vector<ComplexTriplet> t;
  t.reserve(2 * static_cast<std::size_t>(s.nonZeros()));
  for (int col = 0; col < s.outerSize(); ++col) {
    for (RealSparse::InnerIterator it(s, col); it; ++it) {
      const int p = static_cast<int>(it.row());
      const int q = static_cast<int>(it.col());
      for (int c = 0; c < 2; ++c) {
        const DofRef rp = dof_ref(p, c, class_of, first_of);
        const DofRef rq = dof_ref(q, c, class_of, first_of);
        if (rp.index < 0 || rq.index < 0) {
          continue;
        }
        t.emplace_back(rp.index, rq.index, std::conj(rp.coeff) * it.value() * rq.coeff);
      }
    }
  }
  SparseMatrix out(dim, dim);
  out.setFromTriplets(t.begin(), t.end());
  out.prune(Complex{0.0, 0.0});
  return out;
}

}  // namespace

ScalarMatrices assemble_scalar(const Grid& grid) {
  const int n = grid.n();
  const RealSparse m1 = mass_1d(n);
  const RealSparse k1 = stiffness_1d(n);
  const RealSparse e1 = endpoints_1d(n);
  return {kron2(k1, m1), kron2(m1, k1), kron2(m1, m1), kron2(e1, m1), kron2(m1, e1)};
}

FormMatrices assemble(const Grid& grid) {
  const ScalarMatrices s = assemble_scalar(grid);
  const int dim = grid.reduced_dimension();
  auto class_of = [&grid](int p) { return grid.node_class(p); };
  auto first_of = [&grid](int p) { return grid.first_dof(p); };
  return {grid,
          reduce_scalar(s.k1, dim, class_of, first_of),
          reduce_scalar(s.k2, dim, class_of, first_of),
          reduce_scalar(s.mass, dim, class_of, first_of),
          reduce_scalar(s.trace_par, dim, class_of, first_of),
          reduce_scalar(s.trace_eq, dim, class_of, first_of)};
}

SparseMatrix weighted_form(const FormMatrices& fm, const std::array<double, 5>& w) {
  SparseMatrix q = w[0] * fm.k1 + w[1] * fm.k2;
  if (w[2] != 0.0) {
    q += w[2] * fm.mass;
  }
  if (w[3] != 0.0) {
    q += w[3] * fm.trace_par;
  }
  if (w[4] != 0.0) {
    q += w[4] * fm.trace_eq;
  }
  q.makeCompressed();
  return q;
}

SparseMatrix form_matrix(const FormMatrices& fm, double a, double b, double m) {
  validate(Geometry{a, b, m});
  return weighted_form(fm, {1.0 / (a * a), 1.0 / (b * b), m * m, m / a, m / b});
}

SparseMatrix form_matrix(const FormMatrices& fm, const Geometry& g) { return form_matrix(fm, g.a, g.b, g.m); }

NodalSpinor reconstruct(const Grid& grid, const SpinorField& psi) {
  if (psi.n != grid.n() || psi.coeffs.size() != grid.reduced_dimension()) {
    throw DomainError("spinor field does not belong to this grid");
  }
  NodalSpinor out{ComplexVector::Zero(grid.node_count()), ComplexVector::Zero(grid.node_count())};
  for (int p = 0; p < grid.node_count(); ++p) {
    const NodeClass c = grid.node_class(p);
    if (c == NodeClass::corner) {
      continue;
    }
    const int f = grid.first_dof(p);
    out.u1[p] = psi.coeffs[f];
    out.u2[p] = c == NodeClass::interior ? psi.coeffs[f + 1] : boundary_factor(c) * psi.coeffs[f];
  }
  return out;
}

SpinorField reduce(const Grid& grid, const NodalSpinor& nodal) {
  if (nodal.u1.size() != grid.node_count() || nodal.u2.size() != grid.node_count()) {
    throw DomainError("nodal spinor size does not match the grid");
  }
  SpinorField psi{grid.n(), ComplexVector::Zero(grid.reduced_dimension())};
  for (int p = 0; p < grid.node_count(); ++p) {
    const NodeClass c = grid.node_class(p);
    if (c == NodeClass::corner) {
      continue;
    }
    const int f = grid.first_dof(p);
    psi.coeffs[f] = nodal.u1[p];
    if (c == NodeClass::interior) {
      psi.coeffs[f + 1] = nodal.u2[p];
    }
  }
  return psi;
}

double constraint_defect(const Grid& grid, const NodalSpinor& nodal) {
  double worst = 0.0;
  for (int p = 0; p < grid.node_count(); ++p) {
    const NodeClass c = grid.node_class(p);
    if (c == NodeClass::interior) {
      continue;
    }
    const double d = c == NodeClass::corner ? std::max(std::abs(nodal.u1[p]), std::abs(nodal.u2[p]))
                                            : std::abs(nodal.u2[p] - boundary_factor(c) * nodal.u1[p]);
    worst = std::max(worst, d);
  }
  return worst;
}

FormEnergies energies(const FormMatrices& fm, const SpinorField& psi) {
  if (psi.n != fm.grid.n() || psi.coeffs.size() != fm.grid.reduced_dimension()) {
    throw DomainError("spinor field does not belong to this grid");
  }
  auto form = [&psi](const SparseMatrix& a) { return psi.coeffs.dot(a * psi.coeffs).real(); };
  return {form(fm.k1), form(fm.k2), form(fm.mass), form(fm.trace_par), form(fm.trace_eq)};
}

double quotient(const FormEnergies& e, double a, double b, double m) {
  validate(Geometry{a, b, m});
  if (!(e.mass > 0.0)) {
    throw DomainError("quotient of a zero field");
  }
  const double num = e.k1 / (a * a) + e.k2 / (b * b) + m * m * e.mass + (m / a) * e.trace_par + (m / b) * e.trace_eq;
  return num / e.mass;
}

double quotient(const FormMatrices& fm, double a, double b, double m, const SpinorField& psi) {
  return quotient(energies(fm, psi), a, b, m);
}

SpinorField trial_dirichlet(const Grid& grid) {
  const int n = grid.n();
  NodalSpinor nodal{ComplexVector::Zero(grid.node_count()), ComplexVector::Zero(grid.node_count())};
  // Boundary nodes stay exactly zero; cos(+-pi/2) is not.
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      nodal.u1[grid.node(i, j)] = std::cos(kPi * grid.coordinate(i)) * std::cos(kPi * grid.coordinate(j));
    }
  }
  return reduce(grid, nodal);
}

SpinorField prolongate(const Grid& coarse, const SpinorField& psi) {
  const NodalSpinor c = reconstruct(coarse, psi);
  const Grid fine(2 * coarse.n());
  const int nc = coarse.n();
  NodalSpinor f{ComplexVector::Zero(fine.node_count()), ComplexVector::Zero(fine.node_count())};
  auto sample = [&](const ComplexVector& u, int fi, int fj) {
    const int i0 = fi / 2, j0 = fj / 2;
    const int i1 = std::min(i0 + (fi % 2), nc), j1 = std::min(j0 + (fj % 2), nc);
    return 0.25 * (u[coarse.node(i0, j0)] + u[coarse.node(i1, j0)] + u[coarse.node(i0, j1)] + u[coarse.node(i1, j1)]);
  };
  for (int fj = 0; fj <= fine.n(); ++fj) {
    for (int fi = 0; fi <= fine.n(); ++fi) {
      f.u1[fine.node(fi, fj)] = sample(c.u1, fi, fj);
      f.u2[fine.node(fi, fj)] = sample(c.u2, fi, fj);
    }
  }
  return reduce(fine, f);
}

FormMatrices1D assemble_1d(int n) {
  if (n < 4) {
    throw DomainError("1D grid size must be >= 4, got " + std::to_string(n));
  }
  // Node 0 sits at x = -1/2 (phi2 = -i phi1), node n at x = 1/2 (phi2 = i phi1).
  std::vector<int> first(n + 1);
  int next = 0;
  for (int i = 0; i <= n; ++i) {
    first[i] = next;
    next += (i == 0 || i == n) ? 1 : 2;
  }
  auto class_of = [n](int p) {
    if (p == 0) {
      return NodeClass::edge_left;
    }
    if (p == n) {
      return NodeClass::edge_right;
    }
    return NodeClass::interior;
  };
  auto first_of = [&first](int p) { return first[p]; };
  return {n, reduce_scalar(stiffness_1d(n), next, class_of, first_of),
          reduce_scalar(mass_1d(n), next, class_of, first_of),
          reduce_scalar(endpoints_1d(n), next, class_of, first_of)};
}

SparseMatrix form_matrix_1d(const FormMatrices1D& fm, double a, double m) {
  validate(Geometry{a, a, m});
  SparseMatrix q = (1.0 / (a * a)) * fm.stiffness + (m * m) * fm.mass + (m / a) * fm.trace;
  q.makeCompressed();
  return q;
}

}  // namespace rectdirac
