#pragma once

// Conforming bilinear discretisation of the squared Dirac form on the
// reference square (-1/2, 1/2)^2.
//
// Both spinor components use tensor-product piecewise-linear elements. The
// infinite-mass condition u2 = omega * u1 is eliminated on every edge node
// (one complex unknown per edge node, two per interior node, none at the
// corners), so every discrete field lies in the operator domain and the
// discrete minimum is an upper bound for lambda_1^2.

#include <array>
#include <cstdint>
#include <vector>

#include "rectdirac/types.hpp"

namespace rectdirac {

enum class NodeClass : std::uint8_t { interior, edge_top, edge_bottom, edge_left, edge_right, corner };

/// omega in u2 = omega * u1 on each edge: top -1, bottom +1, right +i, left -i.
Complex boundary_factor(NodeClass c);

/// Tensor grid with n cells per axis plus the boundary-constraint bookkeeping.
class Grid {
 public:
  /// Throws DomainError unless n >= 4 and n is even.
  explicit Grid(int n);

  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  int nodes_per_axis() const noexcept { return n_ + 1; }
  int node_count() const noexcept { return (n_ + 1) * (n_ + 1); }
  int reduced_dimension() const noexcept { return reduced_dim_; }

  /// Node index for (i, j); i runs along x1, j along x2.
  int node(int i, int j) const noexcept { return i + (n_ + 1) * j; }
  /// (i - n/2) / n: exactly antisymmetric about the centre node.
  double coordinate(int i) const noexcept { return static_cast<double>(i - n_ / 2) / n_; }

  NodeClass node_class(int node) const noexcept { return classes_[node]; }

  /// First reduced unknown carried by the node; -1 at corners. Interior
  /// nodes own (u1, u2) at (first, first+1); edge nodes own u1 only.
  int first_dof(int node) const noexcept { return first_dof_[node]; }

  /// Number of reduced unknowns at a node (0, 1 or 2).
  int dof_count(int node) const noexcept;

  bool operator==(const Grid& other) const noexcept { return n_ == other.n_; }

 private:
  int n_;
  int reduced_dim_ = 0;
  std::vector<NodeClass> classes_;
  std::vector<int> first_dof_;
};

/// Expected reduced dimension 2(n-1)^2 + 4(n-1).
constexpr int reduced_dimension_for(int n) { return 2 * (n - 1) * (n - 1) + 4 * (n - 1); }

/// Complex 2-spinor in reduced coordinates.
struct SpinorField {
  int n = 0;
  ComplexVector coeffs;
};

/// Full nodal values of both components, (n+1)^2 entries each.
struct NodalSpinor {
  ComplexVector u1;
  ComplexVector u2;
};

NodalSpinor reconstruct(const Grid& grid, const SpinorField& psi);

/// Inverse of reconstruct on fields satisfying the constraint: reads u1 on
/// edges and both components in the interior. Corners and u2 on edges are
/// ignored; see constraint_defect for checking them.
SpinorField reduce(const Grid& grid, const NodalSpinor& nodal);

/// max over boundary nodes of |u2 - omega u1| (edges) and |u| (corners).
double constraint_defect(const Grid& grid, const NodalSpinor& nodal);

/// The five Hermitian matrices in reduced coordinates:
///   K1 = ||d1 psi||^2, K2 = ||d2 psi||^2, M = ||psi||^2,
///   Tpar = trace on the vertical sides x1 = +-1/2,
///   Teq  = trace on the horizontal sides x2 = +-1/2.
struct FormMatrices {
  Grid grid;
  SparseMatrix k1;
  SparseMatrix k2;
  SparseMatrix mass;
  SparseMatrix trace_par;
  SparseMatrix trace_eq;
};

/// Closed-form element integrals; single-threaded.
FormMatrices assemble(const Grid& grid);

/// Q = a^-2 K1 + b^-2 K2 + m^2 M + (m/a) Tpar + (m/b) Teq.
SparseMatrix form_matrix(const FormMatrices& fm, double a, double b, double m);
SparseMatrix form_matrix(const FormMatrices& fm, const Geometry& g);

/// General weighted sum w0 K1 + w1 K2 + w2 M + w3 Tpar + w4 Teq.
SparseMatrix weighted_form(const FormMatrices& fm, const std::array<double, 5>& weights);

/// The five quadratic forms of a field, in the order of FormMatrices.
struct FormEnergies {
  double k1 = 0.0;
  double k2 = 0.0;
  double mass = 0.0;
  double trace_par = 0.0;
  double trace_eq = 0.0;
};

FormEnergies energies(const FormMatrices& fm, const SpinorField& psi);

/// psi^H Q psi / psi^H M psi. Throws DomainError for a zero field.
double quotient(const FormMatrices& fm, double a, double b, double m, const SpinorField& psi);
double quotient(const FormEnergies& e, double a, double b, double m);

/// Nodal interpolant of cos(pi x1) cos(pi x2) (1, 0).
SpinorField trial_dirichlet(const Grid& grid);

/// Exact injection of a bilinear field on grid n into grid 2n.
SpinorField prolongate(const Grid& coarse, const SpinorField& psi);

/// Scalar (single component, unconstrained) matrices on all (n+1)^2 nodes.
struct ScalarMatrices {
  Eigen::SparseMatrix<double> k1, k2, mass, trace_par, trace_eq;
};
ScalarMatrices assemble_scalar(const Grid& grid);

/// One-dimensional analogue on (-1/2, 1/2) with phi2(+-1/2) = +-i phi1(+-1/2)
/// eliminated. Reduced dimension 2(n-1) + 2.
struct FormMatrices1D {
  int n = 0;
  SparseMatrix stiffness;  ///< ||phi'||^2
  SparseMatrix mass;       ///< ||phi||^2
  SparseMatrix trace;      ///< |phi(-1/2)|^2 + |phi(1/2)|^2
};

/// Throws DomainError unless n >= 4.
FormMatrices1D assemble_1d(int n);

/// a^-2 K + m^2 M + (m/a) T: the 1D squared form on (-a/2, a/2) rescaled.
SparseMatrix form_matrix_1d(const FormMatrices1D& fm, double a, double m);

}  // namespace rectdirac
