#include "rectdirac/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rectdirac/errors.hpp"
#include "rectdirac/parallel.hpp"

namespace rectdirac {

namespace {

constexpr double kSymmetryTolerance = 1e-6;

int wrap_power(int power) { return ((power % 4) + 4) % 4; }

double m_norm(const SparseMatrix& m, const ComplexVector& v) { return std::sqrt(std::max(0.0, v.dot(m * v).real())); }

}  // namespace

Rotation::Rotation(const Grid& grid) : grid_(grid) {
  const int n = grid.n();
  source_.assign(grid.reduced_dimension(), -1);
  phase_.assign(grid.reduced_dimension(), Complex{0.0, 0.0});
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int target = grid.node(i, j);
      const int src = grid.node(n - j, i);
      const NodeClass ct = grid.node_class(target);
      const NodeClass cs = grid.node_class(src);
      if ((ct == NodeClass::corner) != (cs == NodeClass::corner) ||
          (ct == NodeClass::interior) != (cs == NodeClass::interior)) {
        throw ConsistencyError("rotation maps a node onto a node of a different kind");
      }
      if (ct == NodeClass::corner) {
        continue;
      }
      const int ft = grid.first_dof(target);
      const int fs = grid.first_dof(src);
      source_[ft] = fs;
      phase_[ft] = kI;
      if (ct == NodeClass::interior) {
        source_[ft + 1] = fs + 1;
        phase_[ft + 1] = Complex{1.0, 0.0};
      } else if (boundary_factor(ct) * kI != boundary_factor(cs)) {
        // u2' = u2 = w_s u1 and u1' = i u1 need w_t * i = w_s.
        throw ConsistencyError("rotation does not respect the boundary constraint");
      }
    }
  }
}

ComplexVector Rotation::apply(const ComplexVector& x, int power) const {
  if (x.size() != grid_.reduced_dimension()) {
    throw DomainError("rotation: vector does not belong to this grid");
  }
  ComplexVector out = x;
  ComplexVector tmp(x.size());
  for (int p = 0; p < wrap_power(power); ++p) {
    for (Eigen::Index d = 0; d < out.size(); ++d) {
      tmp[d] = phase_[d] * out[source_[d]];
    }
    out.swap(tmp);
  }
  return out;
}

SpinorField Rotation::apply(const SpinorField& psi, int power) const {
  if (psi.n != grid_.n()) {
    throw DomainError("rotation: field does not belong to this grid");
  }
  return SpinorField{psi.n, apply(psi.coeffs, power)};
}

NodalSpinor Rotation::apply_nodal(const NodalSpinor& u) const {
  const int n = grid_.n();
  if (u.u1.size() != grid_.node_count() || u.u2.size() != grid_.node_count()) {
    throw DomainError("rotation: nodal field does not belong to this grid");
  }
  NodalSpinor out{ComplexVector(u.u1.size()), ComplexVector(u.u2.size())};
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int src = grid_.node(n - j, i);
      out.u1[grid_.node(i, j)] = kI * u.u1[src];
      out.u2[grid_.node(i, j)] = u.u2[src];
    }
  }
  return out;
}

SpinorField rotate(const SpinorField& psi) { return Rotation(Grid(psi.n)).apply(psi); }

std::vector<Complex> rotation_labels() { return {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}; }

ComplexVector symmetrise(const Rotation& rot, const ComplexVector& x, Complex alpha) {
  const auto labels = rotation_labels();
  if (std::none_of(labels.begin(), labels.end(), [&](Complex l) { return l == alpha; })) {
    throw DomainError("symmetrise: alpha must be one of 1, i, -1, -i");
  }
  ComplexVector sum = x;
  ComplexVector r = x;
  Complex weight{1.0, 0.0};
  for (int j = 1; j < 4; ++j) {
    r = rot.apply(r);
    weight *= std::conj(alpha);
    sum += weight * r;
  }
  return 0.25 * sum;
}

double commutation_check(const FormMatrices& fm, double a, double b, double m, int power, int samples,
                         std::uint64_t seed, int jobs) {
  validate(Geometry{a, b, m});
  if (samples < 1) {
    throw DomainError("commutation_check: need at least one sample");
  }
  const Rotation rot(fm.grid);
  const bool swapped = wrap_power(power) % 2 == 1;
  const SparseMatrix q_rot = form_matrix(fm, a, b, m);
  const SparseMatrix q_ref = swapped ? form_matrix(fm, b, a, m) : q_rot;
  std::vector<double> dev(samples, 0.0);
  for_each_index(static_cast<std::size_t>(samples), jobs, [&](std::size_t s) {
    const ComplexVector x = seeded_random_vector(fm.grid.reduced_dimension(), seed + s);
    const ComplexVector rx = rot.apply(x, power);
    const double lhs = rx.dot(q_rot * rx).real();
    const double rhs = x.dot(q_ref * x).real();
    dev[s] = std::abs(lhs - rhs) / std::abs(rhs);
  });
  return *std::max_element(dev.begin(), dev.end());
}

double commutation_check(const FormMatrices& fm, double a, double m) { return commutation_check(fm, a, a, m); }

std::vector<EigenPair> lowest_cluster(const std::vector<EigenPair>& pairs) {
  std::vector<EigenPair> out;
  if (pairs.empty()) {
    return out;
  }
  const double mu0 = pairs.front().mu;
  for (const EigenPair& p : pairs) {
    if (std::abs(p.mu - mu0) <= kClusterTolerance * std::abs(mu0)) {
      out.push_back(p);
    }
  }
  return out;
}

Classification classify_symmetry(const FormMatrices& fm, const std::vector<EigenPair>& cluster, bool square) {
  if (cluster.empty()) {
    throw DomainError("classify_symmetry: empty cluster");
  }
  const Grid& grid = fm.grid;
  const Eigen::Index dim = grid.reduced_dimension();
  const Eigen::Index k = static_cast<Eigen::Index>(cluster.size());
  const int power = square ? 1 : 2;
  const Rotation rot(grid);

  Classification out;
  out.square = square;
  double lo = cluster.front().mu, hi = lo;
  ComplexMatrix basis(dim, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (cluster[c].vector.size() != dim) {
      throw DomainError("classify_symmetry: eigenvector does not belong to this grid");
    }
    basis.col(c) = cluster[c].vector;
    lo = std::min(lo, cluster[c].mu);
    hi = std::max(hi, cluster[c].mu);
  }
  out.spread = (hi - lo) / std::abs(lo);
  double mean_mu = 0.0;
  for (const EigenPair& p : cluster) {
    mean_mu += p.mu / static_cast<double>(k);
  }
  if (out.spread > kClusterTolerance) {
    throw SymmetryResolutionError("classify_symmetry: eigenvalues spread by " + std::to_string(out.spread) +
                                  " relative; not a single cluster");
  }

  ComplexMatrix rotated(dim, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    rotated.col(c) = rot.apply(ComplexVector(basis.col(c)), power);
  }
  const ComplexMatrix m_basis = fm.mass * basis;
  const ComplexMatrix gram = m_basis.adjoint() * basis;
  const ComplexMatrix a = m_basis.adjoint() * rotated;
  // A is the matrix of R^p on the span when the basis is M-orthonormal.
  if ((gram - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw DomainError("classify_symmetry: cluster vectors are not M-orthonormal");
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    const ComplexVector defect = rotated.col(c) - basis * a.col(c);
    out.invariance = std::max(out.invariance, m_norm(fm.mass, defect));
  }
  if (out.invariance > kSymmetryTolerance) {
    throw SymmetryResolutionError("classify_symmetry: cluster is not invariant under the rotation (defect " +
                                  std::to_string(out.invariance) + "); increase k or tighten tol");
  }

  Eigen::ComplexEigenSolver<ComplexMatrix> es(a);
  if (es.info() != Eigen::Success) {
    throw SymmetryResolutionError("classify_symmetry: eigen-decomposition of the rotation matrix failed");
  }
  std::vector<Complex> labels = rotation_labels();
  if (!square) {
    labels = {{1.0, 0.0}, {-1.0, 0.0}};
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    ClassifiedState s;
    s.eigenvalue = es.eigenvalues()[c];
    double best = std::numeric_limits<double>::infinity();
    for (Complex l : labels) {
      if (std::abs(s.eigenvalue - l) < best) {
        best = std::abs(s.eigenvalue - l);
        s.label = l;
      }
    }
    s.label_error = best;
    ComplexVector phi = basis * es.eigenvectors().col(c);
    phi /= m_norm(fm.mass, phi);
    s.residual = m_norm(fm.mass, rot.apply(phi, power) - s.label * phi);
    s.mu = mean_mu;
    s.representative = SpinorField{grid.n(), std::move(phi)};
    if (s.label_error > kSymmetryTolerance || s.residual > kSymmetryTolerance) {
      throw SymmetryResolutionError("classify_symmetry: rotation eigenvalue " + std::to_string(s.eigenvalue.real()) +
                                    (s.eigenvalue.imag() < 0 ? "" : "+") + std::to_string(s.eigenvalue.imag()) +
                                    "i is not an admissible label");
    }
    out.states.push_back(std::move(s));
  }
  auto rank = [&labels](Complex l) {
    return std::find(labels.begin(), labels.end(), l) - labels.begin();
  };
  std::stable_sort(out.states.begin(), out.states.end(),
                   [&](const ClassifiedState& x, const ClassifiedState& y) { return rank(x.label) < rank(y.label); });
  return out;
}

NormDeviation norm_deviation(const FormEnergies& e) {
  auto rel = [](double x2, double y2) {
    const double x = std::sqrt(std::max(0.0, x2)), y = std::sqrt(std::max(0.0, y2));
    const double scale = std::max(x, y);
    return scale > 0.0 ? std::abs(x - y) / scale : 0.0;
  };
  return {rel(e.k1, e.k2), rel(e.trace_par, e.trace_eq)};
}

NormDeviation verify_norm_identities(const FormMatrices& fm, const SpinorField& psi) {
  return norm_deviation(energies(fm, psi));
}

Separability separability_residual(const SpinorField& psi) {
  const Grid grid(psi.n);
  const NodalSpinor u = reconstruct(grid, psi);
  const int npa = grid.nodes_per_axis();
  auto ratio = [&](const ComplexVector& c) -> std::optional<double> {
    ComplexMatrix mat(npa, npa);
    for (int j = 0; j < npa; ++j) {
      for (int i = 0; i < npa; ++i) {
        mat(j, i) = c[grid.node(i, j)];
      }
    }
    const Eigen::VectorXd sv = Eigen::BDCSVD<ComplexMatrix>(mat).singularValues();
    if (!(sv[0] > 0.0)) {
      return std::nullopt;
    }
    return sv[1] / sv[0];
  };
  return {ratio(u.u1), ratio(u.u2)};
}

}  // namespace rectdirac
