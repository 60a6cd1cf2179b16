#include "rectdirac/eigsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/CholmodSupport>

#include "rectdirac/bounds.hpp"
#include "rectdirac/errors.hpp"

namespace rectdirac {

namespace {

// Supernodal Cholesky; failure of the numeric factorisation means the
// matrix is not (numerically) positive definite.
using Factor = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;

void factor_positive_definite(Factor& llt, const SparseMatrix& a, const char* what) {
  llt.cholmod().print = 0;
  llt.compute(a);
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + " is not positive definite");
  }
}

void check_pencil(const SparseMatrix& q, const SparseMatrix& m, const SolverOptions& opts) {
  if (q.rows() != q.cols() || m.rows() != m.cols() || q.rows() != m.rows()) {
    throw DomainError("eigensolver: Q and M must be square and of equal size");
  }
  if (opts.k < 1 || opts.k > q.rows()) {
    throw DomainError("eigensolver: k must lie in [1, dimension]");
  }
  if (!(opts.tol > 0.0) || opts.maxit < 1) {
    throw DomainError("eigensolver: tol must be positive and maxit >= 1");
  }
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace

ComplexVector seeded_random_vector(Eigen::Index dim, std::uint64_t seed) {
  // mt19937_64's output sequence is fixed by the standard; the conversion to
  // [-1, 1) is done by hand so no library distribution is involved.
  std::mt19937_64 gen(seed);
  auto uniform = [&gen]() { return 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0; };
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = uniform();
    const double im = uniform();
    v[i] = Complex{re, im};
  }
  return v;
}

struct ResidualNorm::Impl {
  Factor mass;
};

ResidualNorm::ResidualNorm(const SparseMatrix& m) : impl_(std::make_unique<Impl>()) {
  factor_positive_definite(impl_->mass, m, "mass matrix");
}
ResidualNorm::~ResidualNorm() = default;
ResidualNorm::ResidualNorm(ResidualNorm&&) noexcept = default;
ResidualNorm& ResidualNorm::operator=(ResidualNorm&&) noexcept = default;

double ResidualNorm::relative(const SparseMatrix& q, const SparseMatrix& m, const ComplexVector& x, double mu) const {
  return relative(q * x - mu * (m * x), mu);
}

double ResidualNorm::relative(const ComplexVector& r, double mu) const {
  const ComplexVector w = impl_->mass.solve(r);
  const double norm = std::sqrt(std::max(0.0, r.dot(w).real()));
  return norm / std::max(std::abs(mu), std::numeric_limits<double>::min());
}

namespace {

EigenSolution solve_dense(const SparseMatrix& q, const SparseMatrix& m, const SolverOptions& opts,
                          const ResidualNorm& rnorm) {
  const ComplexMatrix qd = hermitian_part(ComplexMatrix(q));
  const ComplexMatrix md = hermitian_part(ComplexMatrix(m));
  Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> ges(qd, md);
  if (ges.info() != Eigen::Success) {
    throw DomainError("dense eigensolver: mass matrix is not positive definite");
  }
  EigenSolution out;
  out.iterations = 1;
  out.seed = opts.seed;
  out.method_used = SolverMethod::dense;
  for (int i = 0; i < opts.k; ++i) {
    EigenPair p;
    p.vector = ges.eigenvectors().col(i);
    p.vector /= std::sqrt(p.vector.dot(m * p.vector).real());
    // The Cholesky-reduced eigenvalue carries cond(M) rounding; the
    // Rayleigh quotient of its vector does not.
    p.mu = p.vector.dot(q * p.vector).real() / p.vector.dot(m * p.vector).real();
    p.residual = rnorm.relative(q, m, p.vector, p.mu);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

EigenSolution solve_subspace(const SparseMatrix& q, const SparseMatrix& m, const SolverOptions& opts,
                             const ResidualNorm& rnorm) {
  const Eigen::Index dim = q.rows();
  const Eigen::Index block = std::min<Eigen::Index>(dim, opts.k + std::max(0, opts.guard));

  SparseMatrix shifted = q - opts.shift * m;
  Factor op;
  factor_positive_definite(op, shifted, "Q - shift*M");

  auto project = [&opts](ComplexVector& v) {
    if (opts.projector) {
      opts.projector(v);
    }
  };

  ComplexMatrix x(dim, block);
  {
    std::mt19937_64 seeder(opts.seed);
    for (Eigen::Index c = 0; c < block; ++c) {
      ComplexVector v;
      if (static_cast<std::size_t>(c) < opts.warm_start.size() && opts.warm_start[c].size() == dim) {
        v = opts.warm_start[c];
      } else {
        v = seeded_random_vector(dim, seeder());
      }
      project(v);
      x.col(c) = v;
    }
  }

  EigenSolution best;
  double best_worst = std::numeric_limits<double>::infinity();
  std::vector<double> previous;
  // M X and Q X are carried along as (M Y) C and (Q Y) C.
  ComplexMatrix mx = m * x;
  ComplexMatrix qx;
  for (int it = 1; it <= opts.maxit; ++it) {
    ComplexMatrix y = op.solve(mx);
    for (Eigen::Index c = 0; c < block; ++c) {
      ComplexVector v = y.col(c);
      project(v);
      const double nv = v.norm();
      y.col(c) = nv > 0.0 ? ComplexVector(v / nv) : v;
    }
    const ComplexMatrix qy = q * y;
    const ComplexMatrix my = m * y;
    const ComplexMatrix qr = hermitian_part(y.adjoint() * qy);
    const ComplexMatrix mr = hermitian_part(y.adjoint() * my);
    Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> ges(qr, mr);
    if (ges.info() != Eigen::Success) {
      throw SolverFailure("subspace iteration: Rayleigh-Ritz basis became rank deficient",
                          best.pairs.empty() ? 0.0 : best.pairs.front().mu, best_worst,
                          best.pairs.empty() ? ComplexVector() : best.pairs.front().vector, it);
    }
    const ComplexMatrix& c = ges.eigenvectors();
    x = y * c;
    mx = my * c;
    qx = qy * c;

    // Residuals need a mass solve each; skip them until the Ritz values
    // have settled to roughly the square of a 1e-6 residual.
    double drift = 0.0;
    for (int i = 0; i < opts.k; ++i) {
      const double theta = ges.eigenvalues()[i];
      drift = std::max(drift, previous.empty() ? 1.0 : std::abs(theta - previous[i]) / std::abs(theta));
    }
    previous.assign(ges.eigenvalues().data(), ges.eigenvalues().data() + opts.k);
    const bool evaluate = drift <= 1e-12 || it == opts.maxit || it % 10 == 0;

    EigenSolution current;
    current.iterations = it;
    current.seed = opts.seed;
    current.method_used = SolverMethod::sparse;
    double worst = evaluate ? 0.0 : std::numeric_limits<double>::infinity();
    for (int i = 0; i < opts.k; ++i) {
      EigenPair p;
      p.mu = ges.eigenvalues()[i];
      p.vector = x.col(i);
      p.residual = evaluate ? rnorm.relative(qx.col(i) - p.mu * mx.col(i), p.mu)
                            : std::numeric_limits<double>::infinity();
      worst = std::max(worst, p.residual);
      current.pairs.push_back(std::move(p));
    }
    if (evaluate && (worst < best_worst || best.pairs.empty())) {
      best_worst = worst;
      best = current;
    }
    if (worst <= opts.tol) {
      return current;
    }
  }
  throw SolverFailure("subspace iteration did not converge in " + std::to_string(opts.maxit) + " iterations",
                      best.pairs.empty() ? 0.0 : best.pairs.front().mu, best_worst,
                      best.pairs.empty() ? ComplexVector() : best.pairs.front().vector, opts.maxit);
}

}  // namespace

EigenSolution smallest_eigenpairs(const SparseMatrix& q, const SparseMatrix& m, const SolverOptions& opts) {
  check_pencil(q, m, opts);
  const ResidualNorm rnorm(m);
  if (opts.method == SolverMethod::dense) {
    if (opts.projector) {
      throw DomainError("dense eigensolver does not support sector projectors");
    }
    return solve_dense(q, m, opts, rnorm);
  }
  if (opts.method == SolverMethod::sparse || q.rows() > kDenseLimit || opts.projector) {
    return solve_subspace(q, m, opts, rnorm);
  }
  try {
    return solve_subspace(q, m, opts, rnorm);
  } catch (const SolverFailure&) {
    return solve_dense(q, m, opts, rnorm);
  }
}

EigenResult lambda1_2d(const FormMatrices& fm, const Geometry& g, SolverOptions opts) {
  validate(g);
  const SparseMatrix q = form_matrix(fm, g);
  opts.shift = g.m * g.m + 0.9 * bounds::thm_lower(g.a, g.b, g.m);
  EigenSolution sol = smallest_eigenpairs(q, fm.mass, opts);

  EigenResult r;
  r.geometry = g;
  r.n = fm.grid.n();
  r.mu = sol.pairs.front().mu;
  r.lambda1 = std::sqrt(r.mu);
  r.psi = SpinorField{fm.grid.n(), sol.pairs.front().vector};
  r.residual = sol.pairs.front().residual;
  r.iterations = sol.iterations;
  r.seed = sol.seed;
  r.cluster_size = 0;
  for (const EigenPair& p : sol.pairs) {
    if (std::abs(p.mu - r.mu) <= kClusterTolerance * std::abs(r.mu)) {
      ++r.cluster_size;
    } else if (r.next_gap == 0.0) {
      r.next_gap = (p.mu - r.mu) / r.mu;
    }
  }
  r.pairs = std::move(sol.pairs);
  if (!(r.mu > g.m * g.m)) {
    throw ConsistencyError("discrete lambda_1^2 does not exceed m^2");
  }
  return r;
}

EigenResult lambda1_2d(double a, double b, double m, int n, double tol) {
  const Grid grid(n);
  const FormMatrices fm = assemble(grid);
  SolverOptions opts;
  opts.tol = tol;
  return lambda1_2d(fm, Geometry{a, b, m}, opts);
}

Richardson richardson(double coarse, double mid, double fine, double ratio) {
  const double e1 = coarse - mid;
  const double e2 = mid - fine;
  if (!(e1 > 0.0) || !(e2 > 0.0) || !(e1 > e2)) {
    return {};
  }
  const double order = std::log(e1 / e2) / std::log(ratio);
  return {true, order, fine - e2 / (std::pow(ratio, order) - 1.0)};
}

RefineStudy refine_study(const Geometry& g, const std::vector<int>& n_list, double tol) {
  validate(g);
  if (n_list.empty()) {
    throw DomainError("refine_study: empty grid list");
  }
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1] || n_list[i] % n_list[i - 1] != 0) {
      throw DomainError("refine_study: grid list must be strictly increasing and nested");
    }
  }
  RefineStudy study;
  study.geometry = g;
  for (int n : n_list) {
    const EigenResult r = lambda1_2d(g.a, g.b, g.m, n, tol);
    if (!study.levels.empty() && r.mu > study.levels.back().mu + 1e-12) {
      study.monotone = false;
    }
    study.levels.push_back({n, r.mu, r.residual});
  }
  const std::size_t L = study.levels.size();
  if (L >= 3) {
    const auto& c = study.levels[L - 3];
    const auto& md = study.levels[L - 2];
    const auto& f = study.levels[L - 1];
    if (md.n * md.n == c.n * f.n) {
      const Richardson rich = richardson(c.mu, md.mu, f.mu, static_cast<double>(f.n) / md.n);
      if (rich.valid) {
        study.has_extrapolation = true;
        study.observed_order = rich.order;
        study.extrapolated_mu = rich.value;
        study.extrapolated_lambda = std::sqrt(rich.value);
      }
    }
  }
  return study;
}

}  // namespace rectdirac
