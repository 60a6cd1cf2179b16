#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rectdirac/formgrid.hpp"
#include "rectdirac/types.hpp"

namespace rectdirac {

enum class SolverMethod { automatic, sparse, dense };

/// SolverMethod::automatic falls back to the dense solver when the subspace
/// iteration fails on a problem of at most this dimension.
inline constexpr int kDenseLimit = 2000;

/// Eigenvalues within this relative distance form one cluster.
inline constexpr double kClusterTolerance = 1e-8;

struct SolverOptions {
  int k = 4;
  double tol = 1e-10;  ///< on ||Q x - mu M x||_{M^-1} / mu
  int maxit = 500;
  std::uint64_t seed = 20211215;
  /// Spectral shift sigma for the factorisation of Q - sigma M. It must lie
  /// strictly below the smallest eigenvalue.
  double shift = 0.0;
  SolverMethod method = SolverMethod::automatic;
  /// Extra block size beyond k used by the subspace iteration.
  int guard = 4;
  /// Optional vectors placed at the front of the starting block.
  std::vector<ComplexVector> warm_start;
  /// Optional projector applied to every block vector (symmetry sectors).
  /// Must commute with Q and M.
  std::function<void(ComplexVector&)> projector;
};

struct EigenPair {
  double mu = 0.0;
  ComplexVector vector;  ///< M-normalised
  double residual = 0.0;
};

struct EigenSolution {
  std::vector<EigenPair> pairs;  ///< ascending
  int iterations = 0;
  std::uint64_t seed = 0;
  SolverMethod method_used = SolverMethod::sparse;
};

/// Smallest k eigenpairs of the Hermitian pencil Q x = mu M x.
///
/// The sparse path is a shifted subspace iteration: the block is mapped by
/// (Q - sigma M)^-1 M and reprojected with Rayleigh-Ritz every step. Starting
/// vectors come from a portable seeded generator, so results are bitwise
/// reproducible for a fixed seed. Throws DomainError if M (or Q - sigma M) is
/// not positive definite and SolverFailure after maxit iterations.
EigenSolution smallest_eigenpairs(const SparseMatrix& q, const SparseMatrix& m, const SolverOptions& opts);

/// Reproducible uniform complex vector with entries in [-1,1) + i[-1,1).
ComplexVector seeded_random_vector(Eigen::Index dim, std::uint64_t seed);

/// ||Q x - mu M x||_{M^-1} / |mu| using a factorisation of M.
class ResidualNorm {
 public:
  explicit ResidualNorm(const SparseMatrix& m);
  ~ResidualNorm();
  ResidualNorm(ResidualNorm&&) noexcept;
  ResidualNorm& operator=(ResidualNorm&&) noexcept;

  double relative(const SparseMatrix& q, const SparseMatrix& m, const ComplexVector& x, double mu) const;
  /// Same, for a precomputed residual vector r = Q x - mu M x.
  double relative(const ComplexVector& r, double mu) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EigenResult {
  Geometry geometry;
  int n = 0;
  double mu = 0.0;       ///< discrete lambda_1^2
  double lambda1 = 0.0;  ///< sqrt(mu)
  SpinorField psi;
  double residual = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  int cluster_size = 1;     ///< eigenvalues within kClusterTolerance of mu
  double next_gap = 0.0;    ///< (mu_next - mu)/mu for the first eigenvalue outside the cluster, 0 if none computed
  std::vector<EigenPair> pairs;
};

/// Discrete lambda_1(a, b)^2 on pre-assembled matrices. The shift
/// m^2 + 0.9 thm_lower(a, b, m) is a proven lower bound for every eigenvalue.
EigenResult lambda1_2d(const FormMatrices& fm, const Geometry& g, SolverOptions opts = {});
EigenResult lambda1_2d(double a, double b, double m, int n, double tol = 1e-10);

struct RefineLevel {
  int n = 0;
  double mu = 0.0;
  double residual = 0.0;
};

struct RefineStudy {
  Geometry geometry;
  std::vector<RefineLevel> levels;
  bool monotone = true;                ///< mu(n_{k+1}) <= mu(n_k) + 1e-12
  bool has_extrapolation = false;      ///< needs three levels with a positive rate
  double observed_order = 0.0;         ///< from the last three levels
  double extrapolated_mu = 0.0;
  double extrapolated_lambda = 0.0;
};

/// Three-level Richardson estimate from mu(n), mu(2n), mu(4n).
struct Richardson {
  bool valid = false;
  double order = 0.0;
  double value = 0.0;
};
Richardson richardson(double coarse, double mid, double fine, double ratio = 2.0);

/// Solves on every n of a strictly increasing, nested list (each n divides
/// the next). Throws DomainError otherwise.
RefineStudy refine_study(const Geometry& g, const std::vector<int>& n_list, double tol = 1e-10);

}  // namespace rectdirac
