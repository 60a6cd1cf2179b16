#pragma once

// The 90-degree rotation (Ru)(x1, x2) = (i u1(-x2, x1), u2(-x2, x1)) on the
// even grid, eigenspace classification under R (square) and R^2
// (rectangle), the norm identities of R-symmetric fields and the
// separability witness.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rectdirac/eigsolve.hpp"
#include "rectdirac/formgrid.hpp"
#include "rectdirac/types.hpp"

namespace rectdirac {

/// Exact permutation-with-phase action of R on reduced coordinates.
class Rotation {
 public:
  /// Builds the node map and checks once that every boundary class lands on
  /// the class whose constraint factor it requires (ConsistencyError if not).
  explicit Rotation(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }

  /// R^power for power in any integer (taken mod 4).
  ComplexVector apply(const ComplexVector& x, int power = 1) const;
  SpinorField apply(const SpinorField& psi, int power = 1) const;

  /// Rotation of full nodal values, used to cross-check the reduced map.
  NodalSpinor apply_nodal(const NodalSpinor& u) const;

  /// Source reduced index and phase: (R x)[d] = phase(d) * x[source(d)].
  int source(int d) const noexcept { return source_[d]; }
  Complex phase(int d) const noexcept { return phase_[d]; }

 private:
  Grid grid_;
  std::vector<int> source_;
  std::vector<Complex> phase_;
};

SpinorField rotate(const SpinorField& psi);

/// (1/4) sum_j conj(alpha)^j R^j psi: the projection onto R psi = alpha psi.
/// Throws DomainError unless alpha^4 = 1.
ComplexVector symmetrise(const Rotation& rot, const ComplexVector& x, Complex alpha);

/// The four admissible labels in the fixed order 1, i, -1, -i.
std::vector<Complex> rotation_labels();

/// Max relative deviation |q(a,b)(R^p psi) - q(swap^p(a,b))(psi)| / q over
/// `samples` seeded random fields; for a = b this is the square-form
/// invariance check. jobs > 1 evaluates samples concurrently.
double commutation_check(const FormMatrices& fm, double a, double b, double m, int power = 1, int samples = 8,
                         std::uint64_t seed = 7, int jobs = 1);
double commutation_check(const FormMatrices& fm, double a, double m);

struct ClassifiedState {
  double mu = 0.0;
  Complex eigenvalue;          ///< computed eigenvalue of the R (or R^2) matrix on the span
  Complex label;               ///< nearest admissible value
  double label_error = 0.0;    ///< |eigenvalue - label|
  double residual = 0.0;       ///< ||R^p phi - label phi||_M / ||phi||_M
  SpinorField representative;  ///< M-normalised
};

struct Classification {
  bool square = true;     ///< R (alpha in {+-1, +-i}) or R^2 (beta in {+-1})
  double spread = 0.0;    ///< relative eigenvalue spread of the cluster
  double invariance = 0.0;  ///< max ||R^p psi_j - P R^p psi_j||_M over the span
  std::vector<ClassifiedState> states;  ///< ordered by label as in rotation_labels()
};

/// Tolerances: spread <= kClusterTolerance, invariance and label error
/// <= 1e-6. Violations raise SymmetryResolutionError. Pairs must be
/// M-orthonormal and belong to fm's grid.
Classification classify_symmetry(const FormMatrices& fm, const std::vector<EigenPair>& cluster, bool square);

/// The pairs whose mu lies within kClusterTolerance of the first one.
std::vector<EigenPair> lowest_cluster(const std::vector<EigenPair>& pairs);

struct NormDeviation {
  double d1 = 0.0;  ///< | ||d1 psi|| - ||d2 psi|| | / max
  double d2 = 0.0;  ///< same for the two traces; 0 when both vanish
};

NormDeviation verify_norm_identities(const FormMatrices& fm, const SpinorField& psi);
NormDeviation norm_deviation(const FormEnergies& e);

/// sigma_2 / sigma_1 of each component's (n+1) x (n+1) nodal matrix
/// (rows indexed by x2); nullopt for a zero component.
struct Separability {
  std::optional<double> u1;
  std::optional<double> u2;
};
Separability separability_residual(const SpinorField& psi);

}  // namespace rectdirac
