#pragma once

// The non-convex functional
//   J[psi] = (2 ||d1 psi|| ||d2 psi|| + 2 m ||trace_par psi|| ||trace_eq psi||) / ||psi||^2,
// its Euler fixed-point iteration, restart batteries and the comparison
// chain against rectangle eigenvalues.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rectdirac/eigsolve.hpp"
#include "rectdirac/formgrid.hpp"
#include "rectdirac/symmetry.hpp"

namespace rectdirac::jopt {

/// Throws DomainError for a zero field.
double j_value(const FormMatrices& fm, double m, const SpinorField& psi);
double j_value(const FormEnergies& e, double m);

/// A = sqrt(||d1 psi|| / ||d2 psi||), B = ||trace_par psi|| / ||trace_eq psi||.
struct Ratios {
  double A = 1.0;
  double B = 1.0;
};

/// Throws DegenerateRatioError when a norm entering A (or B, if m > 0 or
/// require_traces) is below 1e-12 ||psi||.
Ratios ratios(const FormEnergies& e, double m, bool allow_zero_traces = false);

/// A^-2 K1 + A^2 K2 + (m/B) Tpar + m B Teq.
SparseMatrix euler_form(const FormMatrices& fm, double A, double B, double m);

struct EulerResult {
  double mu = 0.0;
  SpinorField psi;
  double residual = 0.0;
  int iterations = 0;
};

struct EulerOptions {
  double tol = 1e-10;
  int k = 1;
  std::uint64_t seed = 20211215;
  std::optional<SpinorField> warm_start;
  /// Restrict to R psi = sector psi (requires A = B = 1 up to rounding for
  /// the restriction to be meaningful).
  std::optional<Complex> sector;
};

/// Smallest eigenpair of euler_form against M.
EulerResult euler_solve(const FormMatrices& fm, double A, double B, double m, const EulerOptions& opts = {});

struct HistoryRow {
  double mu = 0.0;
  double A = 0.0;
  double B = 0.0;
  double j_value = 0.0;
};

struct MinimizerState {
  SpinorField psi;
  double A = 1.0;
  double B = 1.0;
  double mu = 0.0;
  double j_value = 0.0;
  int iteration = 0;
  bool converged = false;
  std::vector<HistoryRow> history;  ///< row 0 is the initial field
};

struct FixedPointOptions {
  double damping = 1.0;  ///< theta in (0, 1]: A <- A^(1-theta) target^theta
  double tol = 1e-8;     ///< on |dA| + |dB| (dB only counted for m > 0)
  int maxit = 100;
  double solver_tol = 1e-10;
  std::uint64_t seed = 20211215;
  std::optional<Complex> sector;
};

/// Alternates Euler solves and ratio updates. The initial field may have
/// both traces zero, in which case B starts at 1.
MinimizerState fixed_point_minimize(const FormMatrices& fm, double m, const SpinorField& init,
                                    const FixedPointOptions& opts = {});
/// Same, writing into `state`; if an exception escapes, `state` still holds
/// every iterate accepted before it.
void fixed_point_minimize_into(const FormMatrices& fm, double m, const SpinorField& init,
                               const FixedPointOptions& opts, MinimizerState& state);

/// True when every step satisfies mu_{k+1} <= mu_k + slack.
bool is_monotone(const MinimizerState& s, double slack = 1e-12);

enum class StartKind { trial, symmetric, random };
const char* to_string(StartKind k);

struct RestartOutcome {
  int index = 0;
  StartKind kind = StartKind::trial;
  std::uint64_t seed = 0;
  std::optional<Complex> sector;
  bool ok = false;
  bool degenerate = false;  ///< stopped by the degenerate-ratio guard
  std::string error;        ///< set when the run failed
  MinimizerState state;     ///< iterates up to the failure for failed runs
  NormDeviation deviation;  ///< of the final field
};

struct ConjectureEvidence {
  double m = 0.0;
  int n = 0;
  double best_mu = 0.0;
  int best_index = -1;
  NormDeviation best_deviation;
  bool all_monotone = true;
  bool basins_agree = false;  ///< every successful restart within 1e-6 relative of best_mu
  /// Lowest last mu among runs stopped by the degenerate guard (their J
  /// kept falling as one ratio ran off); nullopt if none.
  std::optional<double> degenerate_mu;
  std::vector<RestartOutcome> restarts;
};

/// Restart r: r = 0 the Dirichlet trial field, odd r a random field projected
/// onto sector rotation_labels()[(r/2) % 4], even r > 0 a plain random field.
/// best_mu is taken over the runs that finished. Failed restarts are
/// recorded; if all fail, throws DegenerateRatioError.
ConjectureEvidence probe_conjecture_symmetry(const FormMatrices& fm, double m, int restarts, std::uint64_t seed,
                                             const FixedPointOptions& opts = {}, int jobs = 1);

struct ChainPoint {
  double a = 0.0;
  double mu_area = 0.0;       ///< mu(a, 1/a, m) - m^2
  double mu_perimeter = 0.0;  ///< mu(a, 2-a, m) - m^2, when a < 2
  double refine_gap = 0.0;    ///< |mu(n/2) - mu(n)| at (a, 1/a)
  bool above_best = false;    ///< mu_area >= best_mu - tol
  bool perimeter_ok = true;   ///< mu_perimeter >= mu_area - refine_gap
};

struct ChainReport {
  double m = 0.0;
  int n = 0;
  double best_mu = 0.0;
  double square_mu = 0.0;                ///< mu(1, 1, m) - m^2
  std::vector<double> sector_minima;     ///< Euler minimum at A = B = 1 in each sector
  double symmetric_min = 0.0;
  double symmetric_gap = 0.0;            ///< |symmetric_min - square_mu| / square_mu
  std::vector<ChainPoint> points;
  bool area_ok = true;
  bool perimeter_ok = true;
};

/// Checks (1) mu(a,1/a)-m^2 >= best, (2) min over sectors of the symmetric
/// J minimum = mu(1,1)-m^2, (3) mu(a,2-a) >= mu(a,1/a) - gap.
ChainReport verify_theorem_idea_chain(const FormMatrices& fm, double m, const std::vector<double>& a_grid,
                                      double best_mu, double tol = 1e-8, int jobs = 1);

}  // namespace rectdirac::jopt
