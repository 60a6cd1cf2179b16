#pragma once

// Command-line frontend: subcommands solve, sweep, bounds, symmetry, jopt
// and refine, the per-point result cache, CSV/JSON records and the
// parallel sweep engine.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rectdirac/bounds.hpp"
#include "rectdirac/eigsolve.hpp"
#include "rectdirac/jopt.hpp"
#include "rectdirac/symmetry.hpp"

namespace rectdirac::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitArgument = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitSymmetry = 4;
inline constexpr int kExitConsistency = 5;

/// Environment variable overriding the result cache directory.
inline constexpr const char* kCacheEnv = "RECTDIRAC_CACHE_DIR";

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Records go to --out when given, otherwise to `out`; the human summary goes
/// to `out` when --out is given, otherwise to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------- records

struct SweepRecord {
  double a = 0.0, b = 0.0, m = 0.0;
  int n = 0;
  double mu = 0.0, lambda1 = 0.0;
  double thm_lower = 0.0, sharp_lower = 0.0, thm_upper = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
};

std::string csv_header();
std::string to_csv(const SweepRecord& r);
/// nullopt on a malformed row.
std::optional<SweepRecord> parse_csv_row(const std::string& line);

/// %.17g
std::string format_number(double x);

nlohmann::json to_json(const bounds::BoundsReport& r);
nlohmann::json to_json(const RefineStudy& s);
nlohmann::json to_json(const jopt::ConjectureEvidence& e);
nlohmann::json to_json(const jopt::ChainReport& c);
std::string label_name(Complex label);

/// Fixed formatting: two-space indent, trailing newline.
std::string dump(const nlohmann::json& j);

// ------------------------------------------------------------------ cache

std::uint64_t fnv1a(std::string_view s);

/// Outcome of one parameter-point solve as stored in the cache.
struct PointSolve {
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  int cluster_size = 1;
  double next_gap = 0.0;
  double wall_time_ms = 0.0;  ///< of this call; about 0 on cache hits
  bool cached = false;
};

/// Directory of JSON records keyed by a hash of (a, b, m, n, tol, seed).
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir);
  const std::filesystem::path& dir() const noexcept { return dir_; }

  static std::string key(const Geometry& g, int n, double tol, std::uint64_t seed);
  std::optional<PointSolve> load(const std::string& key) const;
  /// Best effort: I/O failures are ignored.
  void store(const std::string& key, const PointSolve& p) const;

 private:
  std::filesystem::path dir_;
};

/// Default directory: $RECTDIRAC_CACHE_DIR, else ./.rectdirac-cache.
std::filesystem::path default_cache_dir();

PointSolve solve_point(const FormMatrices& fm, const Geometry& g, double tol, std::uint64_t seed,
                       const ResultCache* cache);

// ------------------------------------------------------------------ sweep

struct SweepConfig {
  bounds::Constraint constraint = bounds::Constraint::area;
  double m = 0.0;
  double a_min = 0.25;
  double a_max = 4.0;
  int steps = 21;
  int n = 96;
  double tol = 1e-10;
  std::uint64_t seed = 20211215;
  std::optional<bool> log_grid;  ///< default: log for area, linear for perimeter
  bool timing = false;           ///< record wall_time_ms (otherwise written as 0)
};

/// Grid of side lengths a, increasing. Throws DomainError on bad ranges.
std::vector<double> sweep_grid(const SweepConfig& c);

/// Solves every grid point on up to `jobs` threads. Rows reach `emit` in
/// grid order, each right after it and all earlier rows are done and have
/// passed bounds::check_sandwich. Rows in `reuse` (keyed by a) are not
/// re-solved.
std::vector<SweepRecord> run_sweep(const SweepConfig& c, const FormMatrices& fm, int jobs, const ResultCache* cache,
                                   const std::function<void(const SweepRecord&)>& emit = {},
                                   const std::map<double, SweepRecord>* reuse = nullptr);

struct SweepSummary {
  std::size_t argmin = 0;
  std::size_t nearest_unit = 0;  ///< grid index nearest a = 1
  double min_mu = 0.0;
  double worst_drop = 0.0;       ///< mu at the point nearest a = 1 minus min_mu; 0 when it is the argmin
};
SweepSummary summarise(const std::vector<SweepRecord>& rows);

}  // namespace rectdirac::cli
