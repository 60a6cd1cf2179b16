#include <chrono>
#include <cmath>
#include <mutex>

#include "rectdirac/cli.hpp"
#include "rectdirac/errors.hpp"
#include "rectdirac/parallel.hpp"

namespace rectdirac::cli {

PointSolve solve_point(const FormMatrices& fm, const Geometry& g, double tol, std::uint64_t seed,
                       const ResultCache* cache) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string key = ResultCache::key(g, fm.grid.n(), tol, seed);
  std::optional<PointSolve> hit = cache ? cache->load(key) : std::nullopt;
  PointSolve p;
  if (hit) {
    p = *hit;
  } else {
    SolverOptions opts;
    opts.tol = tol;
    opts.seed = seed;
    const EigenResult r = lambda1_2d(fm, g, opts);
    p.mu = r.mu;
    p.residual = r.residual;
    p.iterations = r.iterations;
    p.seed = r.seed;
    p.cluster_size = r.cluster_size;
    p.next_gap = r.next_gap;
    if (cache) {
      cache->store(key, p);
    }
  }
  p.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return p;
}

std::vector<double> sweep_grid(const SweepConfig& c) {
  if (c.steps < 1) {
    throw DomainError("sweep: steps must be >= 1");
  }
  if (!(c.a_min > 0.0) || !(c.a_max >= c.a_min) || !std::isfinite(c.a_max) || (c.steps > 1 && c.a_max == c.a_min)) {
    throw DomainError("sweep: need 0 < a_min < a_max");
  }
  if (c.constraint == bounds::Constraint::perimeter && !(c.a_max < 2.0)) {
    throw DomainError("sweep: perimeter family needs [a_min, a_max] inside (0, 2)");
  }
  const bool log_grid = c.log_grid.value_or(c.constraint == bounds::Constraint::area);
  std::vector<double> a(c.steps);
  for (int i = 0; i < c.steps; ++i) {
    const double t = c.steps == 1 ? 0.0 : static_cast<double>(i) / (c.steps - 1);
    a[i] = log_grid ? c.a_min * std::pow(c.a_max / c.a_min, t) : c.a_min + (c.a_max - c.a_min) * t;
  }
  a.back() = c.steps == 1 ? c.a_min : c.a_max;
  return a;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& c, const FormMatrices& fm, int jobs, const ResultCache* cache,
                                   const std::function<void(const SweepRecord&)>& emit,
                                   const std::map<double, SweepRecord>* reuse) {
  if (fm.grid.n() != c.n) {
    throw DomainError("sweep: matrices were assembled for a different n");
  }
  const std::vector<double> grid = sweep_grid(c);
  const SpinorField trial = trial_dirichlet(fm.grid);
  const FormEnergies trial_e = energies(fm, trial);

  std::vector<SweepRecord> rows(grid.size());
  std::vector<char> done(grid.size(), 0);
  std::size_t next = 0;
  bool broken = false;
  std::mutex mu;

  for_each_index(grid.size(), jobs, [&](std::size_t i) {
    SweepRecord r;
    r.a = grid[i];
    r.b = c.constraint == bounds::Constraint::area ? 1.0 / r.a : 2.0 - r.a;
    r.m = c.m;
    r.n = c.n;
    const Geometry g{r.a, r.b, r.m};
    bool ok = true;
    try {
      const SweepRecord* old = nullptr;
      if (reuse) {
        auto it = reuse->find(r.a);
        if (it != reuse->end() && it->second.b == r.b && it->second.m == r.m && it->second.n == r.n &&
            it->second.seed == c.seed) {
          old = &it->second;
        }
      }
      if (old) {
        r = *old;
      } else {
        const PointSolve p = solve_point(fm, g, c.tol, c.seed, cache);
        r.mu = p.mu;
        r.lambda1 = std::sqrt(p.mu);
        r.thm_lower = bounds::thm_lower(r.a, r.b, r.m);
        r.sharp_lower = bounds::sharp_lower(r.a, r.b, r.m);
        r.thm_upper = bounds::thm_upper(r.a, r.b, r.m);
        r.residual = p.residual;
        r.iterations = p.iterations;
        r.wall_time_ms = c.timing ? p.wall_time_ms : 0.0;
        r.seed = p.seed;
      }
      bounds::check_sandwich(g, r.mu, quotient(trial_e, r.a, r.b, r.m));
    } catch (...) {
      ok = false;
      std::lock_guard<std::mutex> lock(mu);
      broken = true;
      throw;
    }
    std::lock_guard<std::mutex> lock(mu);
    rows[i] = r;
    done[i] = ok ? 1 : 0;
    while (!broken && next < rows.size() && done[next]) {
      if (emit) {
        emit(rows[next]);
      }
      ++next;
    }
  });
  return rows;
}

SweepSummary summarise(const std::vector<SweepRecord>& rows) {
  if (rows.empty()) {
    throw DomainError("summarise: no rows");
  }
  SweepSummary s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].mu < rows[s.argmin].mu) {
      s.argmin = i;
    }
    if (std::abs(rows[i].a - 1.0) < std::abs(rows[s.nearest_unit].a - 1.0)) {
      s.nearest_unit = i;
    }
  }
  s.min_mu = rows[s.argmin].mu;
  s.worst_drop = rows[s.nearest_unit].mu - s.min_mu;
  return s;
}

}  // namespace rectdirac::cli
