#include "rectdirac/jopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rectdirac/errors.hpp"
#include "rectdirac/parallel.hpp"

namespace rectdirac::jopt {

namespace {

constexpr double kDegenerate = 1e-12;

void check_field(const FormMatrices& fm, const SpinorField& psi) {
  if (psi.n != fm.grid.n() || psi.coeffs.size() != fm.grid.reduced_dimension()) {
    throw DomainError("field does not belong to this grid");
  }
}

void check_mass(double m) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw DomainError("mass must be finite and >= 0");
  }
}

double euler_quotient(const FormEnergies& e, double A, double B, double m) {
  return (e.k1 / (A * A) + A * A * e.k2 + (m / B) * e.trace_par + m * B * e.trace_eq) / e.mass;
}

}  // namespace

double j_value(const FormEnergies& e, double m) {
  check_mass(m);
  if (!(e.mass > 0.0)) {
    throw DomainError("J of a zero field");
  }
  const double grad = 2.0 * std::sqrt(std::max(0.0, e.k1) * std::max(0.0, e.k2));
  const double trace = 2.0 * m * std::sqrt(std::max(0.0, e.trace_par) * std::max(0.0, e.trace_eq));
  return (grad + trace) / e.mass;
}

double j_value(const FormMatrices& fm, double m, const SpinorField& psi) { return j_value(energies(fm, psi), m); }

Ratios ratios(const FormEnergies& e, double m, bool allow_zero_traces) {
  check_mass(m);
  if (!(e.mass > 0.0)) {
    throw DomainError("ratios of a zero field");
  }
  const double guard = kDegenerate * std::sqrt(e.mass);
  const double d1 = std::sqrt(std::max(0.0, e.k1)), d2 = std::sqrt(std::max(0.0, e.k2));
  const double tp = std::sqrt(std::max(0.0, e.trace_par)), te = std::sqrt(std::max(0.0, e.trace_eq));
  if (d1 < guard || d2 < guard) {
    throw DegenerateRatioError("a derivative norm vanished; the Euler weight A is undefined");
  }
  Ratios r;
  r.A = std::sqrt(d1 / d2);
  const bool both_zero = tp < guard && te < guard;
  if (tp >= guard && te >= guard) {
    r.B = tp / te;
  } else if (m == 0.0 || (allow_zero_traces && both_zero)) {
    r.B = 1.0;
  } else {
    throw DegenerateRatioError("a trace norm vanished; the Euler weight B is undefined");
  }
  return r;
}

SparseMatrix euler_form(const FormMatrices& fm, double A, double B, double m) {
  check_mass(m);
  if (!(A > 0.0) || !(B > 0.0) || !std::isfinite(A) || !std::isfinite(B)) {
    throw DomainError("Euler weights A and B must be positive");
  }
  return weighted_form(fm, {1.0 / (A * A), A * A, 0.0, m / B, m * B});
}

EulerResult euler_solve(const FormMatrices& fm, double A, double B, double m, const EulerOptions& opts) {
  const SparseMatrix q = euler_form(fm, A, B, m);
  SolverOptions so;
  so.k = opts.k;
  so.tol = opts.tol;
  so.seed = opts.seed;
  // The trace terms are non-negative, so the zero-mass rectangle (A, 1/A)
  // bound applies.
  so.shift = 0.9 * (kPi * kPi / 4.0) * (1.0 / (A * A) + A * A);
  if (opts.warm_start) {
    check_field(fm, *opts.warm_start);
    so.warm_start.push_back(opts.warm_start->coeffs);
  }
  std::optional<Rotation> rot;
  if (opts.sector) {
    rot.emplace(fm.grid);
    const Complex alpha = *opts.sector;
    const Rotation* r = &*rot;
    so.projector = [r, alpha](ComplexVector& v) { v = symmetrise(*r, v, alpha); };
  }
  const EigenSolution sol = smallest_eigenpairs(q, fm.mass, so);
  const EigenPair& p = sol.pairs.front();
  if (!(p.mu > 0.0)) {
    throw ConsistencyError("Euler eigenvalue is not positive");
  }
  return {p.mu, SpinorField{fm.grid.n(), p.vector}, p.residual, sol.iterations};
}

MinimizerState fixed_point_minimize(const FormMatrices& fm, double m, const SpinorField& init,
                                    const FixedPointOptions& opts) {
  MinimizerState s;
  fixed_point_minimize_into(fm, m, init, opts, s);
  return s;
}

void fixed_point_minimize_into(const FormMatrices& fm, double m, const SpinorField& init,
                               const FixedPointOptions& opts, MinimizerState& s) {
  check_mass(m);
  check_field(fm, init);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw DomainError("damping must lie in (0, 1]");
  }
  if (!(opts.tol > 0.0) || opts.maxit < 1) {
    throw DomainError("fixed point: tol must be positive and maxit >= 1");
  }
  std::optional<Rotation> rot;
  SpinorField psi = init;
  if (opts.sector) {
    rot.emplace(fm.grid);
    psi.coeffs = symmetrise(*rot, psi.coeffs, *opts.sector);
  }

  s = MinimizerState{};
  FormEnergies e = energies(fm, psi);
  const Ratios r0 = ratios(e, m, true);
  s.psi = psi;
  s.A = r0.A;
  s.B = r0.B;
  s.j_value = j_value(e, m);
  s.mu = euler_quotient(e, s.A, s.B, m);
  s.history.push_back({s.mu, s.A, s.B, s.j_value});

  EulerOptions eo;
  eo.tol = opts.solver_tol;
  eo.seed = opts.seed;
  eo.sector = opts.sector;
  const double theta = opts.damping;
  for (int it = 1; it <= opts.maxit; ++it) {
    eo.warm_start = s.psi;
    EulerResult er = euler_solve(fm, s.A, s.B, m, eo);
    e = energies(fm, er.psi);
    const Ratios target = ratios(e, m);
    const double A = std::pow(s.A, 1.0 - theta) * std::pow(target.A, theta);
    const double B = std::pow(s.B, 1.0 - theta) * std::pow(target.B, theta);
    const double step = std::abs(A - s.A) + (m > 0.0 ? std::abs(B - s.B) : 0.0);
    s.psi = std::move(er.psi);
    s.mu = er.mu;
    s.A = A;
    s.B = B;
    s.j_value = j_value(e, m);
    s.iteration = it;
    s.history.push_back({s.mu, s.A, s.B, s.j_value});
    if (step <= opts.tol) {
      s.converged = true;
      break;
    }
  }
}

bool is_monotone(const MinimizerState& s, double slack) {
  for (std::size_t i = 1; i < s.history.size(); ++i) {
    if (s.history[i].mu > s.history[i - 1].mu + slack) {
      return false;
    }
  }
  return true;
}

const char* to_string(StartKind k) {
  switch (k) {
    case StartKind::trial:
      return "trial_dirichlet";
    case StartKind::symmetric:
      return "symmetric_random";
    default:
      return "random";
  }
}

ConjectureEvidence probe_conjecture_symmetry(const FormMatrices& fm, double m, int restarts, std::uint64_t seed,
                                             const FixedPointOptions& opts, int jobs) {
  check_mass(m);
  if (restarts < 3) {
    throw DomainError("need at least 3 restarts");
  }
  const Rotation rot(fm.grid);
  const auto labels = rotation_labels();
  ConjectureEvidence ev;
  ev.m = m;
  ev.n = fm.grid.n();
  ev.restarts.resize(restarts);
  for_each_index(static_cast<std::size_t>(restarts), jobs, [&](std::size_t i) {
    RestartOutcome& out = ev.restarts[i];
    const int r = static_cast<int>(i);
    out.index = r;
    out.seed = seed + static_cast<std::uint64_t>(r);
    FixedPointOptions o = opts;
    o.seed = out.seed;
    SpinorField init;
    if (r == 0) {
      out.kind = StartKind::trial;
      init = trial_dirichlet(fm.grid);
    } else {
      out.kind = r % 2 == 1 ? StartKind::symmetric : StartKind::random;
      init = SpinorField{fm.grid.n(), seeded_random_vector(fm.grid.reduced_dimension(), out.seed)};
      if (out.kind == StartKind::symmetric) {
        out.sector = labels[(r / 2) % 4];
        o.sector = out.sector;
      }
    }
    try {
      fixed_point_minimize_into(fm, m, init, o, out.state);
      out.ok = true;
    } catch (const DegenerateRatioError& err) {
      out.degenerate = true;
      out.error = err.what();
    } catch (const SolverFailure& err) {
      out.error = err.what();
    }
    if (out.state.psi.coeffs.size() > 0) {
      out.deviation = verify_norm_identities(fm, out.state.psi);
    }
  });

  for (const RestartOutcome& out : ev.restarts) {
    if (out.degenerate && !out.state.history.empty()) {
      ev.degenerate_mu = std::min(ev.degenerate_mu.value_or(out.state.mu), out.state.mu);
    }
    ev.all_monotone = ev.all_monotone && is_monotone(out.state);
    if (!out.ok) {
      continue;
    }
    if (ev.best_index < 0 || out.state.mu < ev.best_mu) {
      ev.best_index = out.index;
      ev.best_mu = out.state.mu;
      ev.best_deviation = out.deviation;
    }
  }
  if (ev.best_index < 0) {
    throw DegenerateRatioError("every restart of the fixed-point iteration failed");
  }
  ev.basins_agree = std::all_of(ev.restarts.begin(), ev.restarts.end(), [&](const RestartOutcome& out) {
    return out.ok && std::abs(out.state.mu - ev.best_mu) <= 1e-6 * std::abs(ev.best_mu);
  });
  return ev;
}

ChainReport verify_theorem_idea_chain(const FormMatrices& fm, double m, const std::vector<double>& a_grid,
                                      double best_mu, double tol, int jobs) {
  check_mass(m);
  const int n = fm.grid.n();
  const int nc = n / 2;
  if (nc < 4 || nc % 2 != 0) {
    throw DomainError("chain check needs n/2 even and >= 4 for the refinement gap");
  }
  for (double a : a_grid) {
    if (!(a > 0.0)) {
      throw DomainError("chain check: side lengths must be positive");
    }
  }
  const FormMatrices coarse = assemble(Grid(nc));
  const double m2 = m * m;

  ChainReport rep;
  rep.m = m;
  rep.n = n;
  rep.best_mu = best_mu;
  rep.points.resize(a_grid.size());
  for_each_index(a_grid.size(), jobs, [&](std::size_t i) {
    ChainPoint& p = rep.points[i];
    p.a = a_grid[i];
    const double fine = lambda1_2d(fm, Geometry{p.a, 1.0 / p.a, m}).mu;
    p.mu_area = fine - m2;
    p.refine_gap = std::abs(lambda1_2d(coarse, Geometry{p.a, 1.0 / p.a, m}).mu - fine);
    p.above_best = p.mu_area >= best_mu - tol;
    if (p.a < 2.0) {
      p.mu_perimeter = lambda1_2d(fm, Geometry{p.a, 2.0 - p.a, m}).mu - m2;
      p.perimeter_ok = p.mu_perimeter >= p.mu_area - p.refine_gap;
    }
  });
  for (const ChainPoint& p : rep.points) {
    rep.area_ok = rep.area_ok && p.above_best;
    rep.perimeter_ok = rep.perimeter_ok && p.perimeter_ok;
  }

  rep.square_mu = lambda1_2d(fm, Geometry{1.0, 1.0, m}).mu - m2;
  const auto labels = rotation_labels();
  rep.sector_minima.resize(labels.size());
  for_each_index(labels.size(), jobs, [&](std::size_t i) {
    EulerOptions eo;
    eo.sector = labels[i];
    eo.warm_start = SpinorField{n, symmetrise(Rotation(fm.grid), trial_dirichlet(fm.grid).coeffs, labels[i])};
    if (eo.warm_start->coeffs.norm() == 0.0) {
      eo.warm_start.reset();
    }
    rep.sector_minima[i] = euler_solve(fm, 1.0, 1.0, m, eo).mu;
  });
  rep.symmetric_min = *std::min_element(rep.sector_minima.begin(), rep.sector_minima.end());
  rep.symmetric_gap = std::abs(rep.symmetric_min - rep.square_mu) / rep.square_mu;
  return rep;
}

}  // namespace rectdirac::jopt
