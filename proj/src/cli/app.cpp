#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "rectdirac/cli.hpp"
#include "rectdirac/errors.hpp"
#include "rectdirac/matrix_io.hpp"

namespace rectdirac::cli {

using nlohmann::json;

namespace {

struct Options {
  double a = 1.0;
  double b = 1.0;
  std::optional<double> b_opt;
  double m = 0.0;
  int n = 64;
  double tol = 1e-10;
  std::uint64_t seed = 20211215;
  int jobs = 1;
  std::string out;
  std::string format;  ///< empty: csv for sweep, json otherwise
  bool no_cache = false;
  bool timing = false;
  int k = 6;
  // sweep
  std::string constraint = "area";
  std::optional<double> a_min, a_max;
  int steps = 21;
  std::string grid;
  bool resume = false;
  // jopt
  int restarts = 5;
  int maxit = 100;
  double damping = 1.0;
  double fp_tol = 1e-8;
  bool chain = false;
  int chain_steps = 21;
  double chain_amin = 0.25;
  double chain_amax = 4.0;
  // refine
  std::string nlist = "16,32,64,128";
  std::string config;
};

/// Where records and the human summary go.
struct Sinks {
  std::ostream* record;
  std::ostream* summary;
  std::unique_ptr<std::ofstream> file;
};

Sinks open_sinks(const Options& o, std::ostream& out, std::ostream& err, std::ios::openmode mode = std::ios::trunc) {
  Sinks s{&out, &err, nullptr};
  if (!o.out.empty()) {
    s.file = std::make_unique<std::ofstream>(o.out, std::ios::out | mode);
    if (!*s.file) {
      throw DomainError("cannot open output file " + o.out);
    }
    s.record = s.file.get();
    s.summary = &out;
  }
  return s;
}

std::optional<ResultCache> make_cache(const Options& o) {
  if (o.no_cache) {
    return std::nullopt;
  }
  return ResultCache(default_cache_dir());
}

FormMatrices matrices(const Options& o, int n) {
  std::optional<std::filesystem::path> dir;
  if (!o.no_cache) {
    dir = default_cache_dir() / "matrices";
  }
  return load_or_assemble(n, dir);
}

void check_format(const Options& o, bool csv_allowed) {
  if (o.format != "json" && !(csv_allowed && o.format == "csv")) {
    throw DomainError("--format " + o.format + " is not available for this command");
  }
}

void check_jobs(const Options& o) {
  if (o.jobs < 1) {
    throw DomainError("--jobs must be >= 1");
  }
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// key=value lines; '#' starts a comment. Values fill options the command
/// line left unset.
void apply_config(const std::string& path, CLI::App& sub, const std::vector<CLI::App*>& all) {
  std::ifstream is(path);
  if (!is) {
    throw DomainError("cannot read config file " + path);
  }
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    const std::string flag = "--" + key;
    if (key == "config") {
      throw DomainError(path + ":" + std::to_string(lineno) + ": nested config files are not supported");
    }
    CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr) {
      const bool known = std::any_of(all.begin(), all.end(), [&](CLI::App* a) {
        return a->get_option_no_throw(flag) != nullptr;
      });
      if (!known) {
        throw DomainError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
      continue;
    }
    if (opt->count() > 0) {
      continue;
    }
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------- commands

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, true);
  const Geometry g{o.a, o.b, o.m};
  validate(g);
  const FormMatrices fm = matrices(o, o.n);
  const auto cache = make_cache(o);
  const PointSolve p = solve_point(fm, g, o.tol, o.seed, cache ? &*cache : nullptr);
  const double trial_q = quotient(fm, g.a, g.b, g.m, trial_dirichlet(fm.grid));
  bounds::check_sandwich(g, p.mu, trial_q);
  const bounds::Bracket br = bounds::bracket_from(g, p.mu);

  Sinks s = open_sinks(o, out, err);
  if (o.format == "csv") {
    SweepRecord r{g.a, g.b, g.m, o.n, p.mu, std::sqrt(p.mu), bounds::thm_lower(g.a, g.b, g.m),
                  bounds::sharp_lower(g.a, g.b, g.m), bounds::thm_upper(g.a, g.b, g.m), p.residual, p.iterations,
                  o.timing ? p.wall_time_ms : 0.0, p.seed};
    *s.record << csv_header() << "\n" << to_csv(r) << "\n";
  } else {
    json j = {{"command", "solve"},
              {"a", g.a},
              {"b", g.b},
              {"m", g.m},
              {"n", o.n},
              {"tol", o.tol},
              {"seed", p.seed},
              {"mu", p.mu},
              {"lambda1", std::sqrt(p.mu)},
              {"residual", p.residual},
              {"iterations", p.iterations},
              {"cluster_size", p.cluster_size},
              {"next_gap", p.next_gap},
              {"thm_lower", bounds::thm_lower(g.a, g.b, g.m)},
              {"sharp_lower", bounds::sharp_lower(g.a, g.b, g.m)},
              {"thm_upper", bounds::thm_upper(g.a, g.b, g.m)},
              {"trial_quotient", trial_q},
              {"bracket", {{"lower", br.lower}, {"upper", br.upper}}}};
    if (o.timing) {
      j["wall_time_ms"] = p.wall_time_ms;
    }
    *s.record << dump(j);
  }
  *s.summary << "lambda1(a=" << format_number(g.a) << ", b=" << format_number(g.b) << ", m=" << format_number(g.m)
             << ") = " << format_number(std::sqrt(p.mu)) << " at n=" << o.n << " (residual " << p.residual
             << ", cluster " << p.cluster_size << ")\n"
             << "lambda1^2 in [" << format_number(br.lower) << ", " << format_number(br.upper) << "]\n";
  return kExitOk;
}

std::map<double, SweepRecord> read_resume(const std::string& path) {
  std::map<double, SweepRecord> rows;
  std::ifstream is(path);
  std::string line;
  if (!is || !std::getline(is, line) || line != csv_header()) {
    return rows;
  }
  while (std::getline(is, line)) {
    if (auto r = parse_csv_row(line)) {
      rows[r->a] = *r;
    }
  }
  return rows;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  check_jobs(o);
  if (o.format != "csv" && o.format != "json") {
    throw DomainError("--format must be csv or json");
  }
  SweepConfig c;
  const auto constraint = bounds::parse_constraint(o.constraint);
  if (!constraint) {
    throw DomainError("--constraint must be area or perimeter");
  }
  c.constraint = *constraint;
  const bool area = c.constraint == bounds::Constraint::area;
  c.m = o.m;
  c.a_min = o.a_min.value_or(area ? 0.25 : 0.4);
  c.a_max = o.a_max.value_or(area ? 4.0 : 1.6);
  c.steps = o.steps;
  c.n = o.n;
  c.tol = o.tol;
  c.seed = o.seed;
  c.timing = o.timing;
  if (!o.grid.empty()) {
    if (o.grid != "log" && o.grid != "linear") {
      throw DomainError("--grid must be log or linear");
    }
    c.log_grid = o.grid == "log";
  }
  validate(Geometry{1.0, 1.0, c.m});
  sweep_grid(c);

  std::map<double, SweepRecord> reuse;
  if (o.resume) {
    if (o.out.empty() || o.format != "csv") {
      throw DomainError("--resume needs --out with csv format");
    }
    reuse = read_resume(o.out);
  }
  const FormMatrices fm = matrices(o, o.n);
  const auto cache = make_cache(o);
  Sinks s = open_sinks(o, out, err);
  const bool csv = o.format == "csv";
  if (csv) {
    *s.record << csv_header() << "\n" << std::flush;
  }
  std::function<void(const SweepRecord&)> emit;
  if (csv) {
    emit = [&s](const SweepRecord& r) { *s.record << to_csv(r) << "\n" << std::flush; };
  }
  const std::vector<SweepRecord> rows =
      run_sweep(c, fm, o.jobs, cache ? &*cache : nullptr, emit, o.resume ? &reuse : nullptr);
  const SweepSummary sum = summarise(rows);
  if (!csv) {
    json jr = json::array();
    for (const SweepRecord& r : rows) {
      json row = {{"a", r.a},
                  {"b", r.b},
                  {"m", r.m},
                  {"n", r.n},
                  {"mu", r.mu},
                  {"lambda1", r.lambda1},
                  {"thm_lower", r.thm_lower},
                  {"sharp_lower", r.sharp_lower},
                  {"thm_upper", r.thm_upper},
                  {"residual", r.residual},
                  {"iterations", r.iterations},
                  {"wall_time_ms", r.wall_time_ms},
                  {"seed", r.seed}};
      jr.push_back(row);
    }
    *s.record << dump({{"command", "sweep"},
                       {"constraint", bounds::to_string(c.constraint)},
                       {"m", c.m},
                       {"n", c.n},
                       {"rows", jr},
                       {"argmin_a", rows[sum.argmin].a},
                       {"argmin_mu", sum.min_mu},
                       {"nearest_unit_a", rows[sum.nearest_unit].a},
                       {"square_is_argmin", sum.argmin == sum.nearest_unit}});
  }
  const SweepRecord& best = rows[sum.argmin];
  *s.summary << bounds::to_string(c.constraint) << " sweep, m=" << format_number(c.m) << ", n=" << c.n << ", "
             << rows.size() << " points: argmin at a=" << format_number(best.a) << " (b=" << format_number(best.b)
             << ", mu=" << format_number(best.mu) << "); grid point nearest a=1 is a="
             << format_number(rows[sum.nearest_unit].a) << (sum.argmin == sum.nearest_unit ? " (argmin)" : "")
             << "\nThis is numerical evidence on a finite grid at fixed n, not a proof.\n";
  return kExitOk;
}

int cmd_bounds(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, false);
  const bounds::BoundsReport r = bounds::report(Geometry{o.a, o.b, o.m});
  Sinks s = open_sinks(o, out, err);
  *s.record << dump(to_json(r));
  *s.summary << "thm_lower=" << format_number(r.thm_lower) << " sharp_lower=" << format_number(r.sharp_lower)
             << " thm_upper=" << format_number(r.thm_upper) << "\n";
  for (const auto& c : r.conditions) {
    *s.summary << "  " << c.name << ": " << (c.holds ? "true" : "false") << " (margin " << format_number(c.margin)
               << ")\n";
  }
  return kExitOk;
}

int cmd_symmetry(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, false);
  const double b = o.b_opt.value_or(o.a);
  const Geometry g{o.a, b, o.m};
  validate(g);
  if (o.k < 1) {
    throw DomainError("--k must be >= 1");
  }
  const bool square = g.a == g.b;
  const FormMatrices fm = matrices(o, o.n);
  SolverOptions so;
  so.k = o.k;
  so.tol = o.tol;
  so.seed = o.seed;
  const EigenResult r = lambda1_2d(fm, g, so);
  const std::vector<EigenPair> cluster = lowest_cluster(r.pairs);
  if (static_cast<int>(cluster.size()) == o.k) {
    throw SymmetryResolutionError("lowest cluster fills all " + std::to_string(o.k) +
                                  " computed eigenpairs; increase --k");
  }
  const Classification cls = classify_symmetry(fm, cluster, square);

  json mus = json::array();
  for (const EigenPair& p : r.pairs) {
    mus.push_back(p.mu);
  }
  json states = json::array();
  for (const ClassifiedState& st : cls.states) {
    const NormDeviation d = verify_norm_identities(fm, st.representative);
    const Separability sep = separability_residual(st.representative);
    states.push_back({{"label", label_name(st.label)},
                      {"eigenvalue", complex_json(st.eigenvalue)},
                      {"label_error", st.label_error},
                      {"residual", st.residual},
                      {"d1", d.d1},
                      {"d2", d.d2},
                      {"separability_u1", sep.u1 ? json(*sep.u1) : json(nullptr)},
                      {"separability_u2", sep.u2 ? json(*sep.u2) : json(nullptr)}});
  }
  Sinks s = open_sinks(o, out, err);
  *s.record << dump({{"command", "symmetry"},
                     {"a", g.a},
                     {"b", g.b},
                     {"m", g.m},
                     {"n", o.n},
                     {"k", o.k},
                     {"seed", o.seed},
                     {"operator", square ? "R" : "R^2"},
                     {"eigenvalues", mus},
                     {"cluster_size", cluster.size()},
                     {"spread", cls.spread},
                     {"invariance", cls.invariance},
                     {"form_invariance", commutation_check(fm, g.a, g.b, g.m, square ? 1 : 2, 8, o.seed)},
                     {"states", states}});
  *s.summary << "lowest cluster: " << cluster.size() << " state(s) at mu=" << format_number(r.mu) << ", "
             << (square ? "R" : "R^2") << " labels:";
  for (const ClassifiedState& st : cls.states) {
    *s.summary << " " << label_name(st.label);
  }
  *s.summary << "\n";
  return kExitOk;
}

int cmd_jopt(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, false);
  check_jobs(o);
  const FormMatrices fm = matrices(o, o.n);
  jopt::FixedPointOptions fo;
  fo.damping = o.damping;
  fo.tol = o.fp_tol;
  fo.maxit = o.maxit;
  fo.solver_tol = o.tol;
  const jopt::ConjectureEvidence ev = jopt::probe_conjecture_symmetry(fm, o.m, o.restarts, o.seed, fo, o.jobs);
  json j = {{"command", "jopt"}, {"seed", o.seed}, {"evidence", to_json(ev)}};
  j["note"] = "symmetry deviations of the best minimiser are reported as evidence only";
  std::optional<jopt::ChainReport> chain;
  if (o.chain) {
    SweepConfig c;
    c.a_min = o.chain_amin;
    c.a_max = o.chain_amax;
    c.steps = o.chain_steps;
    c.log_grid = true;
    chain = jopt::verify_theorem_idea_chain(fm, o.m, sweep_grid(c), ev.best_mu, 1e-8, o.jobs);
    j["chain"] = to_json(*chain);
  }
  Sinks s = open_sinks(o, out, err);
  *s.record << dump(j);
  *s.summary << "J fixed point, m=" << format_number(o.m) << ", n=" << o.n << ": best mu=" << format_number(ev.best_mu)
             << " (restart " << ev.best_index << ", d1=" << ev.best_deviation.d1 << ", d2=" << ev.best_deviation.d2
             << "), monotone=" << (ev.all_monotone ? "yes" : "no") << ", basins agree=" << (ev.basins_agree ? "yes" : "no")
             << "\n";
  if (ev.degenerate_mu) {
    *s.summary << "degenerate runs stopped at mu=" << format_number(*ev.degenerate_mu) << "\n";
  }
  if (chain) {
    *s.summary << "chain: area " << (chain->area_ok ? "ok" : "violated") << ", perimeter "
               << (chain->perimeter_ok ? "ok" : "violated") << ", symmetric gap " << chain->symmetric_gap << "\n";
  }
  return kExitOk;
}

std::vector<int> parse_nlist(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t pos = 0;
    int n = 0;
    try {
      n = std::stoi(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (item.empty() || pos != item.size()) {
      throw DomainError("--nlist must be a comma-separated list of integers");
    }
    v.push_back(n);
  }
  return v;
}

int cmd_refine(const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o, false);
  const RefineStudy st = refine_study(Geometry{o.a, o.b, o.m}, parse_nlist(o.nlist), o.tol);
  Sinks s = open_sinks(o, out, err);
  json j = to_json(st);
  j["command"] = "refine";
  *s.record << dump(j);
  for (const auto& l : st.levels) {
    *s.summary << "n=" << l.n << " mu=" << format_number(l.mu) << "\n";
  }
  *s.summary << "monotone: " << (st.monotone ? "yes" : "no");
  if (st.has_extrapolation) {
    *s.summary << ", extrapolated lambda1=" << format_number(st.extrapolated_lambda) << " (order "
               << st.observed_order << ")";
  }
  *s.summary << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o, bool with_b = true) {
  sub->add_option("--a", o.a, "side length along x1")->capture_default_str();
  if (with_b) {
    sub->add_option("--b", o.b, "side length along x2")->capture_default_str();
  }
  sub->add_option("--m", o.m, "mass")->capture_default_str();
  sub->add_option("--n", o.n, "cells per axis (even, >= 4)")->capture_default_str();
  sub->add_option("--tol", o.tol, "relative eigen-residual tolerance")->capture_default_str();
  sub->add_option("--seed", o.seed, "seed of the start vectors")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  sub->add_option("--out", o.out, "write the record to this file");
  sub->add_option("--format", o.format, "json or csv (default csv for sweep, json otherwise)");
  sub->add_flag("--no-cache", o.no_cache, "bypass the result and matrix caches");
  sub->add_flag("--timing", o.timing, "record wall times (outputs are then not reproducible)");
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rectdirac: lowest eigenvalue of the infinite-mass Dirac operator on rectangles"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "key=value file; command-line flags take precedence");

  auto* solve = app.add_subcommand("solve", "discrete lambda_1 at one parameter point");
  add_common(solve, o);

  auto* sweep = app.add_subcommand("sweep", "lambda_1 along the area (a, 1/a) or perimeter (a, 2-a) family");
  add_common(sweep, o, false);
  sweep->add_option("--constraint", o.constraint, "area or perimeter")->capture_default_str();
  sweep->add_option("--amin", o.a_min, "smallest a (default 0.25 area, 0.4 perimeter)");
  sweep->add_option("--amax", o.a_max, "largest a (default 4 area, 1.6 perimeter)");
  sweep->add_option("--steps", o.steps, "grid points")->capture_default_str();
  sweep->add_option("--grid", o.grid, "log or linear (default log for area, linear for perimeter)");
  sweep->add_flag("--resume", o.resume, "reuse finished rows of an existing --out CSV");

  auto* bnd = app.add_subcommand("bounds", "closed-form bounds and region conditions");
  add_common(bnd, o);

  auto* sym = app.add_subcommand("symmetry", "rotation classification of the lowest cluster");
  add_common(sym, o, false);
  sym->add_option("--b", o.b_opt, "side length along x2 (default: a, the square)");
  sym->add_option("--k", o.k, "eigenpairs to compute")->capture_default_str();

  auto* jo = app.add_subcommand("jopt", "Euler fixed-point minimisation of J");
  add_common(jo, o, false);
  jo->add_option("--restarts", o.restarts, "number of starts (>= 3)")->capture_default_str();
  jo->add_option("--maxit", o.maxit, "fixed-point iterations per start")->capture_default_str();
  jo->add_option("--damping", o.damping, "ratio update exponent in (0, 1]")->capture_default_str();
  jo->add_option("--fp-tol", o.fp_tol, "stop when |dA| + |dB| is below this")->capture_default_str();
  jo->add_flag("--chain", o.chain, "also compare against rectangles on a log a-grid");
  jo->add_option("--chain-steps", o.chain_steps, "points of the chain a-grid")->capture_default_str();
  jo->add_option("--chain-amin", o.chain_amin, "smallest a of the chain")->capture_default_str();
  jo->add_option("--chain-amax", o.chain_amax, "largest a of the chain")->capture_default_str();

  auto* ref = app.add_subcommand("refine", "refinement study with Richardson extrapolation");
  add_common(ref, o);
  ref->add_option("--nlist", o.nlist, "nested grid sizes, comma separated")->capture_default_str();

  std::vector<CLI::App*> subs = {solve, sweep, bnd, sym, jo, ref};
  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitArgument;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (!o.config.empty()) {
    apply_config(o.config, *chosen, subs);
  }
  if (o.format.empty()) {
    o.format = chosen == sweep ? "csv" : "json";
  }
  if (chosen == solve) return cmd_solve(o, out, err);
  if (chosen == sweep) return cmd_sweep(o, out, err);
  if (chosen == bnd) return cmd_bounds(o, out, err);
  if (chosen == sym) return cmd_symmetry(o, out, err);
  if (chosen == jo) return cmd_jopt(o, out, err);
  return cmd_refine(o, out, err);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << " (best mu " << e.best_mu() << ", residual " << e.best_residual()
        << ")\n";
    return kExitSolver;
  } catch (const DegenerateRatioError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SymmetryResolutionError& e) {
    err << "symmetry resolution failure: " << e.what() << "\n";
    return kExitSymmetry;
  } catch (const ConsistencyError& e) {
    err << "internal consistency violation: " << e.what() << "\n";
    return kExitConsistency;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitArgument;
  }
}

}  // namespace rectdirac::cli
