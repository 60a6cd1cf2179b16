#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rectdirac/cli.hpp"
#include "rectdirac/errors.hpp"

namespace rectdirac::cli {

using nlohmann::json;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_header() {
  return "a,b,m,n,mu,lambda1,thm_lower,sharp_lower,thm_upper,residual,iterations,wall_time_ms,seed";
}

std::string to_csv(const SweepRecord& r) {
  std::string s;
  for (double v : {r.a, r.b, r.m}) {
    s += format_number(v) + ",";
  }
  s += std::to_string(r.n) + ",";
  for (double v : {r.mu, r.lambda1, r.thm_lower, r.sharp_lower, r.thm_upper, r.residual}) {
    s += format_number(v) + ",";
  }
  s += std::to_string(r.iterations) + "," + format_number(r.wall_time_ms) + "," + std::to_string(r.seed);
  return s;
}

std::optional<SweepRecord> parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    f.push_back(cell);
  }
  if (f.size() != 13) {
    return std::nullopt;
  }
  try {
    std::size_t pos = 0;
    auto num = [&](const std::string& c) {
      const double v = std::stod(c, &pos);
      if (pos != c.size()) {
        throw std::invalid_argument(c);
      }
      return v;
    };
    auto integer = [&](const std::string& c) {
      const long long v = std::stoll(c, &pos);
      if (pos != c.size()) {
        throw std::invalid_argument(c);
      }
      return v;
    };
    SweepRecord r;
    r.a = num(f[0]);
    r.b = num(f[1]);
    r.m = num(f[2]);
    r.n = static_cast<int>(integer(f[3]));
    r.mu = num(f[4]);
    r.lambda1 = num(f[5]);
    r.thm_lower = num(f[6]);
    r.sharp_lower = num(f[7]);
    r.thm_upper = num(f[8]);
    r.residual = num(f[9]);
    r.iterations = static_cast<int>(integer(f[10]));
    r.wall_time_ms = num(f[11]);
    r.seed = std::stoull(f[12], &pos);
    if (pos != f[12].size()) {
      return std::nullopt;
    }
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string label_name(Complex label) {
  if (label == Complex{1.0, 0.0}) return "1";
  if (label == Complex{0.0, 1.0}) return "i";
  if (label == Complex{-1.0, 0.0}) return "-1";
  if (label == Complex{0.0, -1.0}) return "-i";
  return format_number(label.real()) + (label.imag() < 0 ? "" : "+") + format_number(label.imag()) + "i";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const bounds::BoundsReport& r) {
  json conditions = json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back({{"name", c.name}, {"holds", c.holds}, {"margin", c.margin}});
  }
  return {{"a", r.geometry.a},
          {"b", r.geometry.b},
          {"m", r.geometry.m},
          {"thm_lower", r.thm_lower},
          {"sharp_lower", r.sharp_lower},
          {"thm_upper", r.thm_upper},
          {"dirichlet", r.dirichlet},
          {"conditions", conditions}};
}

json to_json(const RefineStudy& s) {
  json levels = json::array();
  for (const auto& l : s.levels) {
    levels.push_back({{"n", l.n}, {"mu", l.mu}, {"lambda1", std::sqrt(l.mu)}, {"residual", l.residual}});
  }
  json j = {{"a", s.geometry.a}, {"b", s.geometry.b}, {"m", s.geometry.m},
            {"levels", levels},  {"monotone", s.monotone}, {"has_extrapolation", s.has_extrapolation}};
  if (s.has_extrapolation) {
    j["observed_order"] = s.observed_order;
    j["extrapolated_mu"] = s.extrapolated_mu;
    j["extrapolated_lambda1"] = s.extrapolated_lambda;
  }
  return j;
}

namespace {

json history_json(const jopt::MinimizerState& s) {
  json h = json::array();
  for (const auto& row : s.history) {
    h.push_back({row.mu, row.A, row.B, row.j_value});
  }
  return h;
}

}  // namespace

json to_json(const jopt::ConjectureEvidence& e) {
  json runs = json::array();
  for (const auto& r : e.restarts) {
    json run = {{"index", r.index},
                {"start", jopt::to_string(r.kind)},
                {"seed", r.seed},
                {"ok", r.ok},
                {"degenerate", r.degenerate},
                {"iterations", r.state.iteration},
                {"converged", r.state.converged},
                {"mu", r.state.mu},
                {"A", r.state.A},
                {"B", r.state.B},
                {"j_value", r.state.j_value},
                {"monotone", jopt::is_monotone(r.state)},
                {"d1", r.deviation.d1},
                {"d2", r.deviation.d2},
                {"history_columns", {"mu", "A", "B", "j_value"}},
                {"history", history_json(r.state)}};
    if (r.sector) {
      run["sector"] = label_name(*r.sector);
    }
    if (!r.error.empty()) {
      run["error"] = r.error;
    }
    runs.push_back(run);
  }
  json j = {{"m", e.m},
            {"n", e.n},
            {"best_mu", e.best_mu},
            {"best_index", e.best_index},
            {"best_d1", e.best_deviation.d1},
            {"best_d2", e.best_deviation.d2},
            {"all_monotone", e.all_monotone},
            {"basins_agree", e.basins_agree},
            {"restarts", runs}};
  j["degenerate_mu"] = e.degenerate_mu ? json(*e.degenerate_mu) : json(nullptr);
  return j;
}

json to_json(const jopt::ChainReport& c) {
  json points = json::array();
  for (const auto& p : c.points) {
    json q = {{"a", p.a}, {"mu_area", p.mu_area}, {"refine_gap", p.refine_gap}, {"above_best", p.above_best}};
    if (p.a < 2.0) {
      q["mu_perimeter"] = p.mu_perimeter;
      q["perimeter_ok"] = p.perimeter_ok;
    }
    points.push_back(q);
  }
  json sectors = json::object();
  const auto labels = rotation_labels();
  for (std::size_t i = 0; i < c.sector_minima.size(); ++i) {
    sectors[label_name(labels[i])] = c.sector_minima[i];
  }
  return {{"m", c.m},
          {"n", c.n},
          {"best_mu", c.best_mu},
          {"square_mu", c.square_mu},
          {"sector_minima", sectors},
          {"symmetric_min", c.symmetric_min},
          {"symmetric_gap", c.symmetric_gap},
          {"area_ok", c.area_ok},
          {"perimeter_ok", c.perimeter_ok},
          {"points", points}};
}

// ------------------------------------------------------------------ cache

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResultCache::key(const Geometry& g, int n, double tol, std::uint64_t seed) {
  return "point/v1 a=" + format_number(g.a) + " b=" + format_number(g.b) + " m=" + format_number(g.m) +
         " n=" + std::to_string(n) + " tol=" + format_number(tol) + " seed=" + std::to_string(seed);
}

namespace {

std::filesystem::path entry_path(const std::filesystem::path& dir, const std::string& key) {
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json", static_cast<unsigned long long>(fnv1a(key)));
  return dir / name;
}

}  // namespace

std::optional<PointSolve> ResultCache::load(const std::string& key) const {
  std::ifstream is(entry_path(dir_, key));
  if (!is) {
    return std::nullopt;
  }
  try {
    const json j = json::parse(is);
    if (j.at("key").get<std::string>() != key) {
      return std::nullopt;
    }
    PointSolve p;
    p.mu = j.at("mu").get<double>();
    p.residual = j.at("residual").get<double>();
    p.iterations = j.at("iterations").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.cluster_size = j.at("cluster_size").get<int>();
    p.next_gap = j.at("next_gap").get<double>();
    p.cached = true;
    return p;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void ResultCache::store(const std::string& key, const PointSolve& p) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const std::filesystem::path file = entry_path(dir_, key);
  const std::filesystem::path tmp = file.string() + ".tmp" + std::to_string(fnv1a(key + std::to_string(p.mu)));
  {
    std::ofstream os(tmp);
    if (!os) {
      return;
    }
    const json j = {{"key", key},
                    {"mu", p.mu},
                    {"residual", p.residual},
                    {"iterations", p.iterations},
                    {"seed", p.seed},
                    {"cluster_size", p.cluster_size},
                    {"next_gap", p.next_gap}};
    os << dump(j);
    if (!os) {
      std::filesystem::remove(tmp, ec);
      return;
    }
  }
  std::filesystem::rename(tmp, file, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
  }
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv(kCacheEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return ".rectdirac-cache";
}

}  // namespace rectdirac::cli
