// Regenerates tests/golden/oracle.json:
//   golden_oracle > tests/golden/oracle.json
// The separability values come from the dense solver at n = 32, which is
// independent of the subspace iteration used everywhere else.

#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "rectdirac/cli.hpp"
#include "rectdirac/eigsolve.hpp"
#include "rectdirac/symmetry.hpp"

using namespace rectdirac;

int main() {
  constexpr int n = 32;
  constexpr double factor = 0.5;
  const FormMatrices fm = assemble(Grid(n));
  nlohmann::json sep = nlohmann::json::object();
  nlohmann::json dense_mu = nlohmann::json::object();
  for (double m : {0.0, 1.0, 10.0}) {
    SolverOptions o;
    o.k = 6;
    o.method = SolverMethod::dense;
    const EigenResult r = lambda1_2d(fm, Geometry{1.0, 1.0, m}, o);
    const Classification c = classify_symmetry(fm, lowest_cluster(r.pairs), true);
    const Separability s = separability_residual(c.states.front().representative);
    const double ratio = std::min(s.u1.value_or(0.0), s.u2.value_or(0.0));
    const std::string key = cli::format_number(m);
    sep[key] = {{"label", cli::label_name(c.states.front().label)}, {"ratio", ratio}, {"threshold", factor * ratio}};
    dense_mu[key] = r.mu;
    std::fprintf(stderr, "m=%g mu=%.17g ratio=%.6g\n", m, r.mu, ratio);
  }
  const RefineStudy st = refine_study(Geometry{1.0, 1.0, 0.0}, {32, 64, 128});
  nlohmann::json j = {{"separability", {{"n", n}, {"method", "dense"}, {"factor", factor}, {"m", sep}}},
                      {"dense_mu_n32", dense_mu},
                      {"lambda1_extrapolated",
                       {{"a", 1.0}, {"b", 1.0}, {"m", 0.0}, {"nlist", {32, 64, 128}},
                        {"order", st.observed_order}, {"mu", st.extrapolated_mu}, {"lambda1", st.extrapolated_lambda}}}};
  std::cout << cli::dump(j);
  return 0;
}
