#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "rectdirac/cli.hpp"
#include "rectdirac/eigsolve.hpp"
#include "rectdirac/symmetry.hpp"

using namespace rectdirac;

namespace {

nlohmann::json golden() {
  std::ifstream is(RECTDIRAC_GOLDEN_DIR "/oracle.json");
  REQUIRE(is.good());
  return nlohmann::json::parse(is);
}

}  // namespace

TEST_SUITE("golden") {

TEST_CASE("sparse path reproduces the frozen dense values at n = 32") {
  const auto g = golden();
  const FormMatrices fm = assemble(Grid(32));
  for (double m : {0.0, 1.0, 10.0}) {
    CAPTURE(m);
    const double frozen = g["dense_mu_n32"][cli::format_number(m)].get<double>();
    SolverOptions o;
    o.k = 4;
    const EigenResult r = lambda1_2d(fm, Geometry{1.0, 1.0, m}, o);
    CHECK(r.mu == doctest::Approx(frozen).epsilon(1e-10));

    const auto c = classify_symmetry(fm, lowest_cluster(r.pairs), true);
    const Separability s = separability_residual(c.states.front().representative);
    const auto& entry = g["separability"]["m"][cli::format_number(m)];
    CHECK(cli::label_name(c.states.front().label) == entry["label"].get<std::string>());
    CHECK(std::min(*s.u1, *s.u2) == doctest::Approx(entry["ratio"].get<double>()).epsilon(1e-6));
  }
}

TEST_CASE("frozen extrapolation lies in the analytic window") {
  const double l = golden()["lambda1_extrapolated"]["lambda1"].get<double>();
  CHECK(l > kPi / std::sqrt(2.0));
  CHECK(l < kPi * std::sqrt(2.0));
}

}
