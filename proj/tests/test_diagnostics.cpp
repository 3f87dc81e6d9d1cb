#include <doctest.h>

#include <json.hpp>

#include "bizol/diagnostics.hpp"
#include "helpers.hpp"

using namespace bizol;

TEST_CASE("individual checks pass on an experiment-scale scenario") {
  const Scenario s = bizol::testing::experiment_scale(7);
  const double delta = 1e-3;

  {
    Rng rng(1);
    const auto r = check_prop1(s, rng, 500);
    CHECK(r.passed);
    CHECK(r.samples > 0);
    CHECK(r.max_violation <= 0.0);
  }
  {
    Rng rng(2);
    Eigen::VectorXd lambda(3);
    for (int i = 0; i < 3; ++i) lambda[i] = rng.uniform(0.0, 5.0);
    const auto r = check_estimator(s, lambda, delta, rng, 20000);
    CHECK(r.passed);
    CHECK(r.samples == 20000);
    CHECK_THROWS_AS(check_estimator(s, lambda, delta, rng, 100), std::invalid_argument);
  }
  {
    Rng rng(3);
    CHECK(check_bias(s, delta, rng, 30).passed);
  }
  {
    Rng rng(4);
    const auto r = check_smoothed_lipschitz(s, delta, rng, 30);
    CHECK(r.passed);
    CHECK(r.note.find("c=1") != std::string::npos);
  }
  {
    Rng rng(5);
    const auto r = check_fd_gradient(s, delta, rng, 30);
    CHECK(r.passed);
    CHECK(r.samples == 30);
  }
}

TEST_CASE("estimator check holds at a breakpoint") {
  // Unbiasedness is with respect to the smoothed response, which is defined
  // at kinks as well.
  const Scenario s = bizol::testing::worked_instance();
  Rng rng(6);
  const auto r = check_estimator(s, bizol::testing::vec({1.0}), 1e-2, rng, 20000);
  CHECK(r.passed);
}

TEST_CASE("checks are vacuous without devices") {
  Scenario s;
  NodeSpec node;
  node.node_id = "n0";
  node.baseline_load = 0.0;
  s.nodes.push_back(node);
  s.p_target = 0.0;
  s.rho = 1.0;
  s.lambda_lower = Eigen::VectorXd::Constant(1, 0.0);
  s.lambda_upper = Eigen::VectorXd::Constant(1, 5.0);
  REQUIRE(validate_scenario(s).empty());

  Rng rng(1);
  const auto r = check_prop1(s, rng, 100);
  CHECK(r.passed);
  CHECK(r.samples == 0);
  CHECK(!r.note.empty());
}

TEST_CASE("default suite on ten seeded scenarios is deterministic and green") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scenario s = bizol::testing::experiment_scale(seed);
    const auto reports = run_default_suite(s, 1e-3, seed);
    REQUIRE(reports.size() == 5);
    for (const auto& r : reports) {
      INFO(r.check_name, " on scenario seed ", seed);
      CHECK(r.passed);
      CHECK((r.max_violation <= 0.0) == r.passed);
    }
    if (seed < 3) {
      const auto again = run_default_suite(s, 1e-3, seed);
      CHECK(reports_to_json(reports) == reports_to_json(again));
    }
  }
}

TEST_CASE("suite filtering keeps per-check seeds") {
  const Scenario s = bizol::testing::experiment_scale(1);
  const auto all = run_default_suite(s, 1e-3, 5);
  const auto only_bias = run_suite(s, 1e-3, 5, {"bias"});
  REQUIRE(only_bias.size() == 1);
  CHECK(only_bias[0].check_name == "bias_bound");
  for (const auto& r : all) {
    if (r.check_name == "bias_bound") {
      CHECK(r.max_violation == only_bias[0].max_violation);
    }
  }
}

TEST_CASE("reports serialize to JSON") {
  const Scenario s = bizol::testing::experiment_scale(2);
  const auto reports = run_suite(s, 1e-3, 9, {"prop1", "fd"});
  const auto text = reports_to_json(reports);
  const auto parsed = nlohmann::json::parse(text);
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 2);
  for (const auto& item : parsed) {
    CHECK(item.contains("check_name"));
    CHECK(item.contains("samples"));
    CHECK(item.contains("max_violation"));
    CHECK(item.contains("threshold"));
    CHECK(item["passed"].get<bool>() == (item["max_violation"].get<double>() <= 0.0));
  }
}
