#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsrl/advantage.hpp"
#include "rsrl/verify.hpp"

using namespace rsrl;

namespace {

RiskConfig neutral(double gamma, double lambda, int n_max = 50) {
  RiskConfig cfg;
  cfg.tau = 0.5;
  cfg.alpha = 1.0;
  cfg.gamma = gamma;
  cfg.lambda = lambda;
  cfg.n_max = n_max;
  return cfg;
}

}  // namespace

TEST_CASE("one_step_sample") {
  // tau=1/2, alpha=1: standard sample backup
  RiskConfig cfg = neutral(0.9, 0.95);
  CHECK(one_step_sample(0.3, 1.0, 0.5, cfg, false) ==
        doctest::Approx(0.5 + 0.9 * 1.0).epsilon(1e-15));
  // zero TD error leaves the value unchanged
  const RiskConfig risky = RiskConfig::make(0.8, 0.9, 0.95);
  const double v = 0.7;
  const double vn = (v - 0.2) / 0.9;
  CHECK(one_step_sample(v, vn, 0.2, risky, false) == doctest::Approx(v));
  // terminal transition, tau=0.9: delta=1, result (1/0.9)*(0.9*1) = 1
  const RiskConfig t9 = RiskConfig::make(0.9, 0.9, 0.95);
  CHECK(one_step_sample(0.0, 123.0, 1.0, t9, true) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-step hand example") {
  // r = (0, 1), V = 0, gamma ~ 1, tau=1/2: column 0 rows are (0, 1)
  Trajectory traj;
  traj.steps.resize(2);
  traj.steps[0].reward = 0.0;
  traj.steps[1].reward = 1.0;
  traj.steps[1].done = true;
  const RiskConfig cfg = neutral(0.9999999999, 0.5);
  const ReturnTable table = build_return_table(traj, cfg);
  REQUIRE(table.n_rows == 2);
  CHECK(table.depth[0] == 2);
  CHECK(table.depth[1] == 1);
  CHECK(table.at(1, 0) == doctest::Approx(0.0));
  CHECK(table.at(2, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(table.at(1, 1) == doctest::Approx(1.0));

  // d=2, lambda=0.5: weights (2/3, 1/3) -> target 1/3 at t=0
  const auto targets = lambda_returns(table, cfg);
  CHECK(targets[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("single-step episode collapses to one row") {
  Trajectory traj;
  traj.steps.resize(1);
  traj.steps[0].reward = 0.25;
  traj.steps[0].value = 0.5;
  traj.steps[0].done = true;
  const RiskConfig cfg = RiskConfig::make(0.3, 0.9, 0.7);
  const ReturnTable table = build_return_table(traj, cfg);
  CHECK(table.n_rows == 1);
  const AdvantageBatch batch = compute_advantages(traj, cfg);
  CHECK(batch.advantages[0] ==
        doctest::Approx(one_step_sample(0.5, 0.0, 0.25, cfg, true) - 0.5));
}

TEST_CASE("empty trajectory is a domain error") {
  Trajectory traj;
  CHECK_THROWS_AS(build_return_table(traj, RiskConfig::make(0.5, 0.9, 0.9)),
                  std::domain_error);
}

TEST_CASE("lambda = 0 takes the one-step row") {
  Rng rng(3);
  Trajectory traj = random_trajectory(rng, 30, 0.2);
  RiskConfig cfg = RiskConfig::make(0.35, 0.95, 0.0);
  const ReturnTable table = build_return_table(traj, cfg);
  const auto targets = lambda_returns(table, cfg);
  for (int t = 0; t < traj.length(); ++t) CHECK(targets[t] == table.at(1, t));
}

TEST_CASE("constant rows mix to the same constant") {
  ReturnTable table;
  table.n_rows = 4;
  table.length = 3;
  table.depth = {4, 4, 4};
  table.values.assign(12, 2.5);
  RiskConfig cfg = RiskConfig::make(0.5, 0.9, 0.6, 4);
  for (double v : lambda_returns(table, cfg))
    CHECK(v == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("advantages are zero when targets equal values") {
  // all TD errors zero => every table row equals V, so advantages vanish
  Trajectory traj;
  traj.steps.resize(8);
  double v = 1.0;
  const double gamma = 0.9;
  for (int t = 0; t < 8; ++t) {
    traj.steps[t].value = v;
    traj.steps[t].reward = 0.1;
    const double vn = (v - 0.1) / gamma;
    traj.steps[t].done = false;
    v = vn;
  }
  traj.bootstrap_value = v;
  const RiskConfig cfg = RiskConfig::make(0.7, gamma, 0.8);
  const AdvantageBatch batch = compute_advantages(traj, cfg);
  for (int t = 0; t < 8; ++t) {
    CHECK(batch.advantages[t] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(batch.targets[t] == traj.steps[t].value + batch.advantages[t]);
  }
}

TEST_CASE("bootstrap feeds the final cut column") {
  Trajectory traj;
  traj.steps.resize(3);
  for (auto& s : traj.steps) {
    s.reward = 0.0;
    s.value = 0.0;
  }
  traj.bootstrap_value = 2.0;
  const RiskConfig cfg = neutral(0.5, 0.9);
  const ReturnTable table = build_return_table(traj, cfg);
  // last column: r + gamma * bootstrap = 1.0
  CHECK(table.at(1, 2) == doctest::Approx(1.0));
  // full-depth entry at t=0: gamma^3 * bootstrap
  CHECK(table.at(3, 0) == doctest::Approx(0.125 * 2.0));
}

TEST_CASE("advantage suite (oracles) passes") {
  const auto results = run_advantage_checks(12345);
  for (const auto& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.passed);
  }
}

TEST_CASE("serial and parallel table builders agree bitwise") {
  Rng rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    Rng child = rng.child(rep);
    const Trajectory traj = random_trajectory(child, 700, 0.05);
    const RiskConfig cfg = RiskConfig::make(0.25, 0.97, 0.9, 64);
    const ReturnTable a = build_return_table(traj, cfg);
    const ReturnTable b = serial::build_return_table(traj, cfg);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i)
      CHECK(a.values[i] == b.values[i]);
  }
}
