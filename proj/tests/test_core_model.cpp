#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rsrl/mdp.hpp"
#include "rsrl/mdp_io.hpp"
#include "rsrl/risk_config.hpp"
#include "rsrl/rng.hpp"
#include "rsrl/verify.hpp"

using namespace rsrl;

TEST_CASE("default_alpha values") {
  CHECK(default_alpha(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(default_alpha(0.9) == doctest::Approx(1.0 / 1.8).epsilon(1e-15));
  CHECK(default_alpha(0.1) == doctest::Approx(1.0 / 1.8).epsilon(1e-15));
  CHECK_THROWS_AS(default_alpha(0.0), std::domain_error);
  CHECK_THROWS_AS(default_alpha(1.0), std::domain_error);
  CHECK_THROWS_AS(default_alpha(-0.2), std::domain_error);
}

TEST_CASE("default_alpha is symmetric around 1/2") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double tau = 1e-6 + (1.0 - 2e-6) * rng.uniform();
    CHECK(default_alpha(tau) ==
          doctest::Approx(default_alpha(1.0 - tau)).epsilon(1e-14));
  }
}

TEST_CASE("RiskConfig validation") {
  CHECK_NOTHROW(RiskConfig::make(0.3, 0.9, 0.95));
  RiskConfig bad = RiskConfig::make(0.9, 0.9, 0.5);
  bad.alpha = 0.6;  // above 1/(2*0.9)
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = RiskConfig::make(0.5, 0.9, 0.5);
  bad.lambda = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = RiskConfig::make(0.5, 0.9, 0.5);
  bad.n_max = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = RiskConfig::make(0.5, 0.9, 0.5);
  bad.gamma = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

namespace {

TabularMDP two_state_chain() {
  TabularMDP mdp(2, 1);
  mdp.outcomes(0, 0) = {{1, 1.0, 0.5}};
  mdp.make_terminal(1);
  return mdp;
}

}  // namespace

TEST_CASE("validate_mdp reports violations") {
  CHECK(validate_mdp(two_state_chain()).empty());

  TabularMDP short_row = two_state_chain();
  short_row.outcomes(0, 0) = {{1, 0.9, 0.5}};
  const auto report = validate_mdp(short_row);
  REQUIRE_FALSE(report.empty());
  CHECK(report[0].find("sum") != std::string::npos);

  TabularMDP negative = two_state_chain();
  negative.outcomes(0, 0) = {{1, 1.5, 0.0}, {0, -0.5, 0.0}};
  bool mentions_negative = false;
  for (const auto& line : validate_mdp(negative))
    mentions_negative |= line.find("negative") != std::string::npos;
  CHECK(mentions_negative);

  TabularMDP bad_terminal = two_state_chain();
  bad_terminal.outcomes(1, 0) = {{1, 1.0, 1.0}};  // self-loop with reward
  CHECK_FALSE(validate_mdp(bad_terminal).empty());
}

TEST_CASE("random MDPs satisfy the invariants") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Rng child = rng.child(i);
    const MdpSample smp = random_mdp(child);
    CHECK(validate_mdp(smp.mdp).empty());
    CHECK_NOTHROW(check_policy(smp.policy, smp.mdp));
    // induced chain rows are stochastic
    for (int s = 0; s < smp.mdp.n_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a < smp.mdp.n_actions; ++a)
        for (const auto& o : smp.mdp.outcomes(s, a))
          sum += smp.policy.probs[s][a] * o.prob;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mdp file round trip") {
  Rng rng(23);
  const MdpSample smp = random_mdp(rng);
  std::ostringstream out;
  write_mdp(out, smp.mdp);
  std::istringstream in(out.str());
  const TabularMDP back = parse_mdp(in);

  REQUIRE(back.n_states == smp.mdp.n_states);
  REQUIRE(back.n_actions == smp.mdp.n_actions);
  for (int s = 0; s < back.n_states; ++s) {
    CHECK(back.terminal[s] == smp.mdp.terminal[s]);
    for (int a = 0; a < back.n_actions; ++a) {
      const auto& lhs = smp.mdp.outcomes(s, a);
      const auto& rhs = back.outcomes(s, a);
      REQUIRE(lhs.size() == rhs.size());
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        CHECK(lhs[k].next_state == rhs[k].next_state);
        CHECK(lhs[k].prob == rhs[k].prob);
        CHECK(lhs[k].reward == rhs[k].reward);
      }
    }
  }
}

TEST_CASE("mdp parser rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_mdp(in);
  };
  CHECK_THROWS_WITH_AS(parse("t 0 0 1 1.0 0.0\n"),
                       doctest::Contains("before states"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse("states 2\nactions 1\nt 0 0 5 1.0 0.0\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse("states 2\nactions 1\nbogus 1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse(""), std::runtime_error);
  // comments and blank lines are fine
  CHECK_NOTHROW(parse("# header\nstates 2\nactions 1\n\nt 0 0 1 1.0 0.5 # move\n"));
}

TEST_CASE("rng streams are reproducible and child streams independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  (void)c.uniform();
  Rng child_before = Rng(42).child(3);
  Rng child_after = c.child(3);
  CHECK(child_before.next_u64() == child_after.next_u64());
}
