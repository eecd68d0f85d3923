#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsrl/expectile_dp.hpp"
#include "rsrl/mdp.hpp"
#include "rsrl/rng.hpp"
#include "rsrl/trajectory.hpp"

namespace rsrl {

struct MdpSample {
  TabularMDP mdp;
  TabularPolicy policy;
  double gamma = 0.9;
};

// Random MDP with <= max_states states, <= max_actions actions, rewards in
// [-1, 1]; roughly half the draws contain absorbing terminal states. gamma
// cycles over {0.8, 0.9, 0.95}.
MdpSample random_mdp(Rng& rng, int max_states = 10, int max_actions = 3);

// One nonterminal state, one action, two equiprobable transitions into a
// terminal state with rewards 1 and 0. The expectile fixed point at the
// start state is tau in closed form.
MdpSample bernoulli_bandit(double gamma = 0.9);

// Synthetic trajectory with random rewards/values and geometric episode
// cuts; the last segment may end mid-episode with a bootstrap value.
Trajectory random_trajectory(Rng& rng, int length, double episode_end_prob);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;  // first failure, or a summary statistic
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int n_mdps = 100;           // checks 1-3 and 7
  int multistep_mdps = 25;    // checks 4-6 (each solve iterates n_terms sweeps)
  bool inject_bad_operator = false;  // test hook: corrupt the contraction check
};

// Oracle suite for the operator propositions; one result per check:
//   1 contraction, 2 monotonicity, 3 sandwich + limits (incl. the bandit
//   closed form), 4 multi-step contraction, 5 multi-step monotonicity,
//   6 multi-step fixed-point identity, 7 deterministic invariance.
std::vector<CheckResult> run_proposition_checks(const VerifyOptions& opt);

// Sample-operator suite: n-step table vs. brute force at tau=1/2, lambda
// weight normalization, triangle shape, GAE agreement on long segments, and
// target monotonicity in tau.
std::vector<CheckResult> run_advantage_checks(std::uint64_t seed);

}  // namespace rsrl
