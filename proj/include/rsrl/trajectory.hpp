#pragma once

#include <vector>

namespace rsrl {

// One collected environment step. `value` and `log_prob` are recorded at
// collection time, under the pre-update policy.
struct Step {
  std::vector<double> obs;
  int action = 0;                     // discrete index
  std::vector<double> action_vec;    // continuous action (empty if discrete)
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
  bool done = false;
};

// Time-ordered rollout segment; episodes are concatenated with `done` marking
// the last step of each. `bootstrap_value` is the critic's estimate for the
// state after the final step, used when the segment was cut mid-episode.
struct Trajectory {
  std::vector<Step> steps;
  double bootstrap_value = 0.0;

  int length() const { return static_cast<int>(steps.size()); }
};

}  // namespace rsrl
