#pragma once

#include <functional>
#include <vector>

#include "rsrl/env.hpp"
#include "rsrl/rng.hpp"

namespace rsrl {

// 4x4 windy gridworld. The agent starts next to a water band and must reach
// the flag within the step cap. Every move is followed, with probability
// `wind_prob`, by an extra one-cell shove in a uniformly random cardinal
// direction. Reaching the flag ends the episode with +1; every step that
// ends in water costs -1.
//
// Default layout (x grows right, y grows up):
//   water: the whole bottom row (0,0)..(3,0)
//   start: (0,1), flag: (3,1)
// so the shortest route runs alongside the water and longer routes stay
// clear of it.
struct GridworldConfig {
  int width = 4;
  int height = 4;
  int start_x = 0, start_y = 1;
  int flag_x = 3, flag_y = 1;
  std::vector<std::pair<int, int>> water = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  double wind_prob = 0.5;
  int step_cap = 25;

  int n_cells() const { return width * height; }
  int cell_index(int x, int y) const { return y * width + x; }
  bool is_water(int x, int y) const;
  void validate() const;
};

enum class GridAction { up = 0, down = 1, left = 2, right = 3 };

class WindyGridworld final : public SingleAgentEnv {
 public:
  explicit WindyGridworld(GridworldConfig cfg = {});

  SpaceSpec space() const override;
  const std::vector<double>& reset(Rng& rng) override;
  const std::vector<double>& observation() const override { return obs_; }
  bool in_episode() const override { return in_episode_; }
  StepResult step(int action, Rng& rng) override;

  const GridworldConfig& config() const { return cfg_; }
  int x() const { return x_; }
  int y() const { return y_; }
  int steps_taken() const { return steps_; }

 private:
  void encode();

  GridworldConfig cfg_;
  int x_ = 0, y_ = 0, steps_ = 0;
  bool in_episode_ = false;
  std::vector<double> obs_;
};

// One-hot encoding of the cell index; length width*height.
std::vector<double> gridworld_state_encoding(const GridworldConfig& cfg, int x,
                                             int y);

// Maps an observation to an action; used for evaluation rollouts.
using PolicyFn = std::function<int(const std::vector<double>& obs, Rng& rng)>;

struct VisitationMap {
  int width = 0, height = 0;
  std::vector<double> freq;   // row-major, freq[y*width+x]; sums to 1
  int episodes = 0;
  long successes = 0;         // episodes that reached the flag
  double mean_success_length = 0.0;

  double at(int x, int y) const { return freq[y * width + x]; }
};

// Occupancy frequencies over `episodes` rollouts, aggregated across all
// steps (cells visited after each transition, plus the start cell) and
// normalized to sum to one. Episode e uses the derived stream rng.child(e).
VisitationMap visitation_counts(const PolicyFn& policy, GridworldConfig cfg,
                                int episodes, Rng& rng);

}  // namespace rsrl
