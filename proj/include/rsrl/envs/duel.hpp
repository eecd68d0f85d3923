#pragma once

#include <vector>

#include "rsrl/env.hpp"
#include "rsrl/rng.hpp"

namespace rsrl {

// Two-player sumo duel on a 1-D arena. Each step both players pick one of
// {advance, retreat, brace}; with probability `slip_prob` a player's action
// is independently replaced by a uniformly random one. A player moved past
// either arena edge is out and loses (+1 / -1); reaching the step cap is a
// 0-0 draw. Simultaneous resolution:
//   - adjacent, advance vs brace:   nothing moves (brace blocks the push)
//   - adjacent, advance vs advance: both recoil one cell away
//   - adjacent, advance vs retreat: retreater gives ground, advancer follows
//   - two apart, both advance:      collision, neither moves
//   - otherwise moves apply independently (advance closes, retreat opens)
struct DuelConfig {
  int length = 9;  // cells 0..length-1
  int start_a = 2;
  int start_b = 6;
  double slip_prob = 0.2;
  int step_cap = 50;

  void validate() const;
};

enum class DuelAction { advance = 0, retreat = 1, brace = 2 };

class GridDuel final : public MarkovGameEnv {
 public:
  explicit GridDuel(DuelConfig cfg = {});

  SpaceSpec space(int player) const override;
  void reset(Rng& rng) override;
  const std::vector<double>& observation(int player) const override {
    return obs_[player];
  }
  bool in_episode() const override { return in_episode_; }
  StepResult step(int action_a, int action_b, Rng& rng) override;

  const DuelConfig& config() const { return cfg_; }
  int position(int player) const { return pos_[player]; }
  int steps_taken() const { return steps_; }

 private:
  void encode();

  DuelConfig cfg_;
  int pos_[2] = {0, 0};
  int steps_ = 0;
  bool in_episode_ = false;
  std::vector<double> obs_[2];
};

}  // namespace rsrl
