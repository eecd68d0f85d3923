#pragma once

#include <vector>

#include "rsrl/rng.hpp"

namespace rsrl {

struct SpaceSpec {
  int obs_dim = 0;
  int n_actions = 0;  // discrete action count
};

// Single-agent episodic environment. The instance carries the episode state;
// callers reset, then step until `done`, then reset again.
class SingleAgentEnv {
 public:
  virtual ~SingleAgentEnv() = default;

  virtual SpaceSpec space() const = 0;
  virtual const std::vector<double>& reset(Rng& rng) = 0;
  virtual const std::vector<double>& observation() const = 0;
  virtual bool in_episode() const = 0;

  struct StepResult {
    double reward = 0.0;
    bool done = false;
  };
  // Throws std::logic_error if called after the episode ended.
  virtual StepResult step(int action, Rng& rng) = 0;
};

// Symmetric two-player simultaneous-move game. The episode terminates for
// both players at once.
class MarkovGameEnv {
 public:
  static constexpr int kNumPlayers = 2;

  virtual ~MarkovGameEnv() = default;

  virtual SpaceSpec space(int player) const = 0;
  virtual void reset(Rng& rng) = 0;
  virtual const std::vector<double>& observation(int player) const = 0;
  virtual bool in_episode() const = 0;

  struct StepResult {
    double reward[kNumPlayers] = {0.0, 0.0};
    bool done = false;
  };
  // Throws std::logic_error if called after the episode ended.
  virtual StepResult step(int action_a, int action_b, Rng& rng) = 0;
};

}  // namespace rsrl
