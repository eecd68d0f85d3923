#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rsrl/advantage.hpp"
#include "rsrl/env.hpp"
#include "rsrl/neural.hpp"
#include "rsrl/risk_config.hpp"
#include "rsrl/trajectory.hpp"

namespace rsrl {

struct RppoConfig {
  RiskConfig risk;
  double clip_epsilon = 0.2;
  int update_epochs = 4;
  double entropy_coef = 0.01;
  double learning_rate = 1e-4;
  int horizon = 200;        // steps collected per update (= batch size)
  int minibatch_size = 50;
  bool normalize_advantages = true;

  void validate() const;
};

// A learning agent: networks, optimizer state, and its risk level. The tau
// stored in config.risk is the single source of truth for the agent's risk
// preference.
struct AgentState {
  PolicyNet policy;
  MlpSpec value;
  ParamVector policy_params;
  ParamVector value_params;
  AdamState policy_opt;
  AdamState value_opt;
  RppoConfig config;
  std::uint64_t steps = 0;

  static AgentState make(const PolicyNet& policy, const MlpSpec& value,
                         const RppoConfig& cfg, Rng& rng);
  double tau() const { return config.risk.tau; }
  // Replaces tau, keeping alpha at its default for the new level.
  void set_tau(double tau);
  double value_of(std::span<const double> obs) const;
};

// Runs the agent in `env` for exactly `horizon` steps, concatenating episodes
// (the env is reset whenever an episode ends) and recording value estimates
// and log-probs under the current parameters. The final bootstrap value is
// the critic's estimate of the observation after the last step.
Trajectory collect_rollout(AgentState& agent, SingleAgentEnv& env, int horizon,
                           Rng& rng);

// Adapts one seat of a two-player game to the single-agent interface by
// letting a frozen opponent policy play the other seat (opponents are part
// of the environment dynamics from the learner's perspective).
class OpponentEnv final : public SingleAgentEnv {
 public:
  OpponentEnv(MarkovGameEnv& game, PolicyNet opponent_net,
              ParamVector opponent_params, Rng opponent_rng);

  SpaceSpec space() const override;
  const std::vector<double>& reset(Rng& rng) override;
  const std::vector<double>& observation() const override;
  bool in_episode() const override;
  StepResult step(int action, Rng& rng) override;

  // outcome of the last finished episode from the learner's seat
  double last_outcome() const { return last_outcome_; }
  double last_rewards(int player) const { return last_rewards_[player]; }

 private:
  MarkovGameEnv& game_;
  PolicyNet opp_net_;
  ParamVector opp_params_;
  Rng opp_rng_;
  double last_outcome_ = 0.0;
  double last_rewards_[2] = {0.0, 0.0};
};

struct UpdateDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double mean_reward = 0.0;   // per-step mean over the trajectory
  double mean_advantage = 0.0;
};

// One RPPO round on a collected trajectory: compute expectile lambda
// advantages, then K epochs of minibatch clipped-surrogate policy updates and
// value regression toward the lambda targets. Throws std::runtime_error if a
// loss turns non-finite.
UpdateDiagnostics rppo_update(AgentState& agent, const Trajectory& traj,
                              Rng& rng);

}  // namespace rsrl
