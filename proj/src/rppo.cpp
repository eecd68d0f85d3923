#include "rsrl/rppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rsrl {

void RppoConfig::validate() const {
  risk.validate();
  if (!(clip_epsilon > 0.0))
    throw std::invalid_argument("RppoConfig: clip_epsilon must be positive");
  if (update_epochs < 1)
    throw std::invalid_argument("RppoConfig: update_epochs must be >= 1");
  if (horizon < 1)
    throw std::invalid_argument("RppoConfig: horizon must be >= 1");
  if (minibatch_size < 1 || minibatch_size > horizon)
    throw std::invalid_argument(
        "RppoConfig: minibatch_size must lie in [1, horizon]");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("RppoConfig: learning_rate must be positive");
}

AgentState AgentState::make(const PolicyNet& policy, const MlpSpec& value,
                            const RppoConfig& cfg, Rng& rng) {
  cfg.validate();
  policy.validate();
  value.validate();
  if (value.output_dim != 1)
    throw std::invalid_argument("AgentState: value net must output a scalar");
  AgentState agent;
  agent.policy = policy;
  agent.value = value;
  Rng policy_rng = rng.child(1);
  Rng value_rng = rng.child(2);
  agent.policy_params = init_policy_params(policy, policy_rng);
  agent.value_params = init_mlp_params(value, value_rng);
  agent.policy_opt = AdamState(static_cast<int>(agent.policy_params.size()));
  agent.value_opt = AdamState(static_cast<int>(agent.value_params.size()));
  agent.config = cfg;
  return agent;
}

void AgentState::set_tau(double tau) {
  config.risk.tau = tau;
  config.risk.alpha = default_alpha(tau);
  config.risk.validate();
}

double AgentState::value_of(std::span<const double> obs) const {
  double v = 0.0;
  mlp_forward(value, value_params, obs, std::span<double>(&v, 1));
  return v;
}

Trajectory collect_rollout(AgentState& agent, SingleAgentEnv& env, int horizon,
                           Rng& rng) {
  if (horizon < 1)
    throw std::invalid_argument("collect_rollout: horizon must be >= 1");
  Trajectory traj;
  traj.steps.reserve(horizon);
  if (!env.in_episode()) env.reset(rng);
  for (int t = 0; t < horizon; ++t) {
    Step step;
    step.obs = env.observation();
    const ActionSample a =
        policy_sample(agent.policy, agent.policy_params, step.obs, rng);
    step.action = a.action;
    step.action_vec = a.action_vec;
    step.log_prob = a.log_prob;
    step.value = agent.value_of(step.obs);
    const auto r = env.step(step.action, rng);
    step.reward = r.reward;
    step.done = r.done;
    traj.steps.push_back(std::move(step));
    if (r.done && t + 1 < horizon) env.reset(rng);
  }
  traj.bootstrap_value =
      traj.steps.back().done ? 0.0 : agent.value_of(env.observation());
  agent.steps += static_cast<std::uint64_t>(horizon);
  return traj;
}

OpponentEnv::OpponentEnv(MarkovGameEnv& game, PolicyNet opponent_net,
                         ParamVector opponent_params, Rng opponent_rng)
    : game_(game),
      opp_net_(std::move(opponent_net)),
      opp_params_(std::move(opponent_params)),
      opp_rng_(opponent_rng) {}

SpaceSpec OpponentEnv::space() const { return game_.space(0); }

const std::vector<double>& OpponentEnv::reset(Rng& rng) {
  game_.reset(rng);
  return game_.observation(0);
}

const std::vector<double>& OpponentEnv::observation() const {
  return game_.observation(0);
}

bool OpponentEnv::in_episode() const { return game_.in_episode(); }

SingleAgentEnv::StepResult OpponentEnv::step(int action, Rng& rng) {
  const ActionSample opp = policy_sample(opp_net_, opp_params_,
                                         game_.observation(1), opp_rng_);
  const auto r = game_.step(action, opp.action, rng);
  last_rewards_[0] = r.reward[0];
  last_rewards_[1] = r.reward[1];
  if (r.done) last_outcome_ = r.reward[0];
  return {r.reward[0], r.done};
}

UpdateDiagnostics rppo_update(AgentState& agent, const Trajectory& traj,
                              Rng& rng) {
  agent.config.validate();
  const int T = traj.length();
  if (T == 0) throw std::domain_error("rppo_update: empty trajectory");

  AdvantageBatch adv = compute_advantages(traj, agent.config.risk);

  UpdateDiagnostics diag;
  for (int t = 0; t < T; ++t) {
    diag.mean_reward += traj.steps[t].reward;
    diag.mean_advantage += adv.advantages[t];
  }
  diag.mean_reward /= T;
  diag.mean_advantage /= T;

  std::vector<double> train_adv = adv.advantages;
  if (agent.config.normalize_advantages && T > 1) {
    double mean = 0.0;
    for (double a : train_adv) mean += a;
    mean /= T;
    double var = 0.0;
    for (double a : train_adv) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / T);
    for (double& a : train_adv) a = (a - mean) / (stddev + 1e-8);
  }

  std::vector<int> order(T);
  std::iota(order.begin(), order.end(), 0);

  const AdamConfig adam{agent.config.learning_rate, 0.9, 0.999, 1e-8};
  ParamVector pgrad(agent.policy_params.size());
  ParamVector vgrad(agent.value_params.size());
  std::vector<PolicySample> pbatch;
  std::vector<ValueSample> vbatch;

  int updates = 0;
  for (int epoch = 0; epoch < agent.config.update_epochs; ++epoch) {
    // Fisher-Yates under the agent's stream
    for (int i = T - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
    for (int start = 0; start < T; start += agent.config.minibatch_size) {
      const int end = std::min(start + agent.config.minibatch_size, T);
      pbatch.clear();
      vbatch.clear();
      for (int i = start; i < end; ++i) {
        const Step& s = traj.steps[order[i]];
        pbatch.push_back({s.obs, s.action, s.action_vec, s.log_prob,
                          train_adv[order[i]]});
        vbatch.push_back({s.obs, adv.targets[order[i]]});
      }

      std::fill(pgrad.begin(), pgrad.end(), 0.0);
      const PolicyLossStats ps = policy_loss_grad(
          agent.policy, agent.policy_params, pbatch, agent.config.clip_epsilon,
          agent.config.entropy_coef, pgrad);
      std::fill(vgrad.begin(), vgrad.end(), 0.0);
      const double vloss =
          value_loss_grad(agent.value, agent.value_params, vbatch, vgrad);

      if (!std::isfinite(ps.loss) || !std::isfinite(vloss))
        throw std::runtime_error("rppo_update: non-finite loss");

      adam_step(agent.policy_params, pgrad, agent.policy_opt, adam);
      adam_step(agent.value_params, vgrad, agent.value_opt, adam);

      diag.policy_loss += ps.loss;
      diag.value_loss += vloss;
      diag.entropy += ps.entropy;
      diag.clip_fraction += ps.clip_fraction;
      diag.approx_kl += ps.approx_kl;
      ++updates;
    }
  }
  diag.policy_loss /= updates;
  diag.value_loss /= updates;
  diag.entropy /= updates;
  diag.clip_fraction /= updates;
  diag.approx_kl /= updates;
  return diag;
}

}  // namespace rsrl
