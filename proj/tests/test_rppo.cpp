#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsrl/envs/duel.hpp"
#include "rsrl/envs/gridworld.hpp"
#include "rsrl/rppo.hpp"
#include "rsrl/verify.hpp"

using namespace rsrl;

namespace {

AgentState make_grid_agent(double tau, std::uint64_t seed, int horizon = 64) {
  PolicyNet policy{{16, {32, 32}, 4, Activation::tanh},
                   {HeadKind::categorical, 4}};
  MlpSpec value{16, {32, 32}, 1, Activation::tanh};
  RppoConfig cfg;
  cfg.risk = RiskConfig::make(tau, 0.95, 0.95);
  cfg.horizon = horizon;
  cfg.minibatch_size = 32;
  cfg.learning_rate = 3e-4;
  Rng rng(seed);
  return AgentState::make(policy, value, cfg, rng);
}

}  // namespace

TEST_CASE("collect_rollout: exact horizon, episodes concatenated") {
  AgentState agent = make_grid_agent(0.5, 1);
  WindyGridworld env{GridworldConfig{}};
  Rng rng(2);
  const Trajectory traj = collect_rollout(agent, env, 130, rng);
  REQUIRE(traj.length() == 130);
  CHECK(agent.steps == 130);

  // done marks episode ends; every episode is at most 25 steps long
  int run = 0;
  for (const Step& s : traj.steps) {
    ++run;
    CHECK(run <= 25);
    if (s.done) run = 0;
  }
  // horizon-1 rollout has a bootstrap value recorded
  AgentState a2 = make_grid_agent(0.5, 3);
  WindyGridworld env2{GridworldConfig{}};
  Rng rng2(4);
  const Trajectory t2 = collect_rollout(a2, env2, 1, rng2);
  CHECK(t2.length() == 1);
  if (!t2.steps[0].done)
    CHECK(t2.bootstrap_value == a2.value_of(env2.observation()));
}

TEST_CASE("collect_rollout is deterministic under a fixed seed") {
  auto run = [] {
    AgentState agent = make_grid_agent(0.4, 11);
    WindyGridworld env{GridworldConfig{}};
    Rng rng(12);
    const Trajectory traj = collect_rollout(agent, env, 80, rng);
    std::vector<double> tape;
    for (const Step& s : traj.steps) {
      tape.push_back(s.reward);
      tape.push_back(s.log_prob);
      tape.push_back(s.value);
      tape.push_back(static_cast<double>(s.action));
    }
    return tape;
  };
  CHECK(run() == run());
}

TEST_CASE("self-play rollout: per-step rewards sum to zero") {
  PolicyNet policy{{2, {16}, 3, Activation::tanh}, {HeadKind::categorical, 3}};
  MlpSpec value{2, {16}, 1, Activation::tanh};
  RppoConfig cfg;
  cfg.risk = RiskConfig::make(0.5, 0.95, 0.95);
  cfg.horizon = 64;
  cfg.minibatch_size = 32;
  Rng arng(5);
  AgentState agent = AgentState::make(policy, value, cfg, arng);

  GridDuel game{DuelConfig{}};
  Rng orng(6);
  OpponentEnv env(game, agent.policy, agent.policy_params, orng.child(1));
  Rng rng(7);
  if (!env.in_episode()) env.reset(rng);
  for (int t = 0; t < 120; ++t) {
    const ActionSample a =
        policy_sample(agent.policy, agent.policy_params, env.observation(), rng);
    const auto r = env.step(a.action, rng);
    CHECK(env.last_rewards(0) + env.last_rewards(1) == 0.0);
    if (r.done) env.reset(rng);
  }
}

TEST_CASE("rppo_update: diagnostics ranges and target identity") {
  AgentState agent = make_grid_agent(0.7, 21);
  WindyGridworld env{GridworldConfig{}};
  Rng rng(22);
  const Trajectory traj = collect_rollout(agent, env, agent.config.horizon, rng);

  const AdvantageBatch adv = compute_advantages(traj, agent.config.risk);
  for (int t = 0; t < traj.length(); ++t)
    CHECK(adv.targets[t] == traj.steps[t].value + adv.advantages[t]);

  Rng urng(23);
  const UpdateDiagnostics diag = rppo_update(agent, traj, urng);
  CHECK(diag.clip_fraction >= 0.0);
  CHECK(diag.clip_fraction <= 1.0);
  CHECK(std::isfinite(diag.approx_kl));
  CHECK(std::isfinite(diag.policy_loss));
  CHECK(std::isfinite(diag.value_loss));
  CHECK(diag.entropy > 0.0);
}

TEST_CASE("rppo degenerates to PPO: advantages equal GAE at tau=1/2") {
  // long pre-terminal segment so the normalized mixture matches plain GAE
  Rng rng(31);
  Trajectory traj;
  const int T = 1200;
  traj.steps.resize(T);
  for (int t = 0; t < T; ++t) {
    traj.steps[t].reward = rng.uniform(-1.0, 1.0);
    traj.steps[t].value = rng.normal();
    traj.steps[t].done = t == T - 1;
  }
  RiskConfig cfg;
  cfg.tau = 0.5;
  cfg.alpha = 1.0;
  cfg.gamma = 0.99;
  cfg.lambda = 0.95;
  cfg.n_max = 800;

  const AdvantageBatch batch = compute_advantages(traj, cfg);
  // reference GAE recursion
  std::vector<double> gae(T, 0.0);
  double running = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    const Step& s = traj.steps[t];
    const double vn = s.done ? 0.0 : traj.steps[t + 1].value;
    const double delta = s.reward + cfg.gamma * vn * (s.done ? 0 : 1) - s.value;
    running = s.done ? delta : delta + cfg.gamma * cfg.lambda * running;
    gae[t] = running;
  }
  int compared = 0;
  for (int t = 0; t < T; ++t) {
    const int d = std::min(cfg.n_max, T - t);
    if (std::pow(cfg.lambda, d) > 1e-12) continue;
    CHECK(std::abs(batch.advantages[t] - gae[t]) <=
          1e-6 * (1.0 + std::abs(gae[t])));
    ++compared;
  }
  CHECK(compared > 500);
}

TEST_CASE("zero advantages: only the entropy term moves the policy") {
  AgentState agent = make_grid_agent(0.5, 41);
  // constant zero reward and zero values -> zero TD errors everywhere
  Trajectory traj;
  traj.steps.resize(agent.config.horizon);
  Rng rng(42);
  WindyGridworld env{GridworldConfig{}};
  env.reset(rng);
  for (int t = 0; t < agent.config.horizon; ++t) {
    Step& s = traj.steps[t];
    s.obs = env.observation();
    const ActionSample a =
        policy_sample(agent.policy, agent.policy_params, s.obs, rng);
    s.action = a.action;
    s.log_prob = a.log_prob;
    s.value = 0.0;
    s.reward = 0.0;
    env.step(s.action, rng);
    if (!env.in_episode()) env.reset(rng);
  }
  traj.bootstrap_value = 0.0;

  agent.config.normalize_advantages = false;
  agent.config.entropy_coef = 0.0;
  AgentState frozen = agent;
  Rng u1(43);
  rppo_update(frozen, traj, u1);
  CHECK(frozen.policy_params == agent.policy_params);  // nothing moves

  agent.config.entropy_coef = 0.01;
  Rng u2(43);
  rppo_update(agent, traj, u2);
  CHECK(agent.policy_params != frozen.policy_params);  // entropy term acts
}

TEST_CASE("clipped objective uses 1.2 * advantage when the ratio is 1.5") {
  // single sample with a controlled ratio: old_log_prob shifted by -ln(1.5)
  PolicyNet net{{1, {}, 2, Activation::identity}, {HeadKind::categorical, 2}};
  ParamVector params(net.param_count(), 0.0);
  std::vector<double> obs{1.0};
  const double lp_now = categorical_log_prob(std::vector<double>{0.0, 0.0}, 0);
  const double advantage = 2.0;
  PolicySample s{obs, 0, {}, lp_now - std::log(1.5), advantage};
  ParamVector grad(params.size(), 0.0);
  const auto stats =
      policy_loss_grad(net, params, std::vector<PolicySample>{s}, 0.2, 0.0, grad);
  CHECK(stats.loss == doctest::Approx(-1.2 * advantage).epsilon(1e-12));
  CHECK(stats.clip_fraction == 1.0);
  // saturated clip: no gradient flows
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("seeded end-to-end determinism of the diagnostics stream") {
  auto run = [] {
    AgentState agent = make_grid_agent(0.8, 51, 96);
    WindyGridworld env{GridworldConfig{}};
    Rng rng(52);
    std::vector<double> stream;
    for (int round = 0; round < 3; ++round) {
      Rng collect = rng.child(round, 0);
      Rng update = rng.child(round, 1);
      const Trajectory traj =
          collect_rollout(agent, env, agent.config.horizon, collect);
      const UpdateDiagnostics d = rppo_update(agent, traj, update);
      stream.insert(stream.end(),
                    {d.policy_loss, d.value_loss, d.entropy, d.clip_fraction,
                     d.approx_kl, d.mean_reward});
    }
    return stream;
  };
  const auto a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("non-finite loss aborts the update") {
  AgentState agent = make_grid_agent(0.5, 61);
  WindyGridworld env{GridworldConfig{}};
  Rng rng(62);
  Trajectory traj = collect_rollout(agent, env, agent.config.horizon, rng);
  traj.steps[3].value = std::nan("");  // poisons the advantages
  agent.config.normalize_advantages = false;
  Rng urng(63);
  CHECK_THROWS_AS(rppo_update(agent, traj, urng), std::runtime_error);
}
