#include "rsrl/population.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace rsrl {

const PoolEntry& sample_opponent(const PolicyPool& pool, Rng& rng) {
  if (pool.size() == 0) throw std::domain_error("sample_opponent: empty pool");
  return pool.at(rng.uniform_int(static_cast<int>(pool.size())));
}

double elo_expected(double r_a, double r_b) {
  return 1.0 / (1.0 + std::pow(10.0, (r_b - r_a) / 400.0));
}

void elo_update(EloTable& table, int a, int b, double score_a) {
  if (!(score_a == 0.0 || score_a == 0.5 || score_a == 1.0))
    throw std::domain_error("elo_update: score must be 1, 0.5 or 0");
  const double ea = elo_expected(table.rating[a], table.rating[b]);
  const double eb = elo_expected(table.rating[b], table.rating[a]);
  table.rating[a] += table.k * (score_a - ea);
  table.rating[b] += table.k * ((1.0 - score_a) - eb);
}

void PopulationConfig::validate() const {
  if (size < 1) throw std::invalid_argument("population: size must be >= 1");
  if (initial_tau.size() != static_cast<std::size_t>(size))
    throw std::invalid_argument(
        "population: initial_tau must list one tau per agent");
  for (double t : initial_tau)
    if (!(t >= tau_min && t <= tau_max))
      throw std::invalid_argument("population: initial tau outside clip range");
  if (!(tau_min > 0.0 && tau_max < 1.0 && tau_min < tau_max))
    throw std::invalid_argument("population: bad tau clip range");
  if (!(exploit_threshold > 0.0))
    throw std::invalid_argument("population: exploit_threshold must be > 0");
  if (!(explore_noise >= 0.0))
    throw std::invalid_argument("population: explore_noise must be >= 0");
  if (updates_per_round < 1 || eval_games_per_pair < 0)
    throw std::invalid_argument("population: bad round structure");
}

namespace {

PoolEntry snapshot(const AgentState& agent, int id, int round) {
  return {id, round, agent.tau(), agent.policy, agent.policy_params};
}

}  // namespace

PopulationState make_population(const PolicyNet& policy, const MlpSpec& value,
                                const RppoConfig& base,
                                const PopulationConfig& cfg, Rng& rng) {
  cfg.validate();
  PopulationState pop;
  pop.config = cfg;
  pop.elo = EloTable(cfg.size, cfg.elo_initial, cfg.elo_k);
  for (int i = 0; i < cfg.size; ++i) {
    Rng agent_rng = rng.child(0x61, i);
    AgentState agent = AgentState::make(policy, value, base, agent_rng);
    agent.set_tau(cfg.initial_tau[i]);
    pop.agents.push_back(std::move(agent));
    pop.pool.append(snapshot(pop.agents.back(), i, 0));
  }
  return pop;
}

std::vector<ExploitEvent> exploit_explore(PopulationState& pop, Rng& rng) {
  const int n = static_cast<int>(pop.agents.size());
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (pop.elo.rating[i] > pop.elo.rating[best]) best = i;
  const double best_rating = pop.elo.rating[best];

  std::vector<ExploitEvent> events;
  for (int i = 0; i < n; ++i) {
    if (i == best) continue;
    if (best_rating - pop.elo.rating[i] <= pop.config.exploit_threshold)
      continue;
    AgentState& dst = pop.agents[i];
    const AgentState& src = pop.agents[best];
    dst.policy_params = src.policy_params;
    dst.value_params = src.value_params;
    dst.policy_opt.reset();  // copied parameters invalidate stale moments
    dst.value_opt.reset();
    const double copied = src.tau();
    const double noise = rng.uniform(-pop.config.explore_noise,
                                     pop.config.explore_noise);
    const double perturbed =
        std::clamp(copied + noise, pop.config.tau_min, pop.config.tau_max);
    dst.set_tau(perturbed);
    events.push_back({i, best, copied, perturbed});
  }
  return events;
}

double play_match(const PolicyNet& net_a, const ParamVector& params_a,
                  const PolicyNet& net_b, const ParamVector& params_b,
                  MarkovGameEnv& game, Rng& rng) {
  Rng env_rng = rng.child(1);
  Rng rng_a = rng.child(2);
  Rng rng_b = rng.child(3);
  game.reset(env_rng);
  MarkovGameEnv::StepResult res;
  do {
    const ActionSample a =
        policy_sample(net_a, params_a, game.observation(0), rng_a);
    const ActionSample b =
        policy_sample(net_b, params_b, game.observation(1), rng_b);
    res = game.step(a.action, b.action, env_rng);
  } while (!res.done);
  if (res.reward[0] > res.reward[1]) return 1.0;
  if (res.reward[0] < res.reward[1]) return 0.0;
  return 0.5;
}

RoundReport run_round(PopulationState& pop, const EnvFactory& make_env,
                      int workers, Rng& rng) {
  pop.config.validate();
  const int n = static_cast<int>(pop.agents.size());
  const int round = pop.round + 1;

  // Work on a copy of the agents so a failed round leaves `pop` untouched.
  std::vector<AgentState> agents = pop.agents;
  std::vector<AgentRoundStats> stats(n);
  std::vector<std::exception_ptr> errors(n);
  const int threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      AgentState& agent = agents[i];
      Rng agent_rng = rng.child(0x10000 + round, i);
      AgentRoundStats& st = stats[i];
      st.agent = i;
      double outcome_sum = 0.0;
      for (int u = 0; u < pop.config.updates_per_round; ++u) {
        Rng update_rng = agent_rng.child(0x20, u);
        Rng opp_pick = update_rng.child(1);
        const PoolEntry& opponent = sample_opponent(pop.pool, opp_pick);
        auto game = make_env();
        OpponentEnv env(*game, opponent.net, opponent.params,
                        update_rng.child(2));
        Rng collect_rng = update_rng.child(3);
        Trajectory traj =
            collect_rollout(agent, env, agent.config.horizon, collect_rng);
        for (const Step& s : traj.steps)
          if (s.done) {
            outcome_sum += env.last_outcome();
            st.train_episodes += 1;
          }
        Rng update_stream = update_rng.child(4);
        const UpdateDiagnostics d = rppo_update(agent, traj, update_stream);
        st.diagnostics.policy_loss += d.policy_loss;
        st.diagnostics.value_loss += d.value_loss;
        st.diagnostics.entropy += d.entropy;
        st.diagnostics.clip_fraction += d.clip_fraction;
        st.diagnostics.approx_kl += d.approx_kl;
        st.diagnostics.mean_reward += d.mean_reward;
        st.diagnostics.mean_advantage += d.mean_advantage;
      }
      const double inv = 1.0 / pop.config.updates_per_round;
      st.diagnostics.policy_loss *= inv;
      st.diagnostics.value_loss *= inv;
      st.diagnostics.entropy *= inv;
      st.diagnostics.clip_fraction *= inv;
      st.diagnostics.approx_kl *= inv;
      st.diagnostics.mean_reward *= inv;
      st.diagnostics.mean_advantage *= inv;
      st.train_outcome_mean =
          st.train_episodes > 0 ? outcome_sum / st.train_episodes : 0.0;
      st.tau = agent.tau();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  // Rating games: round-robin over ordered pairs, outcomes collected first,
  // ELO applied in a fixed order afterwards.
  struct Match {
    int a, b;
    double score_a;
  };
  std::vector<Match> matches;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int g = 0; g < pop.config.eval_games_per_pair; ++g)
        matches.push_back({a, b, 0.0});

  std::vector<std::exception_ptr> match_errors(matches.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long m = 0; m < static_cast<long>(matches.size()); ++m) {
    try {
      Match& match = matches[m];
      Rng match_rng = rng.child(0x30000 + round, m);
      auto game = make_env();
      match.score_a = play_match(agents[match.a].policy,
                                 agents[match.a].policy_params,
                                 agents[match.b].policy,
                                 agents[match.b].policy_params, *game,
                                 match_rng);
    } catch (...) {
      match_errors[m] = std::current_exception();
    }
  }
  for (const auto& err : match_errors)
    if (err) std::rethrow_exception(err);

  // Round-end phase, single threaded: ratings, pool snapshots, PBT.
  EloTable elo = pop.elo;
  for (const Match& m : matches) elo_update(elo, m.a, m.b, m.score_a);

  PopulationState next;
  next.config = pop.config;
  next.agents = std::move(agents);
  next.elo = std::move(elo);
  next.pool = pop.pool;
  next.round = round;
  for (int i = 0; i < n; ++i)
    next.pool.append(snapshot(next.agents[i], i, round));

  Rng explore_rng = rng.child(0x40000 + round);
  RoundReport report;
  report.round = round;
  report.exploits = exploit_explore(next, explore_rng);
  report.agents = std::move(stats);
  report.elo_after = next.elo.rating;
  report.pool_additions = n;
  for (const AgentState& a : next.agents) report.tau_after.push_back(a.tau());

  pop = std::move(next);
  return report;
}

int select_champion(const PopulationState& pop) {
  if (pop.elo.rating.empty())
    throw std::domain_error("select_champion: no ratings");
  int best = 0;
  for (int i = 1; i < static_cast<int>(pop.elo.rating.size()); ++i)
    if (pop.elo.rating[i] > pop.elo.rating[best]) best = i;
  return best;
}

}  // namespace rsrl
