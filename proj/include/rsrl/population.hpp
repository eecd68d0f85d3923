#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rsrl/env.hpp"
#include "rsrl/rppo.hpp"

namespace rsrl {

// Frozen policy snapshot; immutable once appended.
struct PoolEntry {
  int agent_id = 0;
  int round = 0;
  double tau = 0.5;
  PolicyNet net;
  ParamVector params;
};

class PolicyPool {
 public:
  void append(PoolEntry entry) { entries_.push_back(std::move(entry)); }
  std::size_t size() const { return entries_.size(); }
  const PoolEntry& at(std::size_t i) const { return entries_[i]; }
  const std::vector<PoolEntry>& entries() const { return entries_; }

 private:
  std::vector<PoolEntry> entries_;
};

// Uniform draw over all entries; empty pool is a domain error.
const PoolEntry& sample_opponent(const PolicyPool& pool, Rng& rng);

struct EloTable {
  std::vector<double> rating;
  double k = 32.0;

  EloTable() = default;
  EloTable(int n, double initial, double k_factor)
      : rating(n, initial), k(k_factor) {}
};

// Expected score of a against b: 1 / (1 + 10^((r_b - r_a)/400)).
double elo_expected(double r_a, double r_b);

// Symmetric update for one match; score_a must be 1 (win), 0.5 (tie), 0.
void elo_update(EloTable& table, int a, int b, double score_a);

struct PopulationConfig {
  int size = 5;
  std::vector<double> initial_tau = {0.1, 0.4, 0.5, 0.6, 0.9};
  double exploit_threshold = 500.0;  // rating gap to the best that triggers exploit
  double explore_noise = 0.2;        // tau perturbed by uniform(-noise, +noise)
  double tau_min = 0.05;
  double tau_max = 0.95;
  int updates_per_round = 2;         // RPPO updates per agent per round
  int eval_games_per_pair = 2;       // rating games per ordered pair per round
  double elo_k = 32.0;
  double elo_initial = 1000.0;

  void validate() const;
};

struct PopulationState {
  PopulationConfig config;
  std::vector<AgentState> agents;
  EloTable elo;
  PolicyPool pool;
  int round = 0;
};

// Builds the initial population (one agent per initial tau) and snapshots it
// into the pool as round 0.
PopulationState make_population(const PolicyNet& policy, const MlpSpec& value,
                                const RppoConfig& base, const PopulationConfig& cfg,
                                Rng& rng);

struct ExploitEvent {
  int agent = 0;
  int source = 0;
  double copied_tau = 0.0;
  double new_tau = 0.0;
};

// PBT step: every agent rated more than exploit_threshold below the current
// best copies the best agent's parameters and tau (optimizer state reset),
// then perturbs its tau by uniform noise, clipped to [tau_min, tau_max].
std::vector<ExploitEvent> exploit_explore(PopulationState& pop, Rng& rng);

using EnvFactory = std::function<std::unique_ptr<MarkovGameEnv>()>;

struct AgentRoundStats {
  int agent = 0;
  double tau = 0.0;
  UpdateDiagnostics diagnostics;  // averaged over the round's updates
  double train_outcome_mean = 0.0;  // mean terminal outcome from own seat
  int train_episodes = 0;
};

struct RoundReport {
  int round = 0;
  std::vector<AgentRoundStats> agents;
  std::vector<double> elo_after;
  std::vector<double> tau_after;
  std::vector<ExploitEvent> exploits;
  int pool_additions = 0;
};

// One training round: every agent collects experience against opponents
// sampled uniformly from the pool and runs RPPO updates (agents in
// parallel); then match outcomes from a round-robin of evaluation games
// update the ELO table, all agents are snapshotted into the pool, and
// exploit/explore runs. On any failure the population is left untouched.
RoundReport run_round(PopulationState& pop, const EnvFactory& make_env,
                      int workers, Rng& rng);

// Highest rating wins; ties break toward the lowest agent id.
int select_champion(const PopulationState& pop);

// Plays one game between two frozen policies on a fresh env from the
// factory; returns the score for seat a (1 win, 0.5 draw, 0 loss).
double play_match(const PolicyNet& net_a, const ParamVector& params_a,
                  const PolicyNet& net_b, const ParamVector& params_b,
                  MarkovGameEnv& game, Rng& rng);

}  // namespace rsrl
