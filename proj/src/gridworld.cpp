#include "rsrl/envs/gridworld.hpp"

#include <algorithm>
#include <stdexcept>

namespace rsrl {

bool GridworldConfig::is_water(int x, int y) const {
  return std::find(water.begin(), water.end(), std::make_pair(x, y)) !=
         water.end();
}

void GridworldConfig::validate() const {
  if (width < 2 || height < 2)
    throw std::invalid_argument("gridworld: grid must be at least 2x2");
  auto in_bounds = [&](int x, int y) {
    return x >= 0 && x < width && y >= 0 && y < height;
  };
  if (!in_bounds(start_x, start_y) || !in_bounds(flag_x, flag_y))
    throw std::invalid_argument("gridworld: start/flag out of bounds");
  for (auto [x, y] : water)
    if (!in_bounds(x, y)) throw std::invalid_argument("gridworld: water out of bounds");
  if (is_water(flag_x, flag_y))
    throw std::invalid_argument("gridworld: flag must not be in water");
  if (start_x == flag_x && start_y == flag_y)
    throw std::invalid_argument("gridworld: start equals flag");
  if (!(wind_prob >= 0.0 && wind_prob <= 1.0))
    throw std::invalid_argument("gridworld: wind_prob must lie in [0,1]");
  if (step_cap < 1) throw std::invalid_argument("gridworld: step_cap must be >= 1");
}

WindyGridworld::WindyGridworld(GridworldConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  obs_.resize(cfg_.n_cells(), 0.0);
}

SpaceSpec WindyGridworld::space() const { return {cfg_.n_cells(), 4}; }

const std::vector<double>& WindyGridworld::reset(Rng&) {
  x_ = cfg_.start_x;
  y_ = cfg_.start_y;
  steps_ = 0;
  in_episode_ = true;
  encode();
  return obs_;
}

void WindyGridworld::encode() {
  std::fill(obs_.begin(), obs_.end(), 0.0);
  obs_[cfg_.cell_index(x_, y_)] = 1.0;
}

namespace {
// dx, dy per GridAction: up, down, left, right
constexpr int kDx[4] = {0, 0, -1, 1};
constexpr int kDy[4] = {1, -1, 0, 0};
}  // namespace

SingleAgentEnv::StepResult WindyGridworld::step(int action, Rng& rng) {
  if (!in_episode_)
    throw std::logic_error("gridworld: step after episode end");
  if (action < 0 || action >= 4)
    throw std::invalid_argument("gridworld: action out of range");

  x_ = std::clamp(x_ + kDx[action], 0, cfg_.width - 1);
  y_ = std::clamp(y_ + kDy[action], 0, cfg_.height - 1);
  if (rng.bernoulli(cfg_.wind_prob)) {
    const int w = rng.uniform_int(4);
    x_ = std::clamp(x_ + kDx[w], 0, cfg_.width - 1);
    y_ = std::clamp(y_ + kDy[w], 0, cfg_.height - 1);
  }
  ++steps_;

  StepResult res;
  if (x_ == cfg_.flag_x && y_ == cfg_.flag_y) {
    res.reward = 1.0;
    res.done = true;
  } else if (cfg_.is_water(x_, y_)) {
    res.reward = -1.0;
  }
  if (steps_ >= cfg_.step_cap) res.done = true;
  in_episode_ = !res.done;
  encode();
  return res;
}

std::vector<double> gridworld_state_encoding(const GridworldConfig& cfg, int x,
                                             int y) {
  std::vector<double> obs(cfg.n_cells(), 0.0);
  obs[cfg.cell_index(x, y)] = 1.0;
  return obs;
}

VisitationMap visitation_counts(const PolicyFn& policy, GridworldConfig cfg,
                                int episodes, Rng& rng) {
  if (episodes < 1)
    throw std::invalid_argument("visitation_counts: episodes must be >= 1");
  cfg.validate();

  VisitationMap map;
  map.width = cfg.width;
  map.height = cfg.height;
  map.episodes = episodes;
  std::vector<long> counts(cfg.n_cells(), 0);
  long success_steps = 0;
  long successes = 0;

#pragma omp parallel for schedule(static) \
    reduction(+ : successes, success_steps)
  for (int e = 0; e < episodes; ++e) {
    Rng ep_rng = rng.child(e);
    WindyGridworld env(cfg);
    env.reset(ep_rng);
    std::vector<long> local(cfg.n_cells(), 0);
    local[cfg.cell_index(env.x(), env.y())]++;
    bool done = false;
    bool reached = false;
    while (!done) {
      const int a = policy(env.observation(), ep_rng);
      const auto r = env.step(a, ep_rng);
      local[cfg.cell_index(env.x(), env.y())]++;
      done = r.done;
      reached = r.reward > 0.0;
    }
    if (reached) {
      successes += 1;
      success_steps += env.steps_taken();
    }
#pragma omp critical
    for (int c = 0; c < cfg.n_cells(); ++c) counts[c] += local[c];
  }

  long total = 0;
  for (long c : counts) total += c;
  map.freq.resize(cfg.n_cells());
  for (int c = 0; c < cfg.n_cells(); ++c)
    map.freq[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
  map.successes = successes;
  map.mean_success_length =
      successes > 0 ? static_cast<double>(success_steps) /
                          static_cast<double>(successes)
                    : 0.0;
  return map;
}

}  // namespace rsrl
