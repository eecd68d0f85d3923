#include "rsrl/envs/duel.hpp"

#include <stdexcept>

namespace rsrl {

void DuelConfig::validate() const {
  if (length < 4) throw std::invalid_argument("duel: arena too short");
  if (start_a < 0 || start_b >= length || start_a >= start_b)
    throw std::invalid_argument("duel: bad start positions");
  if (!(slip_prob >= 0.0 && slip_prob <= 1.0))
    throw std::invalid_argument("duel: slip_prob must lie in [0,1]");
  if (step_cap < 1) throw std::invalid_argument("duel: step_cap must be >= 1");
}

GridDuel::GridDuel(DuelConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  obs_[0].resize(2, 0.0);
  obs_[1].resize(2, 0.0);
}

SpaceSpec GridDuel::space(int) const { return {2, 3}; }

void GridDuel::reset(Rng&) {
  pos_[0] = cfg_.start_a;
  pos_[1] = cfg_.start_b;
  steps_ = 0;
  in_episode_ = true;
  encode();
}

// Both players observe the arena from their own side, so one policy can play
// either seat: [own distance from own edge, opponent distance from own edge],
// normalized by length-1.
void GridDuel::encode() {
  const double scale = 1.0 / (cfg_.length - 1);
  obs_[0][0] = pos_[0] * scale;
  obs_[0][1] = pos_[1] * scale;
  obs_[1][0] = (cfg_.length - 1 - pos_[1]) * scale;
  obs_[1][1] = (cfg_.length - 1 - pos_[0]) * scale;
}

MarkovGameEnv::StepResult GridDuel::step(int action_a, int action_b,
                                         Rng& rng) {
  if (!in_episode_) throw std::logic_error("duel: step after episode end");
  if (action_a < 0 || action_a >= 3 || action_b < 0 || action_b >= 3)
    throw std::invalid_argument("duel: action out of range");

  if (rng.bernoulli(cfg_.slip_prob)) action_a = rng.uniform_int(3);
  if (rng.bernoulli(cfg_.slip_prob)) action_b = rng.uniform_int(3);

  const auto a = static_cast<DuelAction>(action_a);
  const auto b = static_cast<DuelAction>(action_b);
  const int gap = pos_[1] - pos_[0];

  // movement deltas; player 0 advances rightward, player 1 leftward
  int ma = a == DuelAction::advance ? 1 : a == DuelAction::retreat ? -1 : 0;
  int mb = b == DuelAction::advance ? -1 : b == DuelAction::retreat ? 1 : 0;

  if (gap == 1) {
    if (a == DuelAction::advance && b == DuelAction::advance) {
      ma = -1;  // shoving match, both recoil
      mb = 1;
    } else if (a == DuelAction::advance && b == DuelAction::brace) {
      ma = 0;
    } else if (b == DuelAction::advance && a == DuelAction::brace) {
      mb = 0;
    }
    // advance vs retreat: deltas already line up (follow the retreater)
  } else if (gap == 2 && a == DuelAction::advance &&
             b == DuelAction::advance) {
    ma = 0;  // collision
    mb = 0;
  }

  const int na = pos_[0] + ma;
  const int nb = pos_[1] + mb;
  ++steps_;

  const bool a_out = na < 0;
  const bool b_out = nb > cfg_.length - 1;
  StepResult res;
  if (a_out || b_out) {
    // the decisive shove ends the game; positions keep their last legal
    // configuration so they stay distinct and in bounds
    res.done = true;
    if (a_out && !b_out) {
      res.reward[0] = -1.0;
      res.reward[1] = 1.0;
    } else if (b_out && !a_out) {
      res.reward[0] = 1.0;
      res.reward[1] = -1.0;
    }  // both out: 0-0 draw
  } else {
    pos_[0] = na;
    pos_[1] = nb;
    if (steps_ >= cfg_.step_cap) res.done = true;  // 0-0 draw at the cap
  }
  in_episode_ = !res.done;
  encode();
  return res;
}

}  // namespace rsrl
