#pragma once

#include <string>
#include <vector>

namespace rsrl {

// One stochastic outcome of taking action a in state s.
struct Outcome {
  int next_state = 0;
  double prob = 0.0;
  double reward = 0.0;
};

// Finite MDP with explicit transition lists and rewards on transitions.
// Terminal states are absorbing zero-reward self-loops.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<Outcome>> transitions;  // indexed s * n_actions + a
  std::vector<bool> terminal;

  TabularMDP() = default;
  TabularMDP(int states, int actions)
      : n_states(states),
        n_actions(actions),
        transitions(static_cast<std::size_t>(states) * actions),
        terminal(states, false) {}

  std::vector<Outcome>& outcomes(int s, int a) {
    return transitions[static_cast<std::size_t>(s) * n_actions + a];
  }
  const std::vector<Outcome>& outcomes(int s, int a) const {
    return transitions[static_cast<std::size_t>(s) * n_actions + a];
  }

  // Marks s terminal and rewires every action to a zero-reward self-loop.
  void make_terminal(int s) {
    terminal[s] = true;
    for (int a = 0; a < n_actions; ++a) outcomes(s, a) = {{s, 1.0, 0.0}};
  }
};

// Per-state action distribution.
struct TabularPolicy {
  std::vector<std::vector<double>> probs;  // probs[s][a]

  static TabularPolicy uniform(int n_states, int n_actions) {
    TabularPolicy pi;
    pi.probs.assign(n_states,
                    std::vector<double>(n_actions, 1.0 / n_actions));
    return pi;
  }
};

// Returns the list of violated invariants; empty means valid.
std::vector<std::string> validate_mdp(const TabularMDP& mdp);

// Raises std::invalid_argument if either the policy shape or a row
// distribution is broken (rows must sum to 1 within 1e-12, entries >= 0).
void check_policy(const TabularPolicy& pi, const TabularMDP& mdp);

}  // namespace rsrl
