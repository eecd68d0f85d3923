#include "rsrl/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace rsrl {

namespace {
constexpr double kProbTol = 1e-12;
}

std::vector<std::string> validate_mdp(const TabularMDP& mdp) {
  std::vector<std::string> report;
  if (mdp.n_states <= 0) report.push_back("n_states must be positive");
  if (mdp.n_actions <= 0) report.push_back("n_actions must be positive");
  if (!report.empty()) return report;

  if (mdp.transitions.size() !=
      static_cast<std::size_t>(mdp.n_states) * mdp.n_actions)
    report.push_back("transition table size does not match n_states*n_actions");
  if (mdp.terminal.size() != static_cast<std::size_t>(mdp.n_states))
    report.push_back("terminal flag array size does not match n_states");
  if (!report.empty()) return report;

  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const auto& outs = mdp.outcomes(s, a);
      double sum = 0.0;
      for (const auto& o : outs) {
        if (o.next_state < 0 || o.next_state >= mdp.n_states)
          report.push_back("state " + std::to_string(s) + " action " +
                           std::to_string(a) + ": next state out of range");
        if (o.prob < 0.0)
          report.push_back("state " + std::to_string(s) + " action " +
                           std::to_string(a) + ": negative probability");
        sum += o.prob;
      }
      if (std::abs(sum - 1.0) > kProbTol)
        report.push_back("state " + std::to_string(s) + " action " +
                         std::to_string(a) + ": probabilities sum to " +
                         std::to_string(sum));
      if (mdp.terminal[s]) {
        bool self_loop = outs.size() == 1 && outs[0].next_state == s &&
                         outs[0].reward == 0.0;
        if (!self_loop)
          report.push_back("terminal state " + std::to_string(s) +
                           " is not a zero-reward self-loop under action " +
                           std::to_string(a));
      }
    }
  }
  return report;
}

void check_policy(const TabularPolicy& pi, const TabularMDP& mdp) {
  if (pi.probs.size() != static_cast<std::size_t>(mdp.n_states))
    throw std::invalid_argument("policy: row count does not match n_states");
  for (int s = 0; s < mdp.n_states; ++s) {
    const auto& row = pi.probs[s];
    if (row.size() != static_cast<std::size_t>(mdp.n_actions))
      throw std::invalid_argument("policy: row " + std::to_string(s) +
                                  " length does not match n_actions");
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0)
        throw std::invalid_argument("policy: negative probability in row " +
                                    std::to_string(s));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("policy: row " + std::to_string(s) +
                                  " sums to " + std::to_string(sum));
  }
}

}  // namespace rsrl
