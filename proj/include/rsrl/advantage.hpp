#pragma once

#include <vector>

#include "rsrl/risk_config.hpp"
#include "rsrl/trajectory.hpp"

namespace rsrl {

// Triangular table of n-step sample-operator values: row n (1-based) holds
// the n-fold sample backup of V at each step t. Column t has depth[t] =
// min(n_max, steps from t to the end of its episode segment) valid rows;
// entries beyond that are unused and left at zero.
struct ReturnTable {
  int n_rows = 0;
  int length = 0;               // trajectory length T
  std::vector<double> values;   // row-major n_rows x length
  std::vector<int> depth;       // valid rows per column

  double at(int row, int t) const {  // row is 1-based
    return values[static_cast<std::size_t>(row - 1) * length + t];
  }
};

// One application of the sample-form backup:
//   d = r + g * v_target_next * (1 - done) - v_s
//   result = v_s + 2a (tau [d]_+ + (1-tau) [d]_-)
double one_step_sample(double v_s, double v_target_next, double r,
                       const RiskConfig& cfg, bool done);

// Builds the table via the row recurrence: row 1 is the one-step sample
// backup per step; row n at column t backs up row n-1 at column t+1.
// Throws std::domain_error on an empty trajectory.
ReturnTable build_return_table(const Trajectory& traj, const RiskConfig& cfg);

// Normalized exponential mixture down each column:
//   (1-l)/(1-l^d) * sum_{h=1..d} l^{h-1} row_h,  d = depth[t].
// lambda = 0 puts all weight on row 1.
std::vector<double> lambda_returns(const ReturnTable& table,
                                   const RiskConfig& cfg);

struct AdvantageBatch {
  std::vector<double> advantages;  // A_t = target_t - V(s_t)
  std::vector<double> targets;     // lambda-mixed value targets
};

AdvantageBatch compute_advantages(const Trajectory& traj,
                                  const RiskConfig& cfg);

namespace serial {
ReturnTable build_return_table(const Trajectory& traj, const RiskConfig& cfg);
}

}  // namespace rsrl
