#include "rsrl/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsrl {

namespace {

inline double sample_backup(double v_s, double delta, const RiskConfig& cfg) {
  const double asym =
      delta > 0.0 ? cfg.tau * delta : (1.0 - cfg.tau) * delta;
  return v_s + 2.0 * cfg.alpha * asym;
}

// depth[t] = min(n_max, steps from t to the end of its episode segment)
std::vector<int> segment_depths(const Trajectory& traj, int n_max) {
  const int T = traj.length();
  std::vector<int> depth(T);
  int run = 0;
  for (int t = T - 1; t >= 0; --t) {
    run = traj.steps[t].done ? 1 : run + 1;
    depth[t] = std::min(n_max, run);
  }
  return depth;
}

ReturnTable build_table_impl(const Trajectory& traj, const RiskConfig& cfg,
                             bool parallel) {
  cfg.validate();
  const int T = traj.length();
  if (T == 0) throw std::domain_error("build_return_table: empty trajectory");

  ReturnTable table;
  table.length = T;
  table.depth = segment_depths(traj, cfg.n_max);
  table.n_rows = *std::max_element(table.depth.begin(), table.depth.end());
  table.values.assign(static_cast<std::size_t>(table.n_rows) * T, 0.0);

  const bool par = parallel && T >= 512;
  double* row1 = table.values.data();
#pragma omp parallel for schedule(static) if (par)
  for (int t = 0; t < T; ++t) {
    const Step& st = traj.steps[t];
    const double v_next = st.done ? 0.0
                          : (t + 1 < T ? traj.steps[t + 1].value
                                       : traj.bootstrap_value);
    const double delta = st.reward + cfg.gamma * v_next - st.value;
    row1[t] = sample_backup(st.value, delta, cfg);
  }

  for (int n = 2; n <= table.n_rows; ++n) {
    const double* prev = table.values.data() +
                         static_cast<std::size_t>(n - 2) * T;
    double* row = table.values.data() + static_cast<std::size_t>(n - 1) * T;
#pragma omp parallel for schedule(static) if (par)
    for (int t = 0; t < T; ++t) {
      if (n > table.depth[t]) continue;
      const Step& st = traj.steps[t];
      const double delta = st.reward + cfg.gamma * prev[t + 1] - st.value;
      row[t] = sample_backup(st.value, delta, cfg);
    }
  }
  return table;
}

}  // namespace

double one_step_sample(double v_s, double v_target_next, double r,
                       const RiskConfig& cfg, bool done) {
  const double delta =
      r + cfg.gamma * v_target_next * (done ? 0.0 : 1.0) - v_s;
  return sample_backup(v_s, delta, cfg);
}

ReturnTable build_return_table(const Trajectory& traj, const RiskConfig& cfg) {
  return build_table_impl(traj, cfg, true);
}

std::vector<double> lambda_returns(const ReturnTable& table,
                                   const RiskConfig& cfg) {
  const int T = table.length;
  std::vector<double> out(T);
  if (cfg.lambda == 0.0) {  // limit: all weight on row 1
    for (int t = 0; t < T; ++t) out[t] = table.at(1, t);
    return out;
  }
  for (int t = 0; t < T; ++t) {
    const int d = table.depth[t];
    double sum = 0.0;
    double lam_pow = 1.0;
    for (int h = 1; h <= d; ++h) {
      sum += lam_pow * table.at(h, t);
      lam_pow *= cfg.lambda;
    }
    // lam_pow is now lambda^d
    out[t] = (1.0 - cfg.lambda) / (1.0 - lam_pow) * sum;
  }
  return out;
}

AdvantageBatch compute_advantages(const Trajectory& traj,
                                  const RiskConfig& cfg) {
  const ReturnTable table = build_return_table(traj, cfg);
  const std::vector<double> mixed = lambda_returns(table, cfg);
  AdvantageBatch batch;
  batch.advantages.resize(traj.length());
  batch.targets.resize(traj.length());
  for (int t = 0; t < traj.length(); ++t) {
    const double v = traj.steps[t].value;
    // target rebuilt from the advantage so that target = V + A holds
    // bit-exactly (the regression target identity)
    batch.advantages[t] = mixed[t] - v;
    batch.targets[t] = v + batch.advantages[t];
  }
  return batch;
}

namespace serial {
ReturnTable build_return_table(const Trajectory& traj, const RiskConfig& cfg) {
  return build_table_impl(traj, cfg, false);
}
}  // namespace serial

}  // namespace rsrl
