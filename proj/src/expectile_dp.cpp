#include "rsrl/expectile_dp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rsrl {

namespace {

// sweeps below this state count run single-threaded; per-sweep fork/join
// overhead would swamp the arithmetic
constexpr int kParallelStates = 256;

inline double expectile_state(const ValueTable& v, const TabularMDP& mdp,
                              const TabularPolicy& pi, const RiskConfig& cfg,
                              int s) {
  double acc = 0.0;
  for (int a = 0; a < mdp.n_actions; ++a) {
    const double pa = pi.probs[s][a];
    if (pa == 0.0) continue;
    for (const auto& o : mdp.outcomes(s, a)) {
      if (o.prob == 0.0) continue;
      const double delta = o.reward + cfg.gamma * v[o.next_state] - v[s];
      const double asym =
          delta > 0.0 ? cfg.tau * delta : (1.0 - cfg.tau) * delta;
      acc += pa * o.prob * asym;
    }
  }
  return v[s] + 2.0 * cfg.alpha * acc;
}

inline double extreme_state(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, double gamma, int s,
                            bool best) {
  double ext = best ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (pi.probs[s][a] == 0.0) continue;
    for (const auto& o : mdp.outcomes(s, a)) {
      if (o.prob == 0.0) continue;
      const double cand = o.reward + gamma * v[o.next_state];
      if (best ? cand > ext : cand < ext) ext = cand;
    }
  }
  return ext;
}

void require_support(const TabularMDP& mdp, const TabularPolicy& pi) {
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) continue;
    bool found = false;
    for (int a = 0; a < mdp.n_actions && !found; ++a) {
      if (pi.probs[s][a] == 0.0) continue;
      for (const auto& o : mdp.outcomes(s, a))
        if (o.prob > 0.0) {
          found = true;
          break;
        }
    }
    if (!found)
      throw std::domain_error("state " + std::to_string(s) +
                              " has no supported transition");
  }
}

ValueTable extreme_backup(const ValueTable& v, const TabularMDP& mdp,
                          const TabularPolicy& pi, double gamma, bool best,
                          bool parallel) {
  require_support(mdp, pi);
  const int n = mdp.n_states;
  ValueTable out(n);
#pragma omp parallel for schedule(static) if (parallel && n >= kParallelStates)
  for (int s = 0; s < n; ++s)
    out[s] = mdp.terminal[s] ? v[s] : extreme_state(v, mdp, pi, gamma, s, best);
  return out;
}

ValueTable expectile_backup_impl(const ValueTable& v, const TabularMDP& mdp,
                                 const TabularPolicy& pi,
                                 const RiskConfig& cfg, bool parallel) {
  cfg.validate();
  const int n = mdp.n_states;
  ValueTable out(n);
#pragma omp parallel for schedule(static) if (parallel && n >= kParallelStates)
  for (int s = 0; s < n; ++s)
    out[s] = mdp.terminal[s] ? v[s] : expectile_state(v, mdp, pi, cfg, s);
  return out;
}

ValueTable multistep_backup_impl(const ValueTable& v, const TabularMDP& mdp,
                                 const TabularPolicy& pi,
                                 const RiskConfig& cfg, int n_terms,
                                 bool parallel) {
  if (n_terms < 1)
    throw std::invalid_argument("multistep_backup: n_terms must be >= 1");
  const int n = mdp.n_states;
  ValueTable acc(n, 0.0);
  ValueTable cur = v;
  double lam_pow = 1.0;  // lambda^{n-1}
  for (int term = 1; term <= n_terms; ++term) {
    cur = expectile_backup_impl(cur, mdp, pi, cfg, parallel);
    const double w =
        term < n_terms ? (1.0 - cfg.lambda) * lam_pow : lam_pow;
    for (int s = 0; s < n; ++s) acc[s] += w * cur[s];
    lam_pow *= cfg.lambda;
  }
  return acc;
}

}  // namespace

ValueTable expectile_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg) {
  return expectile_backup_impl(v, mdp, pi, cfg, true);
}

ValueTable worst_case_backup(const ValueTable& v, const TabularMDP& mdp,
                             const TabularPolicy& pi, double gamma) {
  return extreme_backup(v, mdp, pi, gamma, false, true);
}

ValueTable best_case_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, double gamma) {
  return extreme_backup(v, mdp, pi, gamma, true, true);
}

ValueTable multistep_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg,
                            int n_terms) {
  return multistep_backup_impl(v, mdp, pi, cfg, n_terms, true);
}

double gamma_tau(const RiskConfig& cfg) {
  const double m = cfg.tau < 1.0 - cfg.tau ? cfg.tau : 1.0 - cfg.tau;
  return 1.0 - 2.0 * cfg.alpha * (1.0 - cfg.gamma) * m;
}

double gamma_tau_lambda(const RiskConfig& cfg) {
  const double gt = gamma_tau(cfg);
  return (1.0 - cfg.lambda) * gt / (1.0 - cfg.lambda * gt);
}

FixedPointResult solve_fixed_point(const TabularMDP& mdp,
                                   const TabularPolicy& pi,
                                   const RiskConfig& cfg, BackupKind kind,
                                   const SolveOptions& opt) {
  if (!(opt.tol > 0.0))
    throw std::invalid_argument("solve_fixed_point: tol must be positive");
  if (opt.multistep_terms > 0 && kind != BackupKind::expectile)
    throw std::invalid_argument(
        "solve_fixed_point: multistep_terms applies to the expectile backup");
  check_policy(pi, mdp);

  FixedPointResult res;
  res.values.assign(mdp.n_states, 0.0);
  double prev_delta = -1.0;
  double prev_vnorm = 0.0;
  for (long it = 1; it <= opt.max_iter; ++it) {
    ValueTable next;
    switch (kind) {
      case BackupKind::expectile:
        next = opt.multistep_terms > 0
                   ? multistep_backup(res.values, mdp, pi, cfg,
                                      opt.multistep_terms)
                   : expectile_backup(res.values, mdp, pi, cfg);
        break;
      case BackupKind::worst:
        next = worst_case_backup(res.values, mdp, pi, cfg.gamma);
        break;
      case BackupKind::best:
        next = best_case_backup(res.values, mdp, pi, cfg.gamma);
        break;
    }
    double delta = 0.0;
    double vnorm = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      delta = std::max(delta, std::abs(next[s] - res.values[s]));
      vnorm = std::max(vnorm, std::abs(next[s]));
    }
    res.values.swap(next);
    res.iterations = it;
    res.residual = delta;
    if (prev_delta >= 1e-3 * (1.0 + prev_vnorm))
      res.contraction_estimates.push_back(delta / prev_delta);
    prev_delta = delta;
    prev_vnorm = vnorm;
    if (delta <= opt.tol) return res;
  }
  throw std::runtime_error(
      "solve_fixed_point: no convergence after " +
      std::to_string(opt.max_iter) +
      " iterations, residual " + std::to_string(res.residual));
}

namespace serial {

ValueTable expectile_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg) {
  return expectile_backup_impl(v, mdp, pi, cfg, false);
}

ValueTable worst_case_backup(const ValueTable& v, const TabularMDP& mdp,
                             const TabularPolicy& pi, double gamma) {
  return extreme_backup(v, mdp, pi, gamma, false, false);
}

ValueTable best_case_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, double gamma) {
  return extreme_backup(v, mdp, pi, gamma, true, false);
}

ValueTable multistep_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg,
                            int n_terms) {
  return multistep_backup_impl(v, mdp, pi, cfg, n_terms, false);
}

}  // namespace serial

}  // namespace rsrl
