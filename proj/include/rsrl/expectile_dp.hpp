#pragma once

#include <vector>

#include "rsrl/mdp.hpp"
#include "rsrl/risk_config.hpp"

namespace rsrl {

using ValueTable = std::vector<double>;

enum class BackupKind { expectile, worst, best };

// Asymmetric TD backup: per nonterminal state s,
//   v(s) + 2a * E_{a,s'}[ tau [d]_+ + (1-tau) [d]_- ],  d = r + g v(s') - v(s).
// Terminal states are left unchanged. At tau = 1/2, alpha = 1 this is the
// standard expected Bellman backup.
ValueTable expectile_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg);

// min / max of r + g v(s') over (a, s') pairs with pi(a|s) > 0 and
// p(s'|s,a) > 0. A nonterminal state with no supported pair is a domain error.
ValueTable worst_case_backup(const ValueTable& v, const TabularMDP& mdp,
                             const TabularPolicy& pi, double gamma);
ValueTable best_case_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, double gamma);

// Truncated exponential mixture of iterated expectile backups:
//   (1-l) sum_{n=1}^{n_terms} l^{n-1} T^n v,
// with the tail weight folded into the last term so the weights sum to one
// (and the fixed point of the one-step operator is preserved exactly).
ValueTable multistep_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg,
                            int n_terms);

// Contraction modulus 1 - 2 alpha (1-gamma) min(tau, 1-tau).
double gamma_tau(const RiskConfig& cfg);

// Multi-step contraction modulus (1-lambda) gamma_tau / (1 - lambda gamma_tau).
double gamma_tau_lambda(const RiskConfig& cfg);

struct FixedPointResult {
  ValueTable values;
  long iterations = 0;
  double residual = 0.0;  // sup-norm of the last update
  // Per-iteration ratios |update_{k+1}| / |update_k| (sup norms). Ratios are
  // recorded only while |update_k| >= 1e-3 * (1 + |v_k|_inf); below that the
  // quotient is dominated by floating-point rounding of the iterates rather
  // than by the operator.
  std::vector<double> contraction_estimates;
};

struct SolveOptions {
  double tol = 1e-10;       // sup-norm stopping threshold
  long max_iter = 200000;
  int multistep_terms = 0;  // > 0: iterate multistep_backup with this many terms
};

// Iterates the chosen backup from v = 0 until the sup-norm change is <= tol.
// Throws std::runtime_error (carrying the last residual) if max_iter is
// exceeded.
FixedPointResult solve_fixed_point(const TabularMDP& mdp,
                                   const TabularPolicy& pi,
                                   const RiskConfig& cfg, BackupKind kind,
                                   const SolveOptions& opt = {});

// Straight-line single-threaded reference kernels. The public functions above
// run the same arithmetic with OpenMP sweeps; tests assert bitwise equality
// and the bench tool compares throughput.
namespace serial {
ValueTable expectile_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg);
ValueTable worst_case_backup(const ValueTable& v, const TabularMDP& mdp,
                             const TabularPolicy& pi, double gamma);
ValueTable best_case_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, double gamma);
ValueTable multistep_backup(const ValueTable& v, const TabularMDP& mdp,
                            const TabularPolicy& pi, const RiskConfig& cfg,
                            int n_terms);
}  // namespace serial

}  // namespace rsrl
