#include "rsrl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsrl/advantage.hpp"

namespace rsrl {

namespace {

constexpr double kTauGrid[9] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
constexpr double kTauToWorst[5] = {0.2, 0.1, 0.05, 0.01, 0.001};
constexpr double kTauToBest[5] = {0.8, 0.9, 0.95, 0.99, 0.999};
constexpr double kGammas[3] = {0.8, 0.9, 0.95};

double sup_norm_diff(const ValueTable& a, const ValueTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct Check {
  CheckResult result;
  long evaluations = 0;

  explicit Check(std::string name) { result.name = std::move(name); }
  void count() { ++evaluations; }
  void fail(const std::string& detail) {
    if (result.passed) {
      result.passed = false;
      result.detail = detail;
    }
  }
  CheckResult finish() {
    if (result.passed)
      result.detail = std::to_string(evaluations) + " evaluations";
    return result;
  }
};

std::string describe(int mdp_index, double tau, double gamma) {
  std::ostringstream os;
  os << "mdp " << mdp_index << ", tau " << tau << ", gamma " << gamma;
  return os.str();
}

// Test hook: fixed-point loop with the backup corrupted by +0.02 v, using
// the same ratio-recording rule as solve_fixed_point.
std::vector<double> corrupted_contraction_ratios(const MdpSample& smp,
                                                 const RiskConfig& cfg) {
  ValueTable v(smp.mdp.n_states, 0.0);
  std::vector<double> ratios;
  double prev_delta = -1.0, prev_norm = 0.0;
  for (int it = 0; it < 200; ++it) {
    ValueTable next = expectile_backup(v, smp.mdp, smp.policy, cfg);
    for (int s = 0; s < smp.mdp.n_states; ++s) next[s] += 0.02 * v[s];
    double delta = 0.0, vnorm = 0.0;
    for (int s = 0; s < smp.mdp.n_states; ++s) {
      delta = std::max(delta, std::abs(next[s] - v[s]));
      vnorm = std::max(vnorm, std::abs(next[s]));
    }
    if (prev_delta >= 1e-3 * (1.0 + prev_norm))
      ratios.push_back(delta / prev_delta);
    prev_delta = delta;
    prev_norm = vnorm;
    v.swap(next);
  }
  return ratios;
}

// Smallest term count for which folding the tail into the last term keeps
// the truncated operator's modulus within 1e-12 of gamma_tau_lambda.
int multistep_terms_for(const RiskConfig& cfg) {
  const double gt = gamma_tau(cfg);
  const double lg = cfg.lambda * gt;
  if (lg <= 0.0) return 1;
  const double excess1 = gt * cfg.lambda * (1.0 - gt) / (1.0 - lg);
  if (excess1 <= 1e-12) return 1;
  const int n = 1 + static_cast<int>(std::ceil(std::log(1e-12 / excess1) /
                                               std::log(lg)));
  return std::clamp(n, 2, 800);
}

// Deterministic ring MDP: one action per state, fixed successor, random
// rewards; the expectile fixed point is tau-independent here.
MdpSample deterministic_chain(Rng& rng) {
  const int n = 3 + rng.uniform_int(6);
  MdpSample smp;
  smp.mdp = TabularMDP(n, 1);
  smp.gamma = kGammas[rng.uniform_int(3)];
  const bool ring = rng.bernoulli(0.5);
  for (int s = 0; s < n - 1; ++s)
    smp.mdp.outcomes(s, 0) = {{s + 1, 1.0, rng.uniform(-1.0, 1.0)}};
  if (ring)
    smp.mdp.outcomes(n - 1, 0) = {{0, 1.0, rng.uniform(-1.0, 1.0)}};
  else
    smp.mdp.make_terminal(n - 1);
  smp.policy.probs.assign(n, {1.0});
  return smp;
}

}  // namespace

MdpSample random_mdp(Rng& rng, int max_states, int max_actions) {
  MdpSample smp;
  const int n_states = 2 + rng.uniform_int(max_states - 1);
  const int n_actions = 1 + rng.uniform_int(max_actions);
  smp.mdp = TabularMDP(n_states, n_actions);
  smp.gamma = kGammas[rng.uniform_int(3)];

  std::vector<int> terminals;
  if (rng.bernoulli(0.5)) {
    const int n_term = 1 + rng.uniform_int(std::min(2, n_states - 1));
    for (int k = 0; k < n_term; ++k) {
      const int s = 1 + rng.uniform_int(n_states - 1);  // keep state 0 live
      terminals.push_back(s);
    }
  }

  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const int n_succ = 1 + rng.uniform_int(3);
      std::vector<double> w(n_succ);
      double total = 0.0;
      for (double& x : w) {
        x = 0.1 + rng.uniform();
        total += x;
      }
      auto& outs = smp.mdp.outcomes(s, a);
      double acc = 0.0;
      for (int i = 0; i < n_succ; ++i) {
        double p;
        if (i == n_succ - 1) {
          p = 1.0 - acc;  // exact unit row sum
        } else {
          p = w[i] / total;
          acc += p;
        }
        outs.push_back({rng.uniform_int(n_states), p, rng.uniform(-1.0, 1.0)});
      }
    }
  }
  for (int s : terminals) smp.mdp.make_terminal(s);

  smp.policy.probs.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    auto& row = smp.policy.probs[s];
    row.resize(n_actions);
    double total = 0.0;
    for (double& x : row) {
      x = 0.1 + rng.uniform();
      total += x;
    }
    double acc = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      if (a == n_actions - 1) {
        row[a] = 1.0 - acc;
      } else {
        row[a] /= total;
        acc += row[a];
      }
    }
  }
  return smp;
}

MdpSample bernoulli_bandit(double gamma) {
  MdpSample smp;
  smp.mdp = TabularMDP(2, 1);
  smp.gamma = gamma;
  smp.mdp.outcomes(0, 0) = {{1, 0.5, 1.0}, {1, 0.5, 0.0}};
  smp.mdp.make_terminal(1);
  smp.policy.probs = {{1.0}, {1.0}};
  return smp;
}

Trajectory random_trajectory(Rng& rng, int length, double episode_end_prob) {
  Trajectory traj;
  traj.steps.resize(length);
  for (int t = 0; t < length; ++t) {
    Step& s = traj.steps[t];
    s.reward = rng.uniform(-1.0, 1.0);
    s.value = rng.normal();
    s.done = rng.bernoulli(episode_end_prob);
    s.action = 0;
  }
  traj.bootstrap_value = traj.steps.back().done ? 0.0 : rng.normal();
  return traj;
}

std::vector<CheckResult> run_proposition_checks(const VerifyOptions& opt) {
  Check contraction("1 contraction: ratios <= gamma_tau + 1e-9");
  Check monotonic("2 monotonicity: fixed points nondecreasing in tau");
  Check limits("3 limits: worst/best sandwich and monotone approach");
  Check ms_contraction("4 multi-step contraction: ratios <= gamma_tau_lambda + 1e-9");
  Check ms_monotonic("5 multi-step monotonicity in tau");
  Check ms_identity("6 multi-step fixed point equals one-step fixed point");
  Check det_invariance("7 deterministic invariance across tau");

  Rng root(opt.seed);
  const SolveOptions grid_solve{1e-12, 1000000, 0};
  const SolveOptions deep_solve{1e-12, 4000000, 0};

  for (int m = 0; m < opt.n_mdps; ++m) {
    Rng mdp_rng = root.child(0x101, m);
    const MdpSample smp = random_mdp(mdp_rng);

    const ValueTable v_worst =
        solve_fixed_point(smp.mdp, smp.policy, RiskConfig::make(0.5, smp.gamma, 0.0),
                          BackupKind::worst, grid_solve)
            .values;
    const ValueTable v_best =
        solve_fixed_point(smp.mdp, smp.policy, RiskConfig::make(0.5, smp.gamma, 0.0),
                          BackupKind::best, grid_solve)
            .values;

    ValueTable prev;
    std::vector<ValueTable> grid_fp(9);
    for (int ti = 0; ti < 9; ++ti) {
      const RiskConfig cfg = RiskConfig::make(kTauGrid[ti], smp.gamma, 0.0);
      const FixedPointResult res =
          solve_fixed_point(smp.mdp, smp.policy, cfg, BackupKind::expectile,
                            grid_solve);
      grid_fp[ti] = res.values;

      const double bound = gamma_tau(cfg) + 1e-9;
      const auto& ratios =
          opt.inject_bad_operator
              ? corrupted_contraction_ratios(smp, cfg)
              : res.contraction_estimates;
      contraction.count();
      for (double r : ratios)
        if (r > bound) {
          contraction.fail(describe(m, cfg.tau, smp.gamma) + ": ratio " +
                           std::to_string(r) + " > " + std::to_string(bound));
          break;
        }

      if (ti > 0) {
        monotonic.count();
        for (int s = 0; s < smp.mdp.n_states; ++s)
          if (res.values[s] < prev[s] - 1e-8) {
            monotonic.fail(describe(m, cfg.tau, smp.gamma) + ": V[" +
                           std::to_string(s) + "] decreased by " +
                           std::to_string(prev[s] - res.values[s]));
            break;
          }
      }
      prev = res.values;

      limits.count();
      for (int s = 0; s < smp.mdp.n_states; ++s)
        if (res.values[s] < v_worst[s] - 1e-8 ||
            res.values[s] > v_best[s] + 1e-8) {
          limits.fail(describe(m, cfg.tau, smp.gamma) + ": sandwich violated at state " +
                      std::to_string(s));
          break;
        }
    }

    // monotone approach toward the worst/best fixed points
    for (int side = 0; side < 2; ++side) {
      const double* seq = side == 0 ? kTauToWorst : kTauToBest;
      const ValueTable& anchor = side == 0 ? v_worst : v_best;
      double prev_dist = -1.0;
      for (int i = 0; i < 5; ++i) {
        const RiskConfig cfg = RiskConfig::make(seq[i], smp.gamma, 0.0);
        const ValueTable v =
            solve_fixed_point(smp.mdp, smp.policy, cfg, BackupKind::expectile,
                              deep_solve)
                .values;
        const double dist = sup_norm_diff(v, anchor);
        limits.count();
        for (int s = 0; s < smp.mdp.n_states; ++s)
          if (v[s] < v_worst[s] - 1e-8 || v[s] > v_best[s] + 1e-8) {
            limits.fail(describe(m, cfg.tau, smp.gamma) +
                        ": sandwich violated on approach sequence");
            break;
          }
        if (i > 0 && dist > prev_dist + 1e-9)
          limits.fail(describe(m, seq[i], smp.gamma) +
                      ": distance to limit grew from " +
                      std::to_string(prev_dist) + " to " + std::to_string(dist));
        prev_dist = dist;
      }
    }

    // multi-step checks on the leading subset (each solve is n_terms sweeps)
    if (m < opt.multistep_mdps) {
      for (double lambda : {0.3, 0.7, 0.95}) {
        ValueTable prev_ms;
        for (int ti = 0; ti < 9; ++ti) {
          RiskConfig cfg = RiskConfig::make(kTauGrid[ti], smp.gamma, lambda);
          SolveOptions ms_solve{1e-10, 200000, multistep_terms_for(cfg)};
          const FixedPointResult res = solve_fixed_point(
              smp.mdp, smp.policy, cfg, BackupKind::expectile, ms_solve);

          const double bound = gamma_tau_lambda(cfg) + 1e-9;
          ms_contraction.count();
          for (double r : res.contraction_estimates)
            if (r > bound) {
              ms_contraction.fail(describe(m, cfg.tau, smp.gamma) +
                                  ", lambda " + std::to_string(lambda) +
                                  ": ratio " + std::to_string(r) + " > " +
                                  std::to_string(bound));
              break;
            }

          ms_identity.count();
          const double gap = sup_norm_diff(res.values, grid_fp[ti]);
          if (gap > 1e-6)
            ms_identity.fail(describe(m, cfg.tau, smp.gamma) + ", lambda " +
                             std::to_string(lambda) + ": |fix gap| " +
                             std::to_string(gap));

          if (ti > 0) {
            ms_monotonic.count();
            for (int s = 0; s < smp.mdp.n_states; ++s)
              if (res.values[s] < prev_ms[s] - 1e-8) {
                ms_monotonic.fail(describe(m, cfg.tau, smp.gamma) +
                                  ", lambda " + std::to_string(lambda) +
                                  ": fixed point decreased in tau");
                break;
              }
          }
          prev_ms = res.values;
        }
      }
    }

    // deterministic invariance
    Rng det_rng = root.child(0x202, m);
    const MdpSample det = deterministic_chain(det_rng);
    const SolveOptions det_solve{1e-14, 4000000, 0};
    ValueTable v_ref;
    det_invariance.count();
    for (int ti = 0; ti < 9; ++ti) {
      const RiskConfig cfg = RiskConfig::make(kTauGrid[ti], det.gamma, 0.0);
      const ValueTable v =
          solve_fixed_point(det.mdp, det.policy, cfg, BackupKind::expectile,
                            det_solve)
              .values;
      if (ti == 0) {
        v_ref = v;
      } else if (sup_norm_diff(v, v_ref) > 1e-10) {
        det_invariance.fail(describe(m, cfg.tau, det.gamma) +
                            ": deterministic fixed point varied by " +
                            std::to_string(sup_norm_diff(v, v_ref)));
      }
    }
  }

  // closed form: the Bernoulli bandit fixed point equals tau
  for (double gamma : kGammas) {
    const MdpSample bandit = bernoulli_bandit(gamma);
    for (double tau : kTauGrid) {
      const RiskConfig cfg = RiskConfig::make(tau, gamma, 0.0);
      const ValueTable v =
          solve_fixed_point(bandit.mdp, bandit.policy, cfg,
                            BackupKind::expectile, {1e-12, 1000000, 0})
              .values;
      limits.count();
      if (std::abs(v[0] - tau) > 1e-9)
        limits.fail("bernoulli bandit: V(s0) = " + std::to_string(v[0]) +
                    " but tau = " + std::to_string(tau));
      const ValueTable w =
          solve_fixed_point(bandit.mdp, bandit.policy, cfg, BackupKind::worst,
                            {1e-12, 1000000, 0})
              .values;
      const ValueTable b =
          solve_fixed_point(bandit.mdp, bandit.policy, cfg, BackupKind::best,
                            {1e-12, 1000000, 0})
              .values;
      if (std::abs(w[0]) > 1e-9 || std::abs(b[0] - 1.0) > 1e-9)
        limits.fail("bernoulli bandit: worst/best fixed points are " +
                    std::to_string(w[0]) + "/" + std::to_string(b[0]));
    }
  }

  return {contraction.finish(),    monotonic.finish(),
          limits.finish(),         ms_contraction.finish(),
          ms_monotonic.finish(),   ms_identity.finish(),
          det_invariance.finish()};
}

namespace {

// Independent n-step return: sum of discounted rewards plus the discounted
// tail value (zero past a terminal step, bootstrap past a segment cut).
double nstep_return_oracle(const Trajectory& traj, int t, int n,
                           double gamma) {
  double acc = 0.0;
  double g = 1.0;
  for (int l = 0; l < n; ++l) {
    acc += g * traj.steps[t + l].reward;
    g *= gamma;
    if (traj.steps[t + l].done) return acc;  // l == n-1 by the triangle shape
  }
  const int next = t + n;
  const double tail = next < traj.length() ? traj.steps[next].value
                                           : traj.bootstrap_value;
  return acc + g * tail;
}

// Exponentially weighted TD(lambda) advantages via the standard backward
// recursion, independent of the return-table machinery.
std::vector<double> gae_oracle(const Trajectory& traj, double gamma,
                               double lambda) {
  const int T = traj.length();
  std::vector<double> adv(T, 0.0);
  double running = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    const Step& s = traj.steps[t];
    const double v_next = s.done ? 0.0
                          : (t + 1 < T ? traj.steps[t + 1].value
                                       : traj.bootstrap_value);
    const double delta =
        s.reward + gamma * v_next * (s.done ? 0.0 : 1.0) - s.value;
    running = s.done ? delta : delta + gamma * lambda * running;
    adv[t] = running;
  }
  return adv;
}

}  // namespace

std::vector<CheckResult> run_advantage_checks(std::uint64_t seed) {
  Check nstep("table entries equal brute-force n-step returns at tau=1/2");
  Check weights("lambda weights sum to one per column");
  Check triangle("table populated exactly on the triangle");
  Check gae("advantages match the GAE recursion on long segments");
  Check monotone("one-step targets nondecreasing in tau");

  Rng root(seed);

  for (int rep = 0; rep < 40; ++rep) {
    Rng rng = root.child(0x303, rep);
    const int length = 5 + rng.uniform_int(60);
    const Trajectory traj = random_trajectory(rng, length, 0.15);
    const double gamma = 0.8 + 0.19 * rng.uniform();
    const int n_max = 1 + rng.uniform_int(50);
    RiskConfig cfg;
    cfg.tau = 0.5;
    cfg.alpha = 1.0;
    cfg.gamma = gamma;
    cfg.lambda = 0.9;
    cfg.n_max = n_max;

    const ReturnTable table = build_return_table(traj, cfg);

    // depths recomputed independently from the done flags
    int run = 0;
    std::vector<int> depth(length);
    for (int t = length - 1; t >= 0; --t) {
      run = traj.steps[t].done ? 1 : run + 1;
      depth[t] = std::min(n_max, run);
    }

    triangle.count();
    nstep.count();
    for (int t = 0; t < length; ++t) {
      if (depth[t] != table.depth[t]) {
        triangle.fail("rep " + std::to_string(rep) + ": depth mismatch at t=" +
                      std::to_string(t));
        break;
      }
      for (int n = 1; n <= table.n_rows; ++n) {
        if (n > depth[t]) {
          if (table.at(n, t) != 0.0)
            triangle.fail("rep " + std::to_string(rep) +
                          ": entry beyond the triangle is nonzero");
          continue;
        }
        const double want = nstep_return_oracle(traj, t, n, gamma);
        const double got = table.at(n, t);
        if (std::abs(got - want) >
            1e-9 * std::max(1.0, std::abs(want)))
          nstep.fail("rep " + std::to_string(rep) + ": (n=" +
                     std::to_string(n) + ", t=" + std::to_string(t) +
                     ") table " + std::to_string(got) + " oracle " +
                     std::to_string(want));
      }
    }

    weights.count();
    for (double lambda : {0.1, 0.5, 0.9, 0.97}) {
      for (int t = 0; t < length; ++t) {
        const int d = depth[t];
        double sum = 0.0;
        double lam_pow = 1.0;
        for (int h = 1; h <= d; ++h) {
          sum += lam_pow;
          lam_pow *= lambda;
        }
        const double norm = (1.0 - lambda) / (1.0 - std::pow(lambda, d));
        if (std::abs(norm * sum - 1.0) > 1e-12)
          weights.fail("weights off by " + std::to_string(norm * sum - 1.0));
      }
    }
  }

  // long pre-terminal segment: lambda^{d_t} <= 1e-12 columns match GAE
  {
    Rng rng = root.child(0x404);
    const int length = 1500;
    Trajectory traj;
    traj.steps.resize(length);
    for (int t = 0; t < length; ++t) {
      traj.steps[t].reward = rng.uniform(-1.0, 1.0);
      traj.steps[t].value = rng.normal();
      traj.steps[t].done = t == length - 1;
    }
    traj.bootstrap_value = 0.0;
    RiskConfig cfg;
    cfg.tau = 0.5;
    cfg.alpha = 1.0;
    cfg.gamma = 0.99;
    cfg.lambda = 0.95;
    cfg.n_max = 1000;

    const AdvantageBatch batch = compute_advantages(traj, cfg);
    const std::vector<double> oracle = gae_oracle(traj, cfg.gamma, cfg.lambda);
    const double lambda_cut =
        std::log(1e-12) / std::log(cfg.lambda);  // d_t above this is enough
    gae.count();
    for (int t = 0; t < length; ++t) {
      const int d = std::min(cfg.n_max, length - t);
      if (std::pow(cfg.lambda, d) > 1e-12) continue;
      (void)lambda_cut;
      if (std::abs(batch.advantages[t] - oracle[t]) >
          1e-6 * (1.0 + std::abs(oracle[t]))) {
        gae.fail("t=" + std::to_string(t) + ": table " +
                 std::to_string(batch.advantages[t]) + " gae " +
                 std::to_string(oracle[t]));
        break;
      }
      if (std::abs(batch.targets[t] -
                   (traj.steps[t].value + batch.advantages[t])) > 0.0)
        gae.fail("target identity violated at t=" + std::to_string(t));
    }
  }

  // per-step monotonicity of the one-step sample target in tau
  {
    Rng rng = root.child(0x505);
    monotone.count();
    for (int rep = 0; rep < 2000; ++rep) {
      const double v = rng.normal();
      const double vn = rng.normal();
      const double r = rng.uniform(-1.0, 1.0);
      const bool done = rng.bernoulli(0.2);
      double prev = -1e300;
      for (double tau : kTauGrid) {
        const RiskConfig cfg = RiskConfig::make(tau, 0.95, 0.95);
        const double y = one_step_sample(v, vn, r, cfg, done);
        if (y < prev - 1e-12) {
          monotone.fail("target decreased as tau rose (rep " +
                        std::to_string(rep) + ")");
          break;
        }
        prev = y;
      }
    }
  }

  return {nstep.finish(), weights.finish(), triangle.finish(), gae.finish(),
          monotone.finish()};
}

}  // namespace rsrl
