#pragma once

#include <stdexcept>
#include <string>

namespace rsrl {

// Largest step size that avoids value overestimation: 1 / (2 max(tau, 1-tau)).
inline double default_alpha(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::domain_error("default_alpha: tau must lie in (0,1), got " +
                            std::to_string(tau));
  const double m = tau > 1.0 - tau ? tau : 1.0 - tau;
  return 1.0 / (2.0 * m);
}

// Risk level and estimator parameters threaded through every estimator.
struct RiskConfig {
  double tau = 0.5;
  double alpha = 1.0;
  double gamma = 0.99;
  double lambda = 0.95;
  int n_max = 50;  // row cap for the multi-step return table

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("RiskConfig: tau must lie in (0,1)");
    // tiny slack so alpha = default_alpha(tau) survives rounding
    if (!(alpha > 0.0 && alpha <= default_alpha(tau) * (1.0 + 1e-12)))
      throw std::invalid_argument(
          "RiskConfig: alpha must lie in (0, 1/(2 max(tau,1-tau))]");
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::invalid_argument("RiskConfig: gamma must lie in (0,1)");
    if (!(lambda >= 0.0 && lambda < 1.0))
      throw std::invalid_argument("RiskConfig: lambda must lie in [0,1)");
    if (n_max < 1) throw std::invalid_argument("RiskConfig: n_max must be >= 1");
  }

  static RiskConfig make(double tau, double gamma, double lambda,
                         int n_max = 50) {
    RiskConfig cfg;
    cfg.tau = tau;
    cfg.alpha = default_alpha(tau);
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.n_max = n_max;
    cfg.validate();
    return cfg;
  }
};

}  // namespace rsrl
