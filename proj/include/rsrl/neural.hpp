#pragma once

#include <span>
#include <vector>

#include "rsrl/rng.hpp"

namespace rsrl {

enum class Activation { tanh, identity };

// Feed-forward network shape: hidden layers use `activation`, the output
// layer is linear.
struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden = {128, 128};
  int output_dim = 0;
  Activation activation = Activation::tanh;

  int num_layers() const { return static_cast<int>(hidden.size()) + 1; }
  int layer_in(int i) const { return i == 0 ? input_dim : hidden[i - 1]; }
  int layer_out(int i) const {
    return i == num_layers() - 1 ? output_dim : hidden[i];
  }
  int param_count() const {
    int n = 0;
    for (int i = 0; i < num_layers(); ++i)
      n += (layer_in(i) + 1) * layer_out(i);
    return n;
  }
  void validate() const;
};

// Flat parameter storage; per layer, the weight matrix (out x in, row-major)
// followed by the bias vector.
using ParamVector = std::vector<double>;

ParamVector init_mlp_params(const MlpSpec& spec, Rng& rng);

// Per-layer activations captured by forward for use in backward.
struct MlpCache {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // post-activation per layer
  std::vector<double> input;
};

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, std::span<double> output,
                 MlpCache* cache = nullptr);

// Accumulates d(scalar)/d(params) into `grad`, given d(scalar)/d(output) and
// the cache of the matching forward pass.
void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  const MlpCache& cache, std::span<const double> dout,
                  std::span<double> grad);

// ---------------------------------------------------------------------------
// Policy heads

enum class HeadKind { categorical, gaussian };

struct PolicyHead {
  HeadKind kind = HeadKind::categorical;
  int dim = 0;  // action count (categorical) or action dimension (gaussian)
  // control range for gaussian actions; samples are clipped post-draw
  double action_low = -1.0;
  double action_high = 1.0;
};

// Categorical over logits.
double categorical_log_prob(std::span<const double> logits, int action);
double categorical_entropy(std::span<const double> logits);
int categorical_sample(std::span<const double> logits, Rng& rng);
// dlogits += coeff * d log pi(action) / d logits ; resp. entropy
void categorical_log_prob_grad(std::span<const double> logits, int action,
                               double coeff, std::span<double> dlogits);
void categorical_entropy_grad(std::span<const double> logits, double coeff,
                              std::span<double> dlogits);

// Diagonal Gaussian with trainable log standard deviations.
double gaussian_log_prob(std::span<const double> mean,
                         std::span<const double> log_std,
                         std::span<const double> action);
double gaussian_entropy(std::span<const double> log_std);
// Sample, then clip each coordinate to [lo, hi].
std::vector<double> gaussian_sample(std::span<const double> mean,
                                    std::span<const double> log_std, Rng& rng,
                                    double lo, double hi);

// Policy network = MLP trunk + head. For the gaussian head the trailing
// head.dim parameters of the policy ParamVector are the log-stds.
struct PolicyNet {
  MlpSpec mlp;
  PolicyHead head;

  int param_count() const {
    return mlp.param_count() +
           (head.kind == HeadKind::gaussian ? head.dim : 0);
  }
  void validate() const;
};

ParamVector init_policy_params(const PolicyNet& net, Rng& rng);

struct ActionSample {
  int action = 0;
  std::vector<double> action_vec;
  double log_prob = 0.0;
};

// Forward + draw; non-finite head outputs are a domain error.
ActionSample policy_sample(const PolicyNet& net, std::span<const double> params,
                           std::span<const double> obs, Rng& rng);
// Deterministic variant: argmax logits / mean action.
ActionSample policy_mode(const PolicyNet& net, std::span<const double> params,
                         std::span<const double> obs);
double policy_log_prob(const PolicyNet& net, std::span<const double> params,
                       std::span<const double> obs, int action,
                       std::span<const double> action_vec);

// ---------------------------------------------------------------------------
// Batched losses with exact gradients

struct PolicySample {
  std::span<const double> obs;
  int action = 0;
  std::span<const double> action_vec;
  double old_log_prob = 0.0;
  double advantage = 0.0;
};

struct PolicyLossStats {
  double loss = 0.0;       // -(clipped surrogate) - entropy_coef * entropy
  double entropy = 0.0;    // batch mean entropy
  double clip_fraction = 0.0;
  double approx_kl = 0.0;  // mean (ratio - 1 - log ratio)
};

// Mean-reduced loss over the batch; gradient is accumulated into `grad`.
// The reduction is chunked with a fixed chunk count, so the result is
// bitwise identical for any OpenMP thread count.
PolicyLossStats policy_loss_grad(const PolicyNet& net,
                                 std::span<const double> params,
                                 std::span<const PolicySample> batch,
                                 double clip_eps, double entropy_coef,
                                 std::span<double> grad);

struct ValueSample {
  std::span<const double> obs;
  double target = 0.0;
};

// 1/2 mean squared error against targets; gradient accumulated into `grad`.
double value_loss_grad(const MlpSpec& spec, std::span<const double> params,
                       std::span<const ValueSample> batch,
                       std::span<double> grad);

namespace serial {
// Single-pass reference implementations (plain sample-order accumulation).
PolicyLossStats policy_loss_grad(const PolicyNet& net,
                                 std::span<const double> params,
                                 std::span<const PolicySample> batch,
                                 double clip_eps, double entropy_coef,
                                 std::span<double> grad);
double value_loss_grad(const MlpSpec& spec, std::span<const double> params,
                       std::span<const ValueSample> batch,
                       std::span<double> grad);
}  // namespace serial

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  std::vector<double> m, v;
  long t = 0;

  explicit AdamState(int n = 0) : m(n, 0.0), v(n, 0.0) {}
  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    t = 0;
  }
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment update, in place.
void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state,
               const AdamConfig& cfg);

}  // namespace rsrl
