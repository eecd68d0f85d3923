#include "rsrl/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsrl {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr int kGradChunks = 8;  // fixed reduction grouping, see header

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double activate(double x, Activation act) {
  return act == Activation::tanh ? std::tanh(x) : x;
}

}  // namespace

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("MlpSpec: dims must be >= 1");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("MlpSpec: hidden dims must be >= 1");
}

void PolicyNet::validate() const {
  mlp.validate();
  if (head.dim != mlp.output_dim)
    throw std::invalid_argument("PolicyNet: head dim must match mlp output");
  if (head.kind == HeadKind::gaussian && !(head.action_low < head.action_high))
    throw std::invalid_argument("PolicyNet: empty action range");
}

ParamVector init_mlp_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  ParamVector params(spec.param_count());
  std::size_t off = 0;
  for (int i = 0; i < spec.num_layers(); ++i) {
    const int in = spec.layer_in(i);
    const int out = spec.layer_out(i);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int k = 0; k < in * out; ++k)
      params[off + k] = rng.uniform(-bound, bound);
    off += static_cast<std::size_t>(in) * out;
    for (int k = 0; k < out; ++k) params[off + k] = 0.0;
    off += out;
  }
  return params;
}

ParamVector init_policy_params(const PolicyNet& net, Rng& rng) {
  net.validate();
  ParamVector params = init_mlp_params(net.mlp, rng);
  if (net.head.kind == HeadKind::gaussian)
    params.resize(params.size() + net.head.dim, 0.0);  // log-std starts at 0
  return params;
}

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, std::span<double> output,
                 MlpCache* cache) {
  if (input.size() != static_cast<std::size_t>(spec.input_dim))
    throw std::invalid_argument("mlp_forward: input size mismatch");
  if (output.size() != static_cast<std::size_t>(spec.output_dim))
    throw std::invalid_argument("mlp_forward: output size mismatch");
  if (params.size() < static_cast<std::size_t>(spec.param_count()))
    throw std::invalid_argument("mlp_forward: parameter vector too short");

  const int L = spec.num_layers();
  if (cache) {
    cache->pre.resize(L);
    cache->post.resize(L);
    cache->input.assign(input.begin(), input.end());
  }

  std::vector<double> buf_a(input.begin(), input.end());
  std::vector<double> buf_b;
  std::size_t off = 0;
  for (int i = 0; i < L; ++i) {
    const int in = spec.layer_in(i);
    const int out = spec.layer_out(i);
    const double* W = params.data() + off;
    const double* b = W + static_cast<std::size_t>(in) * out;
    buf_b.assign(out, 0.0);
    for (int j = 0; j < out; ++j) {
      double z = b[j];
      const double* wrow = W + static_cast<std::size_t>(j) * in;
      for (int k = 0; k < in; ++k) z += wrow[k] * buf_a[k];
      buf_b[j] = z;
    }
    if (cache) cache->pre[i] = buf_b;
    const bool last = i == L - 1;
    if (!last)
      for (int j = 0; j < out; ++j) buf_b[j] = activate(buf_b[j], spec.activation);
    if (cache) cache->post[i] = buf_b;
    buf_a.swap(buf_b);
    off += static_cast<std::size_t>(in + 1) * out;
  }
  std::copy(buf_a.begin(), buf_a.end(), output.begin());
}

void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  const MlpCache& cache, std::span<const double> dout,
                  std::span<double> grad) {
  const int L = spec.num_layers();
  std::vector<double> dz(dout.begin(), dout.end());
  std::vector<double> dx;

  // offsets of each layer's parameter block
  std::vector<std::size_t> off(L);
  std::size_t o = 0;
  for (int i = 0; i < L; ++i) {
    off[i] = o;
    o += static_cast<std::size_t>(spec.layer_in(i) + 1) * spec.layer_out(i);
  }

  for (int i = L - 1; i >= 0; --i) {
    const int in = spec.layer_in(i);
    const int out = spec.layer_out(i);
    if (i != L - 1 && spec.activation == Activation::tanh) {
      const auto& post = cache.post[i];
      for (int j = 0; j < out; ++j) dz[j] *= 1.0 - post[j] * post[j];
    }
    const double* x = i == 0 ? cache.input.data() : cache.post[i - 1].data();
    const double* W = params.data() + off[i];
    double* gW = grad.data() + off[i];
    double* gb = gW + static_cast<std::size_t>(in) * out;
    dx.assign(in, 0.0);
    for (int j = 0; j < out; ++j) {
      const double d = dz[j];
      double* grow = gW + static_cast<std::size_t>(j) * in;
      const double* wrow = W + static_cast<std::size_t>(j) * in;
      for (int k = 0; k < in; ++k) {
        grow[k] += d * x[k];
        dx[k] += d * wrow[k];
      }
      gb[j] += d;
    }
    dz.swap(dx);
  }
}

// ---------------------------------------------------------------------------
// Heads

double categorical_log_prob(std::span<const double> logits, int action) {
  if (action < 0 || action >= static_cast<int>(logits.size()))
    throw std::domain_error("categorical_log_prob: action out of range");
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return logits[action] - m - std::log(sum);
}

double categorical_entropy(std::span<const double> logits) {
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  double h = 0.0;
  for (double z : logits) {
    const double lp = z - lse;
    h -= std::exp(lp) * lp;
  }
  return h;
}

int categorical_sample(std::span<const double> logits, Rng& rng) {
  if (!all_finite(logits))
    throw std::domain_error("categorical_sample: non-finite logits");
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double u = rng.uniform() * sum;
  double cum = 0.0;
  const int n = static_cast<int>(logits.size());
  for (int i = 0; i < n; ++i) {
    cum += std::exp(logits[i] - m);
    if (u < cum) return i;
  }
  return n - 1;
}

void categorical_log_prob_grad(std::span<const double> logits, int action,
                               double coeff, std::span<double> dlogits) {
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(logits[i] - m) / sum;
    dlogits[i] += coeff * ((static_cast<int>(i) == action ? 1.0 : 0.0) - p);
  }
}

void categorical_entropy_grad(std::span<const double> logits, double coeff,
                              std::span<double> dlogits) {
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  double h = 0.0;
  for (double z : logits) {
    const double lp = z - lse;
    h -= std::exp(lp) * lp;
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double lp = logits[i] - lse;
    dlogits[i] += coeff * (-std::exp(lp) * (lp + h));
  }
}

double gaussian_log_prob(std::span<const double> mean,
                         std::span<const double> log_std,
                         std::span<const double> action) {
  double lp = 0.0;
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double z = (action[d] - mean[d]) * std::exp(-log_std[d]);
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLogTwoPi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 * (1.0 + kLogTwoPi);
  return h;
}

std::vector<double> gaussian_sample(std::span<const double> mean,
                                    std::span<const double> log_std, Rng& rng,
                                    double lo, double hi) {
  std::vector<double> a(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double x = mean[d] + std::exp(log_std[d]) * rng.normal();
    a[d] = std::clamp(x, lo, hi);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Policy wrappers

namespace {

struct HeadView {
  std::span<const double> mlp_params;
  std::span<const double> log_std;  // empty for categorical
};

HeadView split_params(const PolicyNet& net, std::span<const double> params) {
  const std::size_t n_mlp = net.mlp.param_count();
  if (params.size() != static_cast<std::size_t>(net.param_count()))
    throw std::invalid_argument("policy params size mismatch");
  if (net.head.kind == HeadKind::gaussian)
    return {params.subspan(0, n_mlp), params.subspan(n_mlp)};
  return {params, {}};
}

}  // namespace

ActionSample policy_sample(const PolicyNet& net, std::span<const double> params,
                           std::span<const double> obs, Rng& rng) {
  const HeadView hv = split_params(net, params);
  std::vector<double> out(net.mlp.output_dim);
  mlp_forward(net.mlp, hv.mlp_params, obs, out);
  if (!all_finite(out))
    throw std::domain_error("policy_sample: non-finite head output");
  ActionSample s;
  if (net.head.kind == HeadKind::categorical) {
    s.action = categorical_sample(out, rng);
    s.log_prob = categorical_log_prob(out, s.action);
  } else {
    s.action_vec = gaussian_sample(out, hv.log_std, rng, net.head.action_low,
                                   net.head.action_high);
    s.log_prob = gaussian_log_prob(out, hv.log_std, s.action_vec);
  }
  return s;
}

ActionSample policy_mode(const PolicyNet& net, std::span<const double> params,
                         std::span<const double> obs) {
  const HeadView hv = split_params(net, params);
  std::vector<double> out(net.mlp.output_dim);
  mlp_forward(net.mlp, hv.mlp_params, obs, out);
  ActionSample s;
  if (net.head.kind == HeadKind::categorical) {
    s.action = static_cast<int>(
        std::max_element(out.begin(), out.end()) - out.begin());
    s.log_prob = categorical_log_prob(out, s.action);
  } else {
    s.action_vec.resize(out.size());
    for (std::size_t d = 0; d < out.size(); ++d)
      s.action_vec[d] =
          std::clamp(out[d], net.head.action_low, net.head.action_high);
    s.log_prob = gaussian_log_prob(out, hv.log_std, s.action_vec);
  }
  return s;
}

double policy_log_prob(const PolicyNet& net, std::span<const double> params,
                       std::span<const double> obs, int action,
                       std::span<const double> action_vec) {
  const HeadView hv = split_params(net, params);
  std::vector<double> out(net.mlp.output_dim);
  mlp_forward(net.mlp, hv.mlp_params, obs, out);
  if (net.head.kind == HeadKind::categorical)
    return categorical_log_prob(out, action);
  return gaussian_log_prob(out, hv.log_std, action_vec);
}

// ---------------------------------------------------------------------------
// Batched losses

namespace {

struct ChunkStats {
  double loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  long clipped = 0;
};

// Per-sample contribution to the policy loss gradient; `grad` spans the whole
// policy parameter vector (mlp block plus log-std tail for gaussian heads).
void policy_sample_grad(const PolicyNet& net, const HeadView& hv,
                        const PolicySample& s, double clip_eps,
                        double entropy_coef, double inv_batch,
                        std::span<double> grad, MlpCache& cache,
                        ChunkStats& stats) {
  std::vector<double> out(net.mlp.output_dim);
  mlp_forward(net.mlp, hv.mlp_params, s.obs, out, &cache);

  double log_prob, entropy;
  if (net.head.kind == HeadKind::categorical) {
    log_prob = categorical_log_prob(out, s.action);
    entropy = categorical_entropy(out);
  } else {
    log_prob = gaussian_log_prob(out, hv.log_std, s.action_vec);
    entropy = gaussian_entropy(hv.log_std);
  }

  const double log_ratio = log_prob - s.old_log_prob;
  const double ratio = std::exp(log_ratio);
  const double clipped_ratio =
      std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  const double surr1 = ratio * s.advantage;
  const double surr2 = clipped_ratio * s.advantage;
  const double objective = std::min(surr1, surr2);

  stats.loss += -(objective + entropy_coef * entropy);
  stats.entropy += entropy;
  stats.kl += ratio - 1.0 - log_ratio;
  if (std::abs(ratio - 1.0) > clip_eps) ++stats.clipped;

  // d objective / d log_prob: the clipped branch has zero gradient when it is
  // strictly active (the clip is saturated there).
  const double dobj_dlp = surr1 <= surr2 ? ratio * s.advantage : 0.0;
  const double coeff = -inv_batch * dobj_dlp;

  std::vector<double> dout(net.mlp.output_dim, 0.0);
  const std::size_t n_mlp = net.mlp.param_count();
  if (net.head.kind == HeadKind::categorical) {
    categorical_log_prob_grad(out, s.action, coeff, dout);
    categorical_entropy_grad(out, -inv_batch * entropy_coef, dout);
  } else {
    for (int d = 0; d < net.head.dim; ++d) {
      const double inv_var = std::exp(-2.0 * hv.log_std[d]);
      const double diff = s.action_vec[d] - out[d];
      dout[d] += coeff * diff * inv_var;
      // log-std gradient: log-prob term plus entropy bonus (dH/dlogstd = 1)
      grad[n_mlp + d] += coeff * (diff * diff * inv_var - 1.0) -
                         inv_batch * entropy_coef;
    }
  }
  mlp_backward(net.mlp, hv.mlp_params, cache, dout,
               grad.subspan(0, n_mlp));
}

PolicyLossStats finalize_policy_stats(const ChunkStats& total, long batch) {
  PolicyLossStats st;
  const double inv = 1.0 / static_cast<double>(batch);
  st.loss = total.loss * inv;
  st.entropy = total.entropy * inv;
  st.approx_kl = total.kl * inv;
  st.clip_fraction = static_cast<double>(total.clipped) * inv;
  return st;
}

}  // namespace

PolicyLossStats policy_loss_grad(const PolicyNet& net,
                                 std::span<const double> params,
                                 std::span<const PolicySample> batch,
                                 double clip_eps, double entropy_coef,
                                 std::span<double> grad) {
  if (batch.empty())
    throw std::invalid_argument("policy_loss_grad: empty batch");
  const HeadView hv = split_params(net, params);
  const long B = static_cast<long>(batch.size());
  const double inv_batch = 1.0 / static_cast<double>(B);
  const int n_params = net.param_count();
  const int n_chunks = static_cast<int>(std::min<long>(kGradChunks, B));

  std::vector<ParamVector> chunk_grad(n_chunks, ParamVector(n_params, 0.0));
  std::vector<ChunkStats> chunk_stats(n_chunks);

#pragma omp parallel for schedule(static)
  for (int c = 0; c < n_chunks; ++c) {
    const long lo = B * c / n_chunks;
    const long hi = B * (c + 1) / n_chunks;
    MlpCache cache;
    for (long i = lo; i < hi; ++i)
      policy_sample_grad(net, hv, batch[i], clip_eps, entropy_coef, inv_batch,
                         chunk_grad[c], cache, chunk_stats[c]);
  }

  ChunkStats total;
  for (int c = 0; c < n_chunks; ++c) {
    for (int k = 0; k < n_params; ++k) grad[k] += chunk_grad[c][k];
    total.loss += chunk_stats[c].loss;
    total.entropy += chunk_stats[c].entropy;
    total.kl += chunk_stats[c].kl;
    total.clipped += chunk_stats[c].clipped;
  }
  return finalize_policy_stats(total, B);
}

double value_loss_grad(const MlpSpec& spec, std::span<const double> params,
                       std::span<const ValueSample> batch,
                       std::span<double> grad) {
  if (batch.empty())
    throw std::invalid_argument("value_loss_grad: empty batch");
  const long B = static_cast<long>(batch.size());
  const double inv_batch = 1.0 / static_cast<double>(B);
  const int n_params = spec.param_count();
  const int n_chunks = static_cast<int>(std::min<long>(kGradChunks, B));

  std::vector<ParamVector> chunk_grad(n_chunks, ParamVector(n_params, 0.0));
  std::vector<double> chunk_loss(n_chunks, 0.0);

#pragma omp parallel for schedule(static)
  for (int c = 0; c < n_chunks; ++c) {
    const long lo = B * c / n_chunks;
    const long hi = B * (c + 1) / n_chunks;
    MlpCache cache;
    double v = 0.0;
    std::vector<double> dout(1);
    for (long i = lo; i < hi; ++i) {
      mlp_forward(spec, params, batch[i].obs, std::span<double>(&v, 1), &cache);
      const double err = v - batch[i].target;
      chunk_loss[c] += 0.5 * err * err;
      dout[0] = err * inv_batch;
      mlp_backward(spec, params, cache, dout, chunk_grad[c]);
    }
  }

  double loss = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    for (int k = 0; k < n_params; ++k) grad[k] += chunk_grad[c][k];
    loss += chunk_loss[c];
  }
  return loss * inv_batch;
}

namespace serial {

PolicyLossStats policy_loss_grad(const PolicyNet& net,
                                 std::span<const double> params,
                                 std::span<const PolicySample> batch,
                                 double clip_eps, double entropy_coef,
                                 std::span<double> grad) {
  if (batch.empty())
    throw std::invalid_argument("policy_loss_grad: empty batch");
  const HeadView hv = split_params(net, params);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  MlpCache cache;
  ChunkStats total;
  for (const PolicySample& s : batch)
    policy_sample_grad(net, hv, s, clip_eps, entropy_coef, inv_batch, grad,
                       cache, total);
  return finalize_policy_stats(total, static_cast<long>(batch.size()));
}

double value_loss_grad(const MlpSpec& spec, std::span<const double> params,
                       std::span<const ValueSample> batch,
                       std::span<double> grad) {
  if (batch.empty())
    throw std::invalid_argument("value_loss_grad: empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  MlpCache cache;
  double loss = 0.0;
  double v = 0.0;
  std::vector<double> dout(1);
  for (const ValueSample& s : batch) {
    mlp_forward(spec, params, s.obs, std::span<double>(&v, 1), &cache);
    const double err = v - s.target;
    loss += 0.5 * err * err;
    dout[0] = err * inv_batch;
    mlp_backward(spec, params, cache, dout, grad);
  }
  return loss * inv_batch;
}

}  // namespace serial

void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const std::size_t n = params.size();
#pragma omp parallel for schedule(static) if (n >= 65536)
  for (long k = 0; k < static_cast<long>(n); ++k) {
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grad[k];
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    params[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace rsrl
