#pragma once

#include <cstdint>
#include <string>

#include "rsrl/neural.hpp"

namespace rsrl {

// On-disk agent snapshot. Binary little-endian layout (see docs/FORMATS.md):
//   magic "RSRLCKPT", u32 version, u32 head kind, f64 action range lo/hi,
//   f64 tau, u64 step count, then two network blocks (policy, value), each:
//   u32 input_dim, u32 n_hidden, u32 hidden[...], u32 output_dim,
//   u64 param count, f64 params[...].
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  PolicyNet policy;
  MlpSpec value;
  double tau = 0.5;
  std::uint64_t steps = 0;
  ParamVector policy_params;
  ParamVector value_params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws std::runtime_error naming the file and the offending field on any
// structural problem.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rsrl
