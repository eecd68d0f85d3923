#include "rsrl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rsrl {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'R', 'L', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

struct Writer {
  std::ofstream out;

  void u32(std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
  void u64(std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
  void f64(double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
  void f64s(const ParamVector& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * 8));
  }
};

struct Reader {
  std::ifstream in;
  std::string path;

  void need(std::size_t n, const char* field) {
    if (!in || in.eof())
      throw std::runtime_error("checkpoint " + path + ": truncated at " +
                               field);
    (void)n;
  }
  std::uint32_t u32(const char* field) {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw std::runtime_error("checkpoint " + path + ": bad " + field);
    return v;
  }
  std::uint64_t u64(const char* field) {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("checkpoint " + path + ": bad " + field);
    return v;
  }
  double f64(const char* field) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("checkpoint " + path + ": bad " + field);
    return v;
  }
  ParamVector f64s(std::uint64_t n, const char* field) {
    if (n > (1ull << 32))
      throw std::runtime_error("checkpoint " + path + ": implausible " +
                               std::string(field) + " length");
    ParamVector v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * 8));
    if (!in) throw std::runtime_error("checkpoint " + path + ": bad " + field);
    return v;
  }
};

void write_mlp(Writer& w, const MlpSpec& spec, const ParamVector& params) {
  w.u32(static_cast<std::uint32_t>(spec.input_dim));
  w.u32(static_cast<std::uint32_t>(spec.hidden.size()));
  for (int h : spec.hidden) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(spec.output_dim));
  w.u64(params.size());
  w.f64s(params);
}

MlpSpec read_mlp_spec(Reader& r, const char* which) {
  MlpSpec spec;
  spec.input_dim = static_cast<int>(r.u32("input_dim"));
  const std::uint32_t nh = r.u32("hidden count");
  if (nh > 64)
    throw std::runtime_error("checkpoint " + r.path + ": implausible " +
                             which + " hidden count");
  spec.hidden.clear();
  for (std::uint32_t i = 0; i < nh; ++i)
    spec.hidden.push_back(static_cast<int>(r.u32("hidden dim")));
  spec.output_dim = static_cast<int>(r.u32("output_dim"));
  spec.validate();
  return spec;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Writer w{std::ofstream(path, std::ios::binary)};
  if (!w.out)
    throw std::runtime_error("checkpoint " + path + ": cannot open for write");
  w.out.write(kMagic, sizeof(kMagic));
  w.u32(Checkpoint::kVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.policy.head.kind));
  w.f64(ckpt.policy.head.action_low);
  w.f64(ckpt.policy.head.action_high);
  w.f64(ckpt.tau);
  w.u64(ckpt.steps);
  write_mlp(w, ckpt.policy.mlp, ckpt.policy_params);
  write_mlp(w, ckpt.value, ckpt.value_params);
  if (!w.out) throw std::runtime_error("checkpoint " + path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r{std::ifstream(path, std::ios::binary), path};
  if (!r.in) throw std::runtime_error("checkpoint " + path + ": cannot open");
  char magic[8];
  r.in.read(magic, 8);
  if (!r.in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint " + path + ": bad magic");
  const std::uint32_t version = r.u32("version");
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint " + path + ": unsupported version " +
                             std::to_string(version));
  Checkpoint ckpt;
  const std::uint32_t head = r.u32("head kind");
  if (head > 1)
    throw std::runtime_error("checkpoint " + path + ": bad head kind");
  ckpt.policy.head.kind = static_cast<HeadKind>(head);
  ckpt.policy.head.action_low = r.f64("action_low");
  ckpt.policy.head.action_high = r.f64("action_high");
  ckpt.tau = r.f64("tau");
  if (!(ckpt.tau > 0.0 && ckpt.tau < 1.0))
    throw std::runtime_error("checkpoint " + path + ": tau out of range");
  ckpt.steps = r.u64("steps");

  ckpt.policy.mlp = read_mlp_spec(r, "policy");
  ckpt.policy.head.dim = ckpt.policy.mlp.output_dim;
  std::uint64_t n = r.u64("policy param count");
  ckpt.policy_params = r.f64s(n, "policy params");
  if (ckpt.policy_params.size() !=
      static_cast<std::size_t>(ckpt.policy.param_count()))
    throw std::runtime_error("checkpoint " + path +
                             ": policy param count mismatch");

  ckpt.value = read_mlp_spec(r, "value");
  n = r.u64("value param count");
  ckpt.value_params = r.f64s(n, "value params");
  if (ckpt.value_params.size() !=
      static_cast<std::size_t>(ckpt.value.param_count()))
    throw std::runtime_error("checkpoint " + path +
                             ": value param count mismatch");

  r.in.peek();
  if (!r.in.eof())
    throw std::runtime_error("checkpoint " + path + ": trailing bytes");
  return ckpt;
}

}  // namespace rsrl
