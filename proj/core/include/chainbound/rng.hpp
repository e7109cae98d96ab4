#pragma once

#include <cstdint>

namespace chainbound {

// 64-bit avalanche finalizer (SplitMix64 / Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Absorb one word into a running key. Each word is whitened before the
// xor so that permuted tuples do not collide.
constexpr std::uint64_t absorb(std::uint64_t key, std::uint64_t word) noexcept {
  return mix64(key ^ mix64(word + 0x9E3779B97F4A7C15ULL));
}

// Job tags keeping streams for different purposes disjoint even when the
// (replication, step, inner) indices coincide.
enum class StreamPurpose : std::uint64_t {
  path_noise = 1,
  initial_state = 2,
  inner_copy = 3,
  future_branch = 4,
  mean_batch = 5,
  tail_batch = 6,
  bootstrap = 7,
  diagnostic = 8,
  constants = 9,
};

// Address of one logical random stream. Equal keys reproduce the same
// draws bit for bit; distinct keys give streams with no counter reuse.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t experiment = 0;
  StreamPurpose purpose = StreamPurpose::path_noise;
  std::uint64_t replication = 0;
  std::uint64_t step = 0;
  std::uint64_t inner = 0;

  constexpr std::uint64_t fold() const noexcept {
    std::uint64_t k = mix64(master_seed + 0x6A09E667F3BCC909ULL);
    k = absorb(k, experiment);
    k = absorb(k, static_cast<std::uint64_t>(purpose));
    k = absorb(k, replication);
    k = absorb(k, step);
    k = absorb(k, inner);
    return k;
  }
};

// Counter-based generator: output i is mix64(key + gamma * i), i.e. a
// keyed SplitMix64 sequence. There is no hidden state beyond the
// counter, so draws are reproducible from (key, index) alone.
class Stream {
 public:
  Stream() = default;
  explicit Stream(StreamKey key) : key_(key.fold()) {}
  explicit Stream(std::uint64_t folded_key) : key_(folded_key) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix64(key_ + counter_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) noexcept { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller; both uniforms are consumed and the
  // sine partner discarded so the draw count per call is fixed.
  double gaussian() noexcept;
  double gaussian(double mu, double sigma) noexcept { return mu + sigma * gaussian(); }

  double exponential() noexcept;  // mean 1

  bool bernoulli(double q) noexcept { return uniform01() < q; }
  double rademacher() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

  long long poisson(double lambda) noexcept;

  // One-sided Pareto with tail index alpha and scale (minimum) xm.
  double pareto(double alpha, double xm) noexcept;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream factory carrying the master seed and experiment id. All
// randomness in the toolkit flows through derived streams, which is what
// makes results independent of scheduling and worker count.
struct RngPolicy {
  std::uint64_t master_seed = 0;
  std::uint64_t experiment_id = 0;

  Stream stream(StreamPurpose purpose, std::uint64_t replication = 0,
                std::uint64_t step = 0, std::uint64_t inner = 0) const {
    return Stream(StreamKey{master_seed, experiment_id, purpose, replication, step, inner});
  }

  std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t replication = 0,
                          std::uint64_t step = 0, std::uint64_t inner = 0) const {
    return StreamKey{master_seed, experiment_id, purpose, replication, step, inner}.fold();
  }
};

}  // namespace chainbound
