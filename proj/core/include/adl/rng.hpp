#pragma once

#include <cmath>
#include <cstdint>

namespace adl {

// Counter-based splittable RNG. A stream is identified by a 64-bit key; child
// streams are derived by hashing (key, index), so per-trial streams can be
// created from (master_seed, trial_index) with no sequential dependence.
// Sampling is a pure function of the stream state: the same (seed, path)
// always yields the same sequence, regardless of thread interleaving.
class RngStream {
public:
  explicit RngStream(std::uint64_t master_seed)
      : key_(mix64(mix64(master_seed) ^ 0x6A09E667F3BCC909ULL)) {}

  // Derivation is order-sensitive: child(a).child(b) != child(b).child(a).
  RngStream child(std::uint64_t index) const {
    RngStream s(*this);
    s.key_ = mix64(key_ ^ mix64(index + 0x9E3779B97F4A7C15ULL));
    s.counter_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    std::uint64_t c = counter_++;
    return mix64(key_ + mix64(c ^ key_));
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; two uniforms consumed per call.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    // 1 - u1 in (0, 1], avoids log(0)
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace adl
