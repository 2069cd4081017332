#pragma once

#include <cmath>
#include <cstdint>

namespace rspg {

// Counter-based random stream. Each stream is identified by a 64-bit key;
// output i is a strong mix of (key, i), so streams can be split
// hierarchically and consumed in any order across threads without
// changing the values produced for a fixed master seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream from_seed(std::uint64_t master_seed) {
    return RngStream(mix(0x9e3779b97f4a7c15ULL, master_seed));
  }

  // Derived stream for (replication, iteration, sample, ...) indices.
  RngStream child(std::uint64_t index) const {
    return RngStream(mix(key_, index));
  }

  std::uint64_t next_u64() { return mix(key_, counter_++); }

  // Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached per stream.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = next_uniform();
    } while (u1 <= 0.0);
    u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  // splitmix64-style finalizer applied to key + golden-ratio-weighted counter.
  static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rspg
