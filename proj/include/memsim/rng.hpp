#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace memsim {

// Derives a stream seed from a master seed and a stable tag string, so that
// parallel components (devices, sweep trials, dataset splits) draw from
// disjoint streams while the whole pipeline stays reproducible from one seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Seeded random stream. Distributions are implemented by hand on top of
// mt19937_64 so the draw sequence is identical across standard libraries;
// std::normal_distribution and friends are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer on [0, n), unbiased via rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller. Unbuffered: two uniforms per draw.
  double normal();

  // Standard normal rejection-sampled into [lo, hi].
  double truncated_normal(double lo, double hi);

private:
  std::mt19937_64 engine_;
};

}  // namespace memsim
