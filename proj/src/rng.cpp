#include "memsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace memsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix64(splitmix64(master) ^ fnv1a(tag));
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject draws under (2^64 mod n) so the remainder is uniform.
  std::uint64_t cutoff = (0 - n) % n;
  for (;;) {
    std::uint64_t r = engine_();
    if (r >= cutoff) {
      return r % n;
    }
  }
}

double Rng::normal() {
  // uniform01() can return 0; shift to (0, 1] for the log.
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::truncated_normal(double lo, double hi) {
  for (;;) {
    double z = normal();
    if (z >= lo && z <= hi) {
      return z;
    }
  }
}

}  // namespace memsim
