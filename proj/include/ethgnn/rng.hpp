#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ethgnn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream seed derived from a master seed. Streams are numbered so
// adding a consumer never shifts the draws of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (stream + 1) * 0xd1b54a32d192ed03ULL;
  return splitmix64(s);
}

inline std::uint64_t mix3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  s ^= splitmix64(a);
  s ^= splitmix64(b) << 1;
  return splitmix64(s);
}

// Deterministic RNG. All draws are spelled out on top of std::mt19937_64
// (whose output sequence the standard fixes) instead of std::*_distribution,
// whose results vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, n). Modulo bias is negligible for n << 2^64.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; always consumes exactly two draws.
  double normal() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Index k with probability cum_weights[k] - cum_weights[k-1], given a
  // non-decreasing cumulative weight table.
  std::size_t pick_cumulative(const std::vector<double>& cum_weights) {
    const double r = uniform() * cum_weights.back();
    std::size_t lo = 0, hi = cum_weights.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cum_weights[mid] > r) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ethgnn
