#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mcsforge {

// Seedable RNG wrapper. All sampling goes through the helpers below so
// that streams are reproducible regardless of libstdc++ distribution
// internals changing between releases.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    // rejection sampling to avoid modulo bias
    const uint64_t limit = UINT64_MAX - UINT64_MAX % static_cast<uint64_t>(n);
    uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return static_cast<int>(r % static_cast<uint64_t>(n));
  }

  // sample index from an (unnormalized is fine) probability vector
  int categorical(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  double normal() {
    // Box-Muller, one value per call (spare discarded for stream simplicity)
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // derive an independent stream, e.g. per worker
  Rng split(uint64_t stream_id) {
    uint64_t s = next_u64() ^ (stream_id * 0x9e3779b97f4a7c15ULL + 0xbf58476d1ce4e5b9ULL);
    return Rng(s);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcsforge
