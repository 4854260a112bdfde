#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qos {

// Seed plus stream id. Identical (seed, stream) pairs reproduce the exact
// same draw sequence; independent replications get distinct streams.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// mt19937_64 with the derived draws (uniform double, bounded int, shuffle)
// implemented here. The standard <random> distributions are
// implementation-defined, so they are avoided for anything that must be
// reproducible.
class Rng {
 public:
  explicit Rng(RngSpec spec) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(spec.stream),
                      static_cast<std::uint32_t>(spec.stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in [0, n). Modulo bias is ~n/2^64, irrelevant at these sizes.
  std::uint64_t next_below(std::uint64_t n) { return engine_() % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qos
