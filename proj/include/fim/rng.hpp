#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "fim/errors.hpp"

namespace fim {

// splitmix64 step; the standard mixer used to spread seed entropy.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent child seed from (seed, tag). Chained calls give
// per-repetition, per-individual, per-sample substreams so results do not
// depend on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (tag + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(seed, a, b), c);
}

// Deterministic random stream. All draws go through raw engine words so two
// builds of this library produce bit-identical streams; the standard library
// distributions are implementation-defined and are deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in {0, ..., n-1}. Lemire multiply-shift; bias is < n / 2^64.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw InternalError("next_below: empty range");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::mt19937_64 engine_;
};

// Index in [0, weights.size()) drawn with probability weights[i] / total.
// total must be the positive sum of the weights.
inline std::size_t weighted_draw(std::span<const double> weights, double total, Rng& rng) {
  if (!(total > 0.0)) throw InternalError("weighted_draw: nonpositive total");
  double r = rng.next_double() * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (r < acc) return i;
  }
  if (last_positive == weights.size()) throw InternalError("weighted_draw: no positive weight");
  return last_positive;  // float round-off put r at the very top of the range
}

}  // namespace fim
