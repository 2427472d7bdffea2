#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "opkm/core.hpp"

namespace opkm {

// Counter-based randomness. Every draw is a pure function of
// (seed, stream, counter), so any value can be regenerated independently of
// how work is blocked or threaded, and results are identical across
// platforms and standard libraries. The mixer is the SplitMix64 finalizer.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Value at position i of the stream. Two rounds of mixing decorrelate the
// three coordinates well beyond what the estimators here can detect.
inline std::uint64_t hash_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
  std::uint64_t h = mix64(seed + kGolden * (stream + 1));
  return mix64(h ^ (kGolden * (i + 1)));
}

// Fixed stream ids, one per consumer of randomness. Sub-streams (per ring,
// per restart, per trial, per sketch column) are composed with sub_stream.
enum class Stream : std::uint64_t {
  srht_signs = 1,
  srht_columns = 2,
  gaussian_sketch = 3,
  nystrom_columns = 4,
  rings = 5,
  kmeans_seeding = 6,
  bound_check = 7,
};

inline std::uint64_t sub_stream(Stream s, std::uint64_t sub) {
  return (static_cast<std::uint64_t>(s) << 32) | sub;
}

// Sequential view over one stream: uniform, gaussian and index draws.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}
  CounterRng(std::uint64_t seed, Stream s, std::uint64_t sub = 0)
      : CounterRng(seed, sub_stream(s, sub)) {}

  std::uint64_t next_u64() { return hash_at(seed_, stream_, counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by 128-bit multiply.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double rad = std::sqrt(-2.0 * std::log1p(-u1));
    double ang = 2.0 * M_PI * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Sign for row index i of the SRHT diagonal, addressable out of order.
inline double srht_sign(std::uint64_t seed, std::uint64_t i) {
  return (hash_at(seed, static_cast<std::uint64_t>(Stream::srht_signs), i) >> 63)
             ? -1.0
             : 1.0;
}

// k distinct indices from [0, n), uniformly without replacement, returned
// sorted ascending. Floyd's algorithm; draw count depends only on k.
inline std::vector<Index> sample_without_replacement(Index n, Index k, CounterRng& rng) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: k out of range");
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (Index j = n - k; j < n; ++j) {
    std::uint64_t t = rng.uniform_below(static_cast<std::uint64_t>(j) + 1);
    if (!chosen.insert(t).second) chosen.insert(static_cast<std::uint64_t>(j));
  }
  std::vector<Index> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace opkm
