#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace webstress::perturb {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t x);

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;  // fnv1a of the task id
  std::uint64_t step = 0;
};

// xoshiro256** seeded through SplitMix64 from the mixed key
// (seed, episode, step, fnv1a(purpose)). The algorithm is pinned in
// docs/rng.md; identical keys give identical sequences on every platform.
class RngStream {
 public:
  RngStream(const StreamKey& key, std::string_view purpose);

  std::uint64_t next();
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace webstress::perturb
