#pragma once

#include <cstdint>
#include <vector>

namespace entrocoup {

// Counter-based generator: output i is mix(key, i), so the stream is a pure
// function of (seed, counter) and can be replayed or split without shared
// state. Substreams come from derive(tag), which rekeys with the tag; the
// experiment drivers use derive(trialIndex) so trials are independent of
// scheduling order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(seed) {}

  std::uint64_t nextU64() { return mix(key_, counter_++); }

  // Uniform in [0, 1), 53-bit resolution.
  double nextDouble() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t nextBelow(std::uint64_t n) {
    return static_cast<std::uint64_t>(nextDouble() * static_cast<double>(n)) % n;
  }

  CounterRng derive(std::uint64_t tag) const { return CounterRng(mix(key_, kGolden ^ tag)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t z = key + (counter + 1) * kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Index sample from a cumulative walk over probs; u in [0,1). Falls back to
// the last positive entry if accumulated rounding leaves u unmatched.
int sampleIndex(const std::vector<double>& probs, double u);

}  // namespace entrocoup
