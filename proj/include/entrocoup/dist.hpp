#pragma once

#include <cstddef>
#include <vector>

namespace entrocoup {

// Tolerances shared across the library.
inline constexpr double kSumTolerance = 1e-9;    // accepted drift of a probability vector's sum
inline constexpr double kMassEpsilon = 1e-15;    // below this, mass is treated as zero and pruned

// Finite probability vector over outcome indices 0..size-1. Entries are
// validated and the vector renormalized at construction; instances are
// immutable afterwards and safe to share across threads.
class Dist {
 public:
  Dist() = default;
  explicit Dist(std::vector<double> probs);

  static Dist uniform(std::size_t n);
  static Dist pointMass(std::size_t n, std::size_t at);

  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  bool empty() const { return probs_.empty(); }

  int argmax() const;  // ties resolved to the lowest index

  bool operator==(const Dist& other) const = default;

 private:
  std::vector<double> probs_;
};

// Shannon entropy in bits, with 0 log 0 := 0.
double entropy(const Dist& d);
double entropyBits(const std::vector<double>& probs);

// Divides by the sum (accumulated in index order) and wraps in a Dist.
Dist normalizedDist(std::vector<double> weights);

}  // namespace entrocoup
