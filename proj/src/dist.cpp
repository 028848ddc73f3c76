#include "entrocoup/dist.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace entrocoup {

namespace {
constexpr double kEntryTolerance = 1e-12;  // rounding slack on individual entries
}

Dist::Dist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("Dist: empty probability vector");
  }
  double sum = 0.0;
  for (double& p : probs_) {
    if (p < -kEntryTolerance || p > 1.0 + kEntryTolerance) {
      throw std::invalid_argument("Dist: entry " + std::to_string(p) + " outside [0, 1]");
    }
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("Dist: entries sum to " + std::to_string(sum) +
                                ", more than 1e-9 from 1");
  }
  // Renormalize only beyond accumulated-rounding scale so that constructing
  // a Dist from already-normalized entries is the identity (serialization
  // round-trips depend on this).
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& p : probs_) p /= sum;
  }
}

Dist Dist::uniform(std::size_t n) {
  return Dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Dist Dist::pointMass(std::size_t n, std::size_t at) {
  std::vector<double> p(n, 0.0);
  p.at(at) = 1.0;
  return Dist(std::move(p));
}

int Dist::argmax() const {
  int best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = static_cast<int>(i);
  }
  return best;
}

double entropyBits(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double entropy(const Dist& d) { return entropyBits(d.probs()); }

Dist normalizedDist(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) throw std::invalid_argument("normalizedDist: nonpositive total");
  for (double& w : weights) w /= sum;
  return Dist(std::move(weights));
}

}  // namespace entrocoup
