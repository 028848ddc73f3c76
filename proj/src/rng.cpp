#include "entrocoup/rng.hpp"

namespace entrocoup {

int sampleIndex(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  int lastPositive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    lastPositive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return lastPositive;
  }
  return lastPositive;
}

}  // namespace entrocoup
