#pragma once

// Reference implementations and exhaustive enumerators used only by tests.
// These are independent oracles: they re-derive the per-step loops directly
// from their tabular/factored definitions rather than going through the
// generic partition-set machinery.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "entrocoup/dist.hpp"
#include "entrocoup/partition.hpp"
#include "entrocoup/seqmodel.hpp"
#include "entrocoup/session.hpp"

namespace entrocoup::testing {

struct DirectTranscript {
  Sequence y;
  std::vector<std::vector<double>> posteriors;  // tabular: one entry; factored: per component
};

// Tabular per-step loop: couple the full posterior over outcome indices with
// the channel's next-symbol distribution, sample the symbol conditioned on
// the outcome, update by Bayes.
DirectTranscript directTabularEncode(const std::vector<double>& prior,
                                     const AutoregressiveSource& nu, std::size_t xIdx, int m,
                                     std::uint64_t seed);

// Factored per-step loop: pick the component with maximum posterior entropy
// (ties to the lowest index), couple it, sample, update that component.
DirectTranscript directFactoredEncode(const std::vector<Dist>& components,
                                      const AutoregressiveSource& nu, const Sequence& x, int m,
                                      std::uint64_t seed);

// Exhaustively enumerated joint distribution gamma(x, y) induced by the
// session over all channel sequences of length m with positive probability.
struct JointEnumeration {
  std::vector<Sequence> ys;
  std::vector<double> nuProb;                  // nu(y) per sequence
  std::vector<std::vector<double>> joint;      // [yIdx][xIdx]
};

JointEnumeration enumerateJoint(std::shared_ptr<const AutoregressiveSource> nu,
                                const std::function<std::unique_ptr<PartitionSet>()>& fresh,
                                const std::vector<Sequence>& space,
                                const std::vector<double>& prior, int m, bool merging);

// Random helpers shared across suites (all deterministic given the rng).
Dist randomDist(CounterRng& rng, int n);
// Random order-1 conditional model over symbols named "0".."V-1"; rows are
// resampled until their entropy reaches minEntropyBits.
std::shared_ptr<NgramModel> randomOrder1Model(CounterRng& rng, int vocab, int maxLen,
                                              double minEntropyBits = 0.0);
// Random order-1 message model; vocab counts message symbols, so with EOS the
// table spans vocab + 1 symbols and messages may be any length up to maxLen.
std::shared_ptr<NgramModel> randomMessageModel(CounterRng& rng, int vocab, int maxLen,
                                               bool withEos);

// From-scratch Bayes over the enumerated message space, mirroring the
// prefix-tree block semantics. Used to check lazily propagated posteriors,
// exhaustive max-entropy scans, and pruning bounds.
class TreeOracle {
 public:
  TreeOracle(const AutoregressiveSource& mu, int extSlots, Symbol eosSlot);

  void applyLikelihood(const Sequence& prefix, const std::vector<double>& likelihood);
  std::vector<double> blockMassesAt(const Sequence& prefix) const;
  double entropyAt(const Sequence& prefix) const;
  std::size_t slotOf(const Sequence& prefix, const Sequence& x) const;

  const std::vector<Sequence>& messages() const { return messages_; }
  const std::vector<Sequence>& prefixes() const { return prefixes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  int extSlots_;
  Symbol eosSlot_;
  std::vector<Sequence> messages_;
  std::vector<double> weights_;
  std::vector<Sequence> prefixes_;
};

bool startsWith(const Sequence& seq, const Sequence& prefix);

}  // namespace entrocoup::testing
