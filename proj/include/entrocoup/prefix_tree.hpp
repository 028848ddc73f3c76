#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "entrocoup/partition.hpp"
#include "entrocoup/seqmodel.hpp"

namespace entrocoup {

// Entropy bound for a distribution over at most kappa positive entries, one
// of which has mass at least q: the remaining mass spread uniformly over the
// other kappa-1 entries maximizes the entropy. Monotonically nonincreasing
// in q on [1/kappa, 1]; q below 1/kappa is a domain error.
double entropyUpperBound(double q, int kappa);

// Complement-rule rescale of a node's block masses: the slot facing the
// updated neighbor is pinned to newSlotMass and the remaining blocks keep
// their relative proportions from the older state.
std::vector<double> complementRescale(const std::vector<double>& oldMasses,
                                      std::size_t slotToward, double newSlotMass);

// A branch pruned during max-entropy search, with the bound that excluded it.
struct PrunedBranch {
  std::size_t fromNode;
  bool towardParent;
  Symbol viaSymbol;  // valid when !towardParent
  double bound;
};

struct SearchReport {
  std::size_t selected = 0;
  double entropy = 0.0;
  std::size_t nodesTouched = 0;  // nodes evaluated (refreshed + scored)
  std::vector<PrunedBranch> pruned;
};

// Prefix-tree partition set: one partition per prefix of the message space,
// with blocks for each single-symbol extension, the exact match, and the
// non-extensions. Posteriors live on lazily materialized nodes; moving
// between neighbors propagates by the complement rule, and max-entropy
// selection searches outward from the previous working prefix, pruning
// branches whose entropy bound cannot beat the best node found.
//
// Messages are symbol sequences without the EOS symbol. Models without an
// EOS encode fixed-length messages (|x| = maxLen); models with one encode
// variable-length messages (|x| <= maxLen, EOS forced at maxLen).
class PrefixTreeSet final : public PartitionSet {
 public:
  PrefixTreeSet(std::shared_ptr<const AutoregressiveSource> mu, bool recordPruned = false);

  std::size_t selectPartition() override;
  std::vector<double> blockMasses(std::size_t pid) const override;
  std::size_t blockOf(std::size_t pid, const Sequence& x) const override;
  void applyEvidence(std::size_t pid, const std::vector<double>& numerators) override;
  Sequence mapEstimate(int beamWidth) override;
  double priorLog2(const Sequence& x) const override;

  // Block-slot layout: slots 0..extSlots()-1 follow next-symbol ids (the EOS
  // slot is the exact-match block), the last slot is the non-extension block.
  int extSlots() const { return extSlots_; }
  Symbol eosSlot() const { return eosSlot_; }
  std::size_t notExtSlot() const { return static_cast<std::size_t>(extSlots_); }
  int kappa() const { return kappa_; }

  std::size_t materializedCount() const { return nodes_.size(); }
  std::size_t workingNode() const { return working_; }
  const Sequence& nodePrefix(std::size_t pid) const { return nodes_.at(pid).prefix; }
  std::optional<std::size_t> findNode(const Sequence& prefix) const;
  const SearchReport& lastReport() const { return report_; }
  std::uint64_t totalNodesTouched() const { return totalTouched_; }
  std::uint64_t searchCount() const { return searches_; }

 private:
  struct Node {
    Sequence prefix;
    int parent = -1;
    Symbol viaSymbol = -1;
    std::map<Symbol, std::size_t> children;
    std::vector<double> masses;
    std::uint64_t stamp = 0;
    Dist priorNext;  // effective mu(.|prefix) over extension slots
  };

  Dist effectiveNext(const Sequence& prefix) const;
  std::size_t materializeChild(std::size_t pid, Symbol s) const;
  void refreshFrom(std::size_t current, std::size_t stale) const;
  void ensureCurrent(std::size_t pid) const;
  double nodeEntropy(std::size_t pid) const { return entropyBits(nodes_[pid].masses); }
  bool keyLess(std::size_t a, std::size_t b) const;

  std::shared_ptr<const AutoregressiveSource> mu_;
  int extSlots_;
  Symbol eosSlot_;
  int kappa_;
  bool recordPruned_;
  mutable std::vector<Node> nodes_;
  std::size_t working_ = 0;
  std::uint64_t epoch_ = 0;
  SearchReport report_;
  std::uint64_t totalTouched_ = 0;
  std::uint64_t searches_ = 0;
};

std::unique_ptr<PrefixTreeSet> makePrefixTreePartitionSet(
    std::shared_ptr<const AutoregressiveSource> mu, bool recordPruned = false);

}  // namespace entrocoup
