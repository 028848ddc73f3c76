#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "entrocoup/dist.hpp"
#include "entrocoup/seqmodel.hpp"

namespace entrocoup {

// Concrete partition of an enumerated outcome space: disjoint blocks whose
// union covers it. Mostly used for inspection and invariant checks; the
// coupling machinery works through PartitionSet handles instead.
struct Partition {
  std::vector<std::vector<std::size_t>> blocks;  // outcome indices per block
  std::vector<std::size_t> blockOfOutcome;       // outcome index -> block index

  std::size_t blockOf(std::size_t outcome) const { return blockOfOutcome.at(outcome); }
};

// A family of partitions of the message space together with the posterior
// state the coupling loop needs: maximum-entropy selection, per-block
// posterior masses, membership queries, and Bayes updates. Implementations
// are exclusively owned by one session; they are not thread-safe.
class PartitionSet {
 public:
  virtual ~PartitionSet() = default;

  // Identifier of a partition whose block posterior has maximum entropy.
  // Ties are resolved deterministically so decode replays encode.
  virtual std::size_t selectPartition() = 0;

  // Posterior mass of every block of partition pid, summing to 1.
  virtual std::vector<double> blockMasses(std::size_t pid) const = 0;

  // Index of the block of partition pid containing outcome x.
  virtual std::size_t blockOf(std::size_t pid, const Sequence& x) const = 0;

  // Bayes update of partition pid: numerators[b] is the old mass times the
  // block likelihood (the joint column of the step coupling). Blocks absent
  // from the coupling carry zero and stay at zero afterwards.
  virtual void applyEvidence(std::size_t pid, const std::vector<double>& numerators) = 0;

  // MAP outcome under the current posterior. beamWidth only matters for
  // partition sets that estimate sequences by tree descent.
  virtual Sequence mapEstimate(int beamWidth) = 0;
  Sequence mapEstimate() { return mapEstimate(1); }

  // log2 prior probability of outcome x.
  virtual double priorLog2(const Sequence& x) const = 0;
};

// Singleton-block partition set: a single partition whose blocks are the
// individual outcomes, so the block posterior is the full posterior over the
// tabulated space.
std::unique_ptr<PartitionSet> makeSingletonPartitionSet(Dist prior);
std::unique_ptr<PartitionSet> makeSingletonPartitionSet(const AutoregressiveSource& mu);

inline constexpr std::size_t kTabulationCap = 1000000;

// Per-component partition set for factorable messages: partition i groups
// outcomes by their i-th component; selection picks the component of maximum
// posterior entropy, ties to the lowest index.
std::unique_ptr<PartitionSet> makeFactoredPartitionSet(std::vector<Dist> components);

// Builds the concrete partition pid over an enumerated message space.
Partition materializePartition(const PartitionSet& set, std::size_t pid,
                               const std::vector<Sequence>& space);

// Shared Bayes-update arithmetic: validates nonnegativity and divides by the
// sum accumulated in index order. Throws DecodeError when all mass vanishes.
std::vector<double> normalizeEvidence(const std::vector<double>& numerators);

}  // namespace entrocoup
