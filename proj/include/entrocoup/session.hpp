#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "entrocoup/partition.hpp"
#include "entrocoup/rng.hpp"
#include "entrocoup/seqmodel.hpp"

namespace entrocoup {

struct SessionConfig {
  std::uint64_t seed = 0;
  int horizon = 0;          // number of channel symbols; 0 means nu's maxLen
  bool merging = false;
  int beamWidth = 1;        // MAP estimation beam for tree-structured posteriors
  bool recordTrace = false; // keep per-round block conditionals (tests, enumeration)
};

// One coupling round inside an iteration: the selected partition and, for
// every block, the probability of the realized symbol group given that block.
struct RoundRecord {
  std::size_t pid = 0;
  std::vector<double> blockConditional;
};

struct StepRecord {
  Symbol emitted = -1;
  double nuLog2 = 0.0;   // log2 nu(y_j | y_{1:j-1})
  double tailLog2 = 0.0; // block-independent within-group factor, usually 0
  std::vector<RoundRecord> rounds;
  // Posterior-marginalized symbol distribution of the step coupling; equals
  // the channel conditional by the coupling property. Plain path only.
  std::vector<double> channelMarginal;
};

// One in-progress iterative-coupling encode or decode. Each step selects the
// maximum-entropy partition, couples its block posterior with the channel's
// next-symbol distribution, samples (encode) or conditions on (decode) the
// symbol, and applies the Bayes update. With merging enabled, symbol
// realizations with identical posterior updates are grouped and re-coupled
// until a single symbol remains.
//
// A session is single-threaded and exclusively owns its partition set. Encode
// and decode with identical configuration replay identical partition choices
// and couplings.
class CouplerSession {
 public:
  CouplerSession(std::shared_ptr<const AutoregressiveSource> nu,
                 std::unique_ptr<PartitionSet> partitions, SessionConfig cfg);
  // Channel conditionals supplied per step instead of by a model; cfg.horizon
  // must be positive.
  CouplerSession(std::unique_ptr<PartitionSet> partitions, SessionConfig cfg);

  // Emit the next channel symbol for message x (same x every step).
  Symbol encodeStep(const Sequence& x);
  // Condition the posterior on an observed channel symbol.
  void observeStep(Symbol y);
  // Same, with this step's channel conditional supplied by the caller.
  Symbol encodeStepWith(const Dist& nuStep, const Sequence& x);
  void observeStepWith(const Dist& nuStep, Symbol y);

  int iteration() const { return static_cast<int>(emitted_.size()); }
  int horizon() const { return horizon_; }
  const Sequence& emitted() const { return emitted_; }

  PartitionSet& partitions() { return *partitions_; }
  const PartitionSet& partitions() const { return *partitions_; }
  Sequence mapEstimate() { return partitions_->mapEstimate(cfg_.beamWidth); }

  const std::vector<StepRecord>& trace() const { return trace_; }
  // Entropy of the selected partition's block posterior at each step, taken
  // before that step's evidence landed.
  const std::vector<double>& stepPosteriorEntropies() const { return stepEntropies_; }

  // -log2 of the realized joint probability gamma(x, y_{1:j}); encode only.
  double jointSurprisalBits() const;
  // -log2 nu(y_{1:j}).
  double channelSurprisalBits() const { return -nuLog2_; }
  // -log2 gamma(x | y_{1:j}); encode only.
  double conditionalSurprisalBits() const { return jointSurprisalBits() + nuLog2_; }

 private:
  Symbol step(const Dist& nuDist, const Sequence* x, std::optional<Symbol> observed);
  void noteMessage(const Sequence& x);

  std::shared_ptr<const AutoregressiveSource> nu_;
  std::unique_ptr<PartitionSet> partitions_;
  SessionConfig cfg_;
  CounterRng rng_;
  int horizon_;
  Sequence emitted_;
  std::vector<StepRecord> trace_;
  std::vector<double> stepEntropies_;
  double nuLog2_ = 0.0;
  double condLog2_ = 0.0;
  std::optional<double> priorLog2_;
  std::optional<Sequence> message_;
};

// Decode convenience: replays the couplings conditioned on y and returns the
// MAP outcome. Throws DecodeError if y contains a zero-probability symbol.
Sequence imecDecode(std::shared_ptr<const AutoregressiveSource> nu,
                    std::unique_ptr<PartitionSet> partitions, const Sequence& y,
                    SessionConfig cfg);

}  // namespace entrocoup
