#include "entrocoup/session.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entrocoup/coupling.hpp"
#include "entrocoup/errors.hpp"
#include "entrocoup/merging.hpp"

namespace entrocoup {

CouplerSession::CouplerSession(std::shared_ptr<const AutoregressiveSource> nu,
                               std::unique_ptr<PartitionSet> partitions, SessionConfig cfg)
    : nu_(std::move(nu)),
      partitions_(std::move(partitions)),
      cfg_(cfg),
      rng_(cfg.seed),
      horizon_(cfg.horizon > 0 ? cfg.horizon : 0) {
  if (!nu_ || !partitions_) throw std::invalid_argument("session: null model");
  if (horizon_ == 0) horizon_ = nu_->maxLen();
  if (horizon_ < 0) throw std::invalid_argument("session: negative horizon");
}

CouplerSession::CouplerSession(std::unique_ptr<PartitionSet> partitions, SessionConfig cfg)
    : partitions_(std::move(partitions)), cfg_(cfg), rng_(cfg.seed), horizon_(cfg.horizon) {
  if (!partitions_) throw std::invalid_argument("session: null partition set");
  if (horizon_ <= 0) {
    throw std::invalid_argument("session: per-step channel mode needs a positive horizon");
  }
}

void CouplerSession::noteMessage(const Sequence& x) {
  if (message_) {
    if (*message_ != x) throw std::invalid_argument("encodeStep: message changed mid-session");
  } else {
    message_ = x;
    priorLog2_ = partitions_->priorLog2(x);
  }
}

Symbol CouplerSession::encodeStep(const Sequence& x) {
  if (!nu_) throw std::invalid_argument("session: no channel model; use encodeStepWith");
  noteMessage(x);
  return step(nu_->nextDist(emitted_), &x, std::nullopt);
}

void CouplerSession::observeStep(Symbol y) {
  if (!nu_) throw std::invalid_argument("session: no channel model; use observeStepWith");
  step(nu_->nextDist(emitted_), nullptr, y);
}

Symbol CouplerSession::encodeStepWith(const Dist& nuStep, const Sequence& x) {
  noteMessage(x);
  return step(nuStep, &x, std::nullopt);
}

void CouplerSession::observeStepWith(const Dist& nuStep, Symbol y) { step(nuStep, nullptr, y); }

Symbol CouplerSession::step(const Dist& nuDist, const Sequence* x, std::optional<Symbol> observed) {
  if (iteration() >= horizon_) {
    throw std::invalid_argument("session: horizon of " + std::to_string(horizon_) +
                                " steps exhausted");
  }
  if (observed) {
    if (*observed < 0 || *observed >= static_cast<Symbol>(nuDist.size())) {
      throw DecodeError("observed symbol out of range");
    }
    if (nuDist[*observed] <= 0.0) {
      throw DecodeError("observed symbol has zero channel probability");
    }
  }

  std::vector<int> candidates;
  std::vector<double> candProbs;
  for (std::size_t s = 0; s < nuDist.size(); ++s) {
    if (nuDist[s] > 0.0) {
      candidates.push_back(static_cast<int>(s));
      candProbs.push_back(nuDist[s]);
    }
  }

  StepRecord rec;
  Symbol result = -1;
  int rounds = 0;
  while (result < 0) {
    if (++rounds > static_cast<int>(nuDist.size()) + 1) {
      throw std::logic_error("merging loop exceeded the alphabet size");
    }
    const std::size_t pid = partitions_->selectPartition();
    const std::vector<double> masses = partitions_->blockMasses(pid);
    if (rounds == 1) stepEntropies_.push_back(entropyBits(masses));

    // Blocks below kMassEpsilon are dropped from the coupling input and come
    // back with zero mass after the update.
    std::vector<std::size_t> active;
    std::vector<double> activeMass;
    std::vector<int> posOfBlock(masses.size(), -1);
    for (std::size_t b = 0; b < masses.size(); ++b) {
      if (masses[b] >= kMassEpsilon) {
        posOfBlock[b] = static_cast<int>(active.size());
        active.push_back(b);
        activeMass.push_back(masses[b]);
      }
    }
    const Dist rowDist = normalizedDist(std::move(activeMass));
    const Dist colDist = normalizedDist(candProbs);
    const SparseCoupling coupling = greedyMEC(rowDist, colDist);

    int truePos = -1;
    if (x) {
      const std::size_t b = partitions_->blockOf(pid, *x);
      truePos = posOfBlock[b];
      if (truePos < 0) {
        throw CorruptionError("encoded outcome's block has zero posterior mass");
      }
    }

    std::vector<double> numerators(masses.size(), 0.0);
    RoundRecord round;
    round.pid = pid;

    if (!cfg_.merging) {
      const auto rowSums = coupling.rowSums();
      int pos;
      if (x) {
        std::vector<double> rowVec(candidates.size(), 0.0);
        for (std::size_t j = 0; j < candidates.size(); ++j) {
          rowVec[j] = coupling.at(truePos, j) / rowSums[truePos];
        }
        pos = sampleIndex(rowVec, rng_.nextDouble());
        condLog2_ += std::log2(rowVec[pos]);
      } else {
        pos = static_cast<int>(std::find(candidates.begin(), candidates.end(), *observed) -
                               candidates.begin());
      }
      for (std::size_t ia = 0; ia < active.size(); ++ia) {
        numerators[active[ia]] = coupling.at(static_cast<int>(ia), pos);
      }
      if (cfg_.recordTrace) {
        round.blockConditional.assign(masses.size(), 0.0);
        for (std::size_t ia = 0; ia < active.size(); ++ia) {
          if (rowSums[ia] > 0.0) {
            round.blockConditional[active[ia]] = coupling.at(static_cast<int>(ia), pos) / rowSums[ia];
          }
        }
        rec.rounds.push_back(std::move(round));
        const auto cols = coupling.colSums();
        rec.channelMarginal.assign(nuDist.size(), 0.0);
        for (std::size_t j = 0; j < candidates.size(); ++j) {
          rec.channelMarginal[candidates[j]] = cols[j];
        }
      }
      partitions_->applyEvidence(pid, numerators);
      result = candidates[pos];
      break;
    }

    const MergedCoupling merged = mergeColumns(coupling);
    const auto groupedSums = merged.groupedRowSums(static_cast<int>(rowDist.size()));
    int gidx;
    if (x) {
      std::vector<double> groupRow(merged.groups.size(), 0.0);
      for (std::size_t g = 0; g < merged.groups.size(); ++g) {
        groupRow[g] = merged.groupedAt(truePos, static_cast<int>(g)) / groupedSums[truePos];
      }
      gidx = sampleIndex(groupRow, rng_.nextDouble());
      condLog2_ += std::log2(groupRow[gidx]);
    } else {
      const int pos = static_cast<int>(std::find(candidates.begin(), candidates.end(), *observed) -
                                       candidates.begin());
      gidx = merged.groupOfColumn[pos];
      if (gidx < 0) throw DecodeError("observed symbol was eliminated by the coupling");
    }
    for (std::size_t ia = 0; ia < active.size(); ++ia) {
      numerators[active[ia]] = merged.groupedAt(static_cast<int>(ia), gidx);
    }
    if (cfg_.recordTrace) {
      round.blockConditional.assign(masses.size(), 0.0);
      for (std::size_t ia = 0; ia < active.size(); ++ia) {
        if (groupedSums[ia] > 0.0) {
          round.blockConditional[active[ia]] =
              merged.groupedAt(static_cast<int>(ia), gidx) / groupedSums[ia];
        }
      }
      rec.rounds.push_back(std::move(round));
    }
    partitions_->applyEvidence(pid, numerators);

    const auto& members = merged.groups[gidx];
    if (members.size() == 1) {
      result = candidates[members[0]];
      break;
    }
    if (merged.groups.size() == 1) {
      // No refinement is possible (every column updates the posterior the
      // same way), so the symbol within the group carries no message
      // information; realize it from the within-group conditional.
      const Dist& within = merged.withinGroupDists[gidx];
      int mpos;
      if (x) {
        mpos = sampleIndex(within.probs(), rng_.nextDouble());
        condLog2_ += std::log2(within[mpos]);
      } else {
        const int pos = static_cast<int>(
            std::find(candidates.begin(), candidates.end(), *observed) - candidates.begin());
        mpos = static_cast<int>(std::find(members.begin(), members.end(), pos) - members.begin());
      }
      rec.tailLog2 = std::log2(within[mpos]);
      result = candidates[members[mpos]];
      break;
    }
    std::vector<int> nextCands(members.size());
    std::vector<double> nextProbs(members.size());
    double groupMass = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) groupMass += candProbs[members[k]];
    for (std::size_t k = 0; k < members.size(); ++k) {
      nextCands[k] = candidates[members[k]];
      nextProbs[k] = candProbs[members[k]] / groupMass;
    }
    candidates.swap(nextCands);
    candProbs.swap(nextProbs);
  }

  const double stepNuLog2 = std::log2(nuDist[result]);
  nuLog2_ += stepNuLog2;
  if (cfg_.recordTrace) {
    rec.emitted = result;
    rec.nuLog2 = stepNuLog2;
    trace_.push_back(std::move(rec));
  }
  emitted_.push_back(result);
  return result;
}

double CouplerSession::jointSurprisalBits() const {
  if (!priorLog2_) {
    throw std::logic_error("jointSurprisalBits is an encode-side statistic");
  }
  return -(*priorLog2_ + condLog2_);
}

Sequence imecDecode(std::shared_ptr<const AutoregressiveSource> nu,
                    std::unique_ptr<PartitionSet> partitions, const Sequence& y,
                    SessionConfig cfg) {
  if (cfg.horizon == 0) cfg.horizon = static_cast<int>(y.size());
  CouplerSession session(std::move(nu), std::move(partitions), cfg);
  for (Symbol s : y) session.observeStep(s);
  return session.mapEstimate();
}

}  // namespace entrocoup
