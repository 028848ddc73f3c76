#include "entrocoup/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "entrocoup/errors.hpp"

namespace entrocoup {

namespace {

double log2OrNegInf(double p) {
  return p > 0.0 ? std::log2(p) : -std::numeric_limits<double>::infinity();
}

class SingletonPartitionSet final : public PartitionSet {
 public:
  SingletonPartitionSet(std::vector<Sequence> space, std::vector<double> prior)
      : space_(std::move(space)), prior_(std::move(prior)), posterior_(prior_) {
    if (space_.empty() || space_.size() != prior_.size()) {
      throw std::invalid_argument("singleton partition set: bad space");
    }
    if (space_.size() > kTabulationCap) {
      throw std::invalid_argument("singleton partition set: space exceeds tabulation cap");
    }
    for (std::size_t i = 0; i < space_.size(); ++i) index_[space_[i]] = i;
  }

  std::size_t selectPartition() override { return 0; }

  std::vector<double> blockMasses(std::size_t pid) const override {
    checkPid(pid);
    return posterior_;
  }

  std::size_t blockOf(std::size_t pid, const Sequence& x) const override {
    checkPid(pid);
    auto it = index_.find(x);
    if (it == index_.end()) throw std::invalid_argument("outcome not in tabulated space");
    return it->second;
  }

  void applyEvidence(std::size_t pid, const std::vector<double>& numerators) override {
    checkPid(pid);
    if (numerators.size() != posterior_.size()) {
      throw std::invalid_argument("applyEvidence: wrong block count");
    }
    posterior_ = normalizeEvidence(numerators);
  }

  Sequence mapEstimate(int) override {
    std::size_t best = 0;
    for (std::size_t i = 1; i < posterior_.size(); ++i) {
      if (posterior_[i] > posterior_[best]) best = i;
    }
    return space_[best];
  }

  double priorLog2(const Sequence& x) const override {
    return log2OrNegInf(prior_[blockOf(0, x)]);
  }

 private:
  static void checkPid(std::size_t pid) {
    if (pid != 0) throw std::invalid_argument("singleton partition set has a single partition");
  }

  std::vector<Sequence> space_;
  std::map<Sequence, std::size_t> index_;
  std::vector<double> prior_;
  std::vector<double> posterior_;
};

class FactoredPartitionSet final : public PartitionSet {
 public:
  explicit FactoredPartitionSet(std::vector<Dist> components) : priors_(std::move(components)) {
    if (priors_.empty()) throw std::invalid_argument("factored partition set: no components");
    posteriors_.reserve(priors_.size());
    for (const Dist& d : priors_) posteriors_.push_back(d.probs());
  }

  std::size_t selectPartition() override {
    std::size_t best = 0;
    double bestEntropy = entropyBits(posteriors_[0]);
    for (std::size_t i = 1; i < posteriors_.size(); ++i) {
      const double h = entropyBits(posteriors_[i]);
      if (h > bestEntropy) {
        bestEntropy = h;
        best = i;
      }
    }
    return best;
  }

  std::vector<double> blockMasses(std::size_t pid) const override {
    return posteriors_.at(pid);
  }

  std::size_t blockOf(std::size_t pid, const Sequence& x) const override {
    if (x.size() != posteriors_.size()) {
      throw std::invalid_argument("outcome has wrong component count");
    }
    const Symbol s = x.at(pid);
    if (s < 0 || s >= static_cast<Symbol>(posteriors_[pid].size())) {
      throw std::invalid_argument("component symbol out of range");
    }
    return static_cast<std::size_t>(s);
  }

  void applyEvidence(std::size_t pid, const std::vector<double>& numerators) override {
    if (numerators.size() != posteriors_.at(pid).size()) {
      throw std::invalid_argument("applyEvidence: wrong block count");
    }
    posteriors_[pid] = normalizeEvidence(numerators);
  }

  Sequence mapEstimate(int) override {
    Sequence out(posteriors_.size());
    for (std::size_t i = 0; i < posteriors_.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t s = 1; s < posteriors_[i].size(); ++s) {
        if (posteriors_[i][s] > posteriors_[i][best]) best = s;
      }
      out[i] = static_cast<Symbol>(best);
    }
    return out;
  }

  double priorLog2(const Sequence& x) const override {
    if (x.size() != priors_.size()) {
      throw std::invalid_argument("outcome has wrong component count");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < priors_.size(); ++i) total += log2OrNegInf(priors_[i][x[i]]);
    return total;
  }

 private:
  std::vector<Dist> priors_;
  std::vector<std::vector<double>> posteriors_;
};

}  // namespace

std::unique_ptr<PartitionSet> makeSingletonPartitionSet(Dist prior) {
  std::vector<Sequence> space(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) space[i] = {static_cast<Symbol>(i)};
  return std::make_unique<SingletonPartitionSet>(std::move(space), prior.probs());
}

std::unique_ptr<PartitionSet> makeSingletonPartitionSet(const AutoregressiveSource& mu) {
  const auto space = enumerateMessages(mu, kTabulationCap);
  std::vector<double> prior(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    prior[i] = std::exp2(messageLog2Prob(mu, space[i]));
  }
  double total = 0.0;
  for (double p : prior) total += p;
  if (total <= 0.0) throw std::invalid_argument("message source has no probable outcome");
  for (double& p : prior) p /= total;
  return std::make_unique<SingletonPartitionSet>(space, std::move(prior));
}

std::unique_ptr<PartitionSet> makeFactoredPartitionSet(std::vector<Dist> components) {
  return std::make_unique<FactoredPartitionSet>(std::move(components));
}

std::vector<double> normalizeEvidence(const std::vector<double>& numerators) {
  double sum = 0.0;
  for (double v : numerators) {
    if (v < 0.0) throw std::invalid_argument("applyEvidence: negative numerator");
    sum += v;
  }
  if (sum <= 0.0) {
    throw DecodeError("evidence eliminated all posterior mass");
  }
  std::vector<double> out(numerators.size());
  for (std::size_t i = 0; i < numerators.size(); ++i) out[i] = numerators[i] / sum;
  return out;
}

Partition materializePartition(const PartitionSet& set, std::size_t pid,
                               const std::vector<Sequence>& space) {
  Partition p;
  p.blocks.resize(set.blockMasses(pid).size());
  p.blockOfOutcome.resize(space.size());
  for (std::size_t o = 0; o < space.size(); ++o) {
    const std::size_t b = set.blockOf(pid, space[o]);
    p.blocks.at(b).push_back(o);
    p.blockOfOutcome[o] = b;
  }
  return p;
}

}  // namespace entrocoup
