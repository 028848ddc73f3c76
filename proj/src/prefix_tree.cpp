#include "entrocoup/prefix_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "entrocoup/errors.hpp"

namespace entrocoup {

double entropyUpperBound(double q, int kappa) {
  if (kappa < 1) throw std::invalid_argument("entropyUpperBound: kappa must be positive");
  if (q > 1.0 + 1e-12) throw std::invalid_argument("entropyUpperBound: q above 1");
  if (q < 1.0 / kappa - 1e-12) {
    throw std::invalid_argument("entropyUpperBound: q below 1/kappa");
  }
  q = std::min(q, 1.0);
  if (q == 1.0 || kappa == 1) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2((1.0 - q) / (kappa - 1));
}

std::vector<double> complementRescale(const std::vector<double>& oldMasses,
                                      std::size_t slotToward, double newSlotMass) {
  newSlotMass = std::clamp(newSlotMass, 0.0, 1.0);
  std::vector<double> out(oldMasses.size(), 0.0);
  double oldOthers = 0.0;
  for (std::size_t i = 0; i < oldMasses.size(); ++i) {
    if (i != slotToward) oldOthers += oldMasses[i];
  }
  const double newOthers = 1.0 - newSlotMass;
  if (oldOthers <= kMassEpsilon) {
    if (newOthers > kSumTolerance) {
      throw std::logic_error("complementRescale: mass appeared in an exhausted complement");
    }
    out[slotToward] = 1.0;
    return out;
  }
  const double ratio = newOthers / oldOthers;
  for (std::size_t i = 0; i < oldMasses.size(); ++i) {
    out[i] = i == slotToward ? newSlotMass : oldMasses[i] * ratio;
  }
  return out;
}

PrefixTreeSet::PrefixTreeSet(std::shared_ptr<const AutoregressiveSource> mu, bool recordPruned)
    : mu_(std::move(mu)), recordPruned_(recordPruned) {
  if (!mu_) throw std::invalid_argument("prefix tree: null message model");
  if (mu_->maxLen() < 0 || mu_->maxLen() > 100000) {
    throw std::invalid_argument("prefix tree: message model needs a bounded max length");
  }
  const int vocab = mu_->vocabSize();
  if (mu_->eosId()) {
    eosSlot_ = *mu_->eosId();
    extSlots_ = vocab;
  } else {
    eosSlot_ = vocab;
    extSlots_ = vocab + 1;
  }
  kappa_ = vocab + 2;  // child blocks plus exact match plus non-extension

  Node root;
  root.prefix = {};
  root.priorNext = effectiveNext({});
  root.masses.assign(extSlots_ + 1, 0.0);
  for (int s = 0; s < extSlots_; ++s) root.masses[s] = root.priorNext[s];
  nodes_.push_back(std::move(root));
}

Dist PrefixTreeSet::effectiveNext(const Sequence& prefix) const {
  if (static_cast<int>(prefix.size()) >= mu_->maxLen()) {
    return Dist::pointMass(extSlots_, eosSlot_);  // message length is capped
  }
  Dist d = mu_->nextDist(prefix);
  if (mu_->eosId()) return d;
  std::vector<double> probs = d.probs();
  probs.push_back(0.0);  // synthetic EOS slot carries no mass below maxLen
  return Dist(std::move(probs));
}

std::size_t PrefixTreeSet::materializeChild(std::size_t pid, Symbol s) const {
  {
    const Node& parent = nodes_[pid];
    auto it = parent.children.find(s);
    if (it != parent.children.end()) return it->second;
    if (parent.stamp != epoch_) {
      throw std::logic_error("materializeChild: parent posterior is stale");
    }
  }
  Node child;
  child.prefix = nodes_[pid].prefix;
  child.prefix.push_back(s);
  child.parent = static_cast<int>(pid);
  child.viaSymbol = s;
  child.priorNext = effectiveNext(child.prefix);
  // Evidence so far never distinguished within this subtree, so the prior
  // conditionals still hold below it.
  const double sub = nodes_[pid].masses[s];
  child.masses.assign(extSlots_ + 1, 0.0);
  for (int t = 0; t < extSlots_; ++t) child.masses[t] = sub * child.priorNext[t];
  child.masses[notExtSlot()] = 1.0 - sub;
  child.stamp = nodes_[pid].stamp;
  nodes_.push_back(std::move(child));
  const std::size_t cid = nodes_.size() - 1;
  nodes_[pid].children[s] = cid;
  return cid;
}

void PrefixTreeSet::refreshFrom(std::size_t current, std::size_t stale) const {
  Node& stl = nodes_[stale];
  const Node& cur = nodes_[current];
  if (stl.stamp == epoch_) return;
  if (cur.stamp != epoch_) throw std::logic_error("refreshFrom: source node is stale");
  if (stl.parent == static_cast<int>(current)) {
    // stale is a child: its non-extension block faces the parent
    stl.masses = complementRescale(stl.masses, notExtSlot(), 1.0 - cur.masses[stl.viaSymbol]);
  } else if (cur.parent == static_cast<int>(stale)) {
    // stale is the parent: the child's slot faces the updated node
    stl.masses = complementRescale(stl.masses, static_cast<std::size_t>(cur.viaSymbol),
                                   1.0 - cur.masses[notExtSlot()]);
  } else {
    throw std::logic_error("refreshFrom: nodes are not neighbors");
  }
  stl.stamp = epoch_;
}

void PrefixTreeSet::ensureCurrent(std::size_t pid) const {
  if (nodes_.at(pid).stamp == epoch_) return;
  std::unordered_set<std::size_t> ancestors;
  for (int n = static_cast<int>(pid); n >= 0; n = nodes_[n].parent) {
    ancestors.insert(static_cast<std::size_t>(n));
  }
  // climb from the working node (always current) to the junction
  std::size_t cur = working_;
  while (!ancestors.count(cur)) {
    const std::size_t parent = static_cast<std::size_t>(nodes_[cur].parent);
    refreshFrom(cur, parent);
    cur = parent;
  }
  // then walk down to pid
  std::vector<std::size_t> down;
  for (std::size_t n = pid; n != cur; n = static_cast<std::size_t>(nodes_[n].parent)) {
    down.push_back(n);
  }
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    refreshFrom(cur, *it);
    cur = *it;
  }
}

std::size_t PrefixTreeSet::selectPartition() {
  ++searches_;
  report_ = SearchReport{};
  ensureCurrent(working_);
  std::size_t best = working_;
  double bestH = nodeEntropy(working_);
  std::size_t touched = 1;
  const double exploreThreshold = 1.0 - 1.0 / kappa_;
  std::deque<std::size_t> queue{working_};
  std::unordered_set<std::size_t> visited{working_};

  auto consider = [&](std::size_t from, bool towardParent, Symbol via, double q,
                      auto&& neighborId) {
    double bound = 0.0;
    bool explore = q > exploreThreshold;
    if (!explore) {
      bound = entropyUpperBound(1.0 - q, kappa_);
      explore = bound > bestH;
    }
    if (!explore) {
      if (recordPruned_) report_.pruned.push_back({from, towardParent, via, bound});
      return;
    }
    const std::size_t nid = neighborId();
    if (!visited.insert(nid).second) return;
    refreshFrom(from, nid);
    ++touched;
    const double h = nodeEntropy(nid);
    if (h > bestH || (h == bestH && keyLess(nid, best))) {
      bestH = h;
      best = nid;
    }
    queue.push_back(nid);
  };

  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (static_cast<int>(nodes_[u].prefix.size()) < mu_->maxLen()) {
      for (Symbol s = 0; s < static_cast<Symbol>(extSlots_); ++s) {
        if (s == eosSlot_) continue;
        consider(u, false, s, nodes_[u].masses[s], [&] { return materializeChild(u, s); });
      }
    }
    if (nodes_[u].parent >= 0) {
      consider(u, true, -1, nodes_[u].masses[notExtSlot()],
               [&] { return static_cast<std::size_t>(nodes_[u].parent); });
    }
  }

  report_.selected = best;
  report_.entropy = bestH;
  report_.nodesTouched = touched;
  totalTouched_ += touched;
  working_ = best;
  return best;
}

std::vector<double> PrefixTreeSet::blockMasses(std::size_t pid) const {
  ensureCurrent(pid);
  return nodes_[pid].masses;
}

std::size_t PrefixTreeSet::blockOf(std::size_t pid, const Sequence& x) const {
  for (Symbol s : x) {
    if (s < 0 || s >= mu_->vocabSize() || (mu_->eosId() && s == *mu_->eosId())) {
      throw std::invalid_argument("blockOf: symbol outside the message alphabet");
    }
  }
  const Sequence& v = nodes_.at(pid).prefix;
  if (x.size() < v.size() || !std::equal(v.begin(), v.end(), x.begin())) {
    return notExtSlot();
  }
  if (x.size() == v.size()) return static_cast<std::size_t>(eosSlot_);
  return static_cast<std::size_t>(x[v.size()]);
}

void PrefixTreeSet::applyEvidence(std::size_t pid, const std::vector<double>& numerators) {
  if (numerators.size() != static_cast<std::size_t>(extSlots_) + 1) {
    throw std::invalid_argument("applyEvidence: wrong block count");
  }
  ensureCurrent(pid);
  ++epoch_;
  nodes_[pid].masses = normalizeEvidence(numerators);
  nodes_[pid].stamp = epoch_;
  working_ = pid;
}

Sequence PrefixTreeSet::mapEstimate(int beamWidth) {
  if (beamWidth < 1) throw std::invalid_argument("mapEstimate: beam width must be positive");
  ensureCurrent(0);
  struct Cand {
    double score;
    std::size_t node;
  };
  std::vector<Cand> beam{{0.0, 0}};
  double bestScore = -std::numeric_limits<double>::infinity();
  Sequence bestSeq;
  bool haveBest = false;

  while (!beam.empty()) {
    std::vector<Cand> next;
    for (const Cand& cand : beam) {
      if (haveBest && cand.score <= bestScore) continue;  // scores only decrease with depth
      double inSubtree = 0.0;
      for (int s = 0; s < extSlots_; ++s) inSubtree += nodes_[cand.node].masses[s];
      if (inSubtree <= 0.0) continue;
      for (Symbol s = 0; s < static_cast<Symbol>(extSlots_); ++s) {
        const double p = nodes_[cand.node].masses[s] / inSubtree;
        if (p <= 0.0) continue;
        const double score = cand.score + std::log2(p);
        if (s == eosSlot_) {
          if (!haveBest || score > bestScore) {
            haveBest = true;
            bestScore = score;
            bestSeq = nodes_[cand.node].prefix;
          }
        } else {
          const std::size_t cid = materializeChild(cand.node, s);
          refreshFrom(cand.node, cid);
          next.push_back({score, cid});
        }
      }
    }
    std::sort(next.begin(), next.end(), [&](const Cand& a, const Cand& b) {
      if (a.score != b.score) return a.score > b.score;
      return keyLess(a.node, b.node);
    });
    if (static_cast<int>(next.size()) > beamWidth) next.resize(beamWidth);
    beam = std::move(next);
  }
  if (!haveBest) throw std::logic_error("mapEstimate: no complete message reachable");
  return bestSeq;
}

double PrefixTreeSet::priorLog2(const Sequence& x) const { return messageLog2Prob(*mu_, x); }

std::optional<std::size_t> PrefixTreeSet::findNode(const Sequence& prefix) const {
  std::size_t cur = 0;
  for (Symbol s : prefix) {
    auto it = nodes_[cur].children.find(s);
    if (it == nodes_[cur].children.end()) return std::nullopt;
    cur = it->second;
  }
  return cur;
}

bool PrefixTreeSet::keyLess(std::size_t a, std::size_t b) const {
  const Sequence& pa = nodes_[a].prefix;
  const Sequence& pb = nodes_[b].prefix;
  if (pa.size() != pb.size()) return pa.size() < pb.size();
  return pa < pb;
}

std::unique_ptr<PrefixTreeSet> makePrefixTreePartitionSet(
    std::shared_ptr<const AutoregressiveSource> mu, bool recordPruned) {
  return std::make_unique<PrefixTreeSet>(std::move(mu), recordPruned);
}

}  // namespace entrocoup
