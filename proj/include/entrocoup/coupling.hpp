#pragma once

#include <map>
#include <utility>
#include <vector>

#include "entrocoup/dist.hpp"

namespace entrocoup {

// Sparse bivariate joint distribution. Zero entries are absent; entries are
// keyed (row, col) so iteration order is canonical.
class SparseCoupling {
 public:
  using Key = std::pair<int, int>;
  using EntryMap = std::map<Key, double>;

  SparseCoupling(int rowDim, int colDim, EntryMap entries);

  int rowDim() const { return rowDim_; }
  int colDim() const { return colDim_; }
  const EntryMap& entries() const { return entries_; }
  std::size_t entryCount() const { return entries_.size(); }

  double at(int row, int col) const;  // 0 if absent

  std::vector<double> rowSums() const;
  std::vector<double> colSums() const;

 private:
  int rowDim_;
  int colDim_;
  EntryMap entries_;
};

// Joint entropy of the coupling in bits.
double couplingEntropy(const SparseCoupling& c);

// Greedy 1-bit approximate minimum-entropy coupling. Repeatedly pairs the
// largest residual entry of each marginal and places the smaller residual at
// their intersection; ties on equal residuals resolve to the highest index.
// The output has at most rowDim + colDim - 1 entries; entries below
// kMassEpsilon are pruned and the mass renormalized.
SparseCoupling greedyMEC(const Dist& mu, const Dist& nu);

// Exhaustive exact minimum-entropy coupling for rowDim * colDim <= 12.
// The joint entropy is concave, so the minimum over the transportation
// polytope is attained at an extreme point; extreme points have acyclic
// (forest) support, so scanning every support pattern and solving the forced
// values finds the global minimum.
SparseCoupling exactMEC(const Dist& mu, const Dist& nu);

inline constexpr int kExactMecCellCap = 12;

// Bayes-normalized slice of the coupling: distribution over rows given the
// column (and vice versa). Conditioning on an index of zero marginal
// probability throws std::invalid_argument.
Dist conditionalRow(const SparseCoupling& c, int col);
Dist conditionalCol(const SparseCoupling& c, int row);

}  // namespace entrocoup
