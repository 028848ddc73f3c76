#include "entrocoup/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace entrocoup {

SparseCoupling::SparseCoupling(int rowDim, int colDim, EntryMap entries)
    : rowDim_(rowDim), colDim_(colDim), entries_(std::move(entries)) {
  if (rowDim_ <= 0 || colDim_ <= 0) {
    throw std::invalid_argument("SparseCoupling: nonpositive dimension");
  }
  double total = 0.0;
  for (const auto& [key, p] : entries_) {
    const auto [i, j] = key;
    if (i < 0 || i >= rowDim_ || j < 0 || j >= colDim_) {
      throw std::invalid_argument("SparseCoupling: entry index out of range");
    }
    if (p <= 0.0) {
      throw std::invalid_argument("SparseCoupling: nonpositive entry stored");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("SparseCoupling: total mass " + std::to_string(total));
  }
}

double SparseCoupling::at(int row, int col) const {
  auto it = entries_.find({row, col});
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<double> SparseCoupling::rowSums() const {
  std::vector<double> sums(rowDim_, 0.0);
  for (const auto& [key, p] : entries_) sums[key.first] += p;
  return sums;
}

std::vector<double> SparseCoupling::colSums() const {
  std::vector<double> sums(colDim_, 0.0);
  for (const auto& [key, p] : entries_) sums[key.second] += p;
  return sums;
}

double couplingEntropy(const SparseCoupling& c) {
  double h = 0.0;
  for (const auto& [key, p] : c.entries()) h -= p * std::log2(p);
  return h;
}

namespace {

// Prune sub-epsilon entries and renormalize the rest.
SparseCoupling finalizeEntries(int rowDim, int colDim, SparseCoupling::EntryMap entries) {
  double total = 0.0;
  for (auto it = entries.begin(); it != entries.end();) {
    if (it->second < kMassEpsilon) {
      it = entries.erase(it);
    } else {
      total += it->second;
      ++it;
    }
  }
  for (auto& [key, p] : entries) p /= total;
  return SparseCoupling(rowDim, colDim, std::move(entries));
}

using HeapEntry = std::pair<double, int>;  // (residual, index); max-heap, ties -> highest index

void refillTop(std::priority_queue<HeapEntry>& heap, const std::vector<double>& residual) {
  while (!heap.empty() && heap.top().first != residual[heap.top().second]) heap.pop();
}

}  // namespace

SparseCoupling greedyMEC(const Dist& mu, const Dist& nu) {
  std::vector<double> muRes = mu.probs();
  std::vector<double> nuRes = nu.probs();
  std::priority_queue<HeapEntry> muHeap, nuHeap;
  for (int i = 0; i < static_cast<int>(muRes.size()); ++i) {
    if (muRes[i] > 0.0) muHeap.push({muRes[i], i});
  }
  for (int j = 0; j < static_cast<int>(nuRes.size()); ++j) {
    if (nuRes[j] > 0.0) nuHeap.push({nuRes[j], j});
  }

  SparseCoupling::EntryMap entries;
  while (true) {
    refillTop(muHeap, muRes);
    refillTop(nuHeap, nuRes);
    if (muHeap.empty() || nuHeap.empty()) break;
    const int i = muHeap.top().second;
    const int j = nuHeap.top().second;
    const double take = std::min(muRes[i], nuRes[j]);
    entries[{i, j}] += take;
    if (muRes[i] <= nuRes[j]) {
      nuRes[j] -= muRes[i];
      muRes[i] = 0.0;
      muHeap.pop();
      if (muRes[i] == nuRes[j]) {  // both residuals exhausted
        nuRes[j] = 0.0;
        nuHeap.pop();
      } else if (nuRes[j] > 0.0) {
        nuHeap.pop();
        nuHeap.push({nuRes[j], j});
      } else {
        nuHeap.pop();
      }
    } else {
      muRes[i] -= nuRes[j];
      nuRes[j] = 0.0;
      nuHeap.pop();
      muHeap.pop();
      if (muRes[i] > 0.0) muHeap.push({muRes[i], i});
    }
  }
  return finalizeEntries(static_cast<int>(mu.size()), static_cast<int>(nu.size()),
                         std::move(entries));
}

SparseCoupling exactMEC(const Dist& mu, const Dist& nu) {
  const int r = static_cast<int>(mu.size());
  const int c = static_cast<int>(nu.size());
  const int cells = r * c;
  if (cells > kExactMecCellCap) {
    throw std::invalid_argument("exactMEC: " + std::to_string(cells) +
                                " cells exceeds the oracle cap of " +
                                std::to_string(kExactMecCellCap));
  }

  double bestEntropy = std::numeric_limits<double>::infinity();
  std::vector<double> bestValues;
  std::vector<int> bestCellsOf;

  std::vector<double> value(cells);
  std::vector<bool> alive(cells);
  std::vector<int> rowDeg(r), colDeg(c);
  std::vector<double> muRes(r), nuRes(c);

  for (unsigned mask = 1; mask < (1u << cells); ++mask) {
    std::fill(rowDeg.begin(), rowDeg.end(), 0);
    std::fill(colDeg.begin(), colDeg.end(), 0);
    std::copy(mu.probs().begin(), mu.probs().end(), muRes.begin());
    std::copy(nu.probs().begin(), nu.probs().end(), nuRes.begin());
    int remaining = 0;
    for (int k = 0; k < cells; ++k) {
      alive[k] = (mask >> k) & 1u;
      if (alive[k]) {
        ++rowDeg[k / c];
        ++colDeg[k % c];
        ++remaining;
      }
    }

    // Peel forced values: a row or column with a single remaining cell pins
    // that cell to its residual. A support with no degree-1 vertex contains a
    // cycle and is not an extreme point, so it can be skipped.
    bool feasible = true;
    while (remaining > 0 && feasible) {
      int cell = -1;
      double forced = 0.0;
      for (int i = 0; i < r && cell < 0; ++i) {
        if (rowDeg[i] != 1) continue;
        for (int k = i * c; k < (i + 1) * c; ++k) {
          if (alive[k]) {
            cell = k;
            forced = muRes[i];
            break;
          }
        }
      }
      for (int j = 0; j < c && cell < 0; ++j) {
        if (colDeg[j] != 1) continue;
        for (int k = j; k < cells; k += c) {
          if (alive[k]) {
            cell = k;
            forced = nuRes[j];
            break;
          }
        }
      }
      if (cell < 0) {
        feasible = false;  // cycle
        break;
      }
      if (forced < -1e-12) {
        feasible = false;
        break;
      }
      value[cell] = std::max(forced, 0.0);
      const int i = cell / c, j = cell % c;
      muRes[i] -= value[cell];
      nuRes[j] -= value[cell];
      if (muRes[i] < -1e-12 || nuRes[j] < -1e-12) {
        feasible = false;
        break;
      }
      alive[cell] = false;
      --rowDeg[i];
      --colDeg[j];
      --remaining;
    }
    if (!feasible) continue;
    for (int i = 0; i < r && feasible; ++i) feasible = std::abs(muRes[i]) <= kSumTolerance;
    for (int j = 0; j < c && feasible; ++j) feasible = std::abs(nuRes[j]) <= kSumTolerance;
    if (!feasible) continue;

    double h = 0.0;
    for (int k = 0; k < cells; ++k) {
      if (((mask >> k) & 1u) && value[k] > 0.0) h -= value[k] * std::log2(value[k]);
    }
    if (h < bestEntropy - 1e-12) {
      bestEntropy = h;
      bestValues.assign(cells, 0.0);
      for (int k = 0; k < cells; ++k) {
        if ((mask >> k) & 1u) bestValues[k] = value[k];
      }
    }
  }

  if (!std::isfinite(bestEntropy)) {
    throw std::runtime_error("exactMEC: no feasible support pattern found");
  }
  SparseCoupling::EntryMap entries;
  for (int k = 0; k < cells; ++k) {
    if (bestValues[k] > 0.0) entries[{k / c, k % c}] = bestValues[k];
  }
  return finalizeEntries(r, c, std::move(entries));
}

Dist conditionalRow(const SparseCoupling& c, int col) {
  if (col < 0 || col >= c.colDim()) throw std::invalid_argument("conditionalRow: bad column");
  std::vector<double> column(c.rowDim(), 0.0);
  double sum = 0.0;
  for (int i = 0; i < c.rowDim(); ++i) {
    column[i] = c.at(i, col);
    sum += column[i];
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("conditionalRow: column " + std::to_string(col) +
                                " has zero probability");
  }
  for (double& p : column) p /= sum;
  return Dist(std::move(column));
}

Dist conditionalCol(const SparseCoupling& c, int row) {
  if (row < 0 || row >= c.rowDim()) throw std::invalid_argument("conditionalCol: bad row");
  std::vector<double> rowVec(c.colDim(), 0.0);
  double sum = 0.0;
  for (int j = 0; j < c.colDim(); ++j) {
    rowVec[j] = c.at(row, j);
    sum += rowVec[j];
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("conditionalCol: row " + std::to_string(row) +
                                " has zero probability");
  }
  for (double& p : rowVec) p /= sum;
  return Dist(std::move(rowVec));
}

}  // namespace entrocoup
