#include "entrocoup/merging.hpp"

#include <cmath>

namespace entrocoup {

std::vector<double> MergedCoupling::groupedRowSums(int rowDim) const {
  std::vector<double> sums(rowDim, 0.0);
  for (const auto& [key, p] : groupedEntries) sums[key.first] += p;
  return sums;
}

MergedCoupling mergeColumns(const SparseCoupling& c) {
  // Sparse normalized profile per column.
  std::vector<std::vector<std::pair<int, double>>> profiles(c.colDim());
  std::vector<double> colSums = c.colSums();
  for (const auto& [key, p] : c.entries()) {
    profiles[key.second].push_back({key.first, p / colSums[key.second]});
  }

  MergedCoupling out;
  out.groupOfColumn.assign(c.colDim(), -1);
  std::vector<int> representative;  // one column per group
  for (int j = 0; j < c.colDim(); ++j) {
    if (colSums[j] <= 0.0) continue;  // zero columns excluded from grouping
    int found = -1;
    for (std::size_t g = 0; g < representative.size() && found < 0; ++g) {
      const auto& rep = profiles[representative[g]];
      const auto& cur = profiles[j];
      if (rep.size() != cur.size()) continue;
      bool same = true;
      for (std::size_t k = 0; k < rep.size() && same; ++k) {
        same = rep[k].first == cur[k].first &&
               std::abs(rep[k].second - cur[k].second) <= kMergeTolerance;
      }
      if (same) found = static_cast<int>(g);
    }
    if (found < 0) {
      found = static_cast<int>(representative.size());
      representative.push_back(j);
      out.groups.emplace_back();
    }
    out.groups[found].push_back(j);
    out.groupOfColumn[j] = found;
  }

  for (const auto& [key, p] : c.entries()) {
    out.groupedEntries[{key.first, out.groupOfColumn[key.second]}] += p;
  }
  out.withinGroupDists.reserve(out.groups.size());
  for (const auto& members : out.groups) {
    std::vector<double> w(members.size());
    double total = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      w[k] = colSums[members[k]];
      total += w[k];
    }
    for (double& v : w) v /= total;
    out.withinGroupDists.push_back(Dist(std::move(w)));
  }
  return out;
}

}  // namespace entrocoup
