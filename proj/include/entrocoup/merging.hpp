#pragma once

#include <map>
#include <vector>

#include "entrocoup/coupling.hpp"

namespace entrocoup {

// Tolerance for treating two normalized coupling columns as inducing the
// same block-posterior update.
inline constexpr double kMergeTolerance = 1e-12;

// Column grouping of a coupling: columns inducing identical posterior
// updates are merged, splitting each entry into a grouped block/group table
// and a within-group conditional over member columns.
struct MergedCoupling {
  std::vector<std::vector<int>> groups;              // member columns, ascending; groups ordered by first member
  std::map<std::pair<int, int>, double> groupedEntries;  // (row, group) -> probability
  std::vector<Dist> withinGroupDists;                // over member positions of each group
  std::vector<int> groupOfColumn;                    // column -> group, -1 for zero columns

  double groupedAt(int row, int group) const {
    auto it = groupedEntries.find({row, group});
    return it == groupedEntries.end() ? 0.0 : it->second;
  }
  std::vector<double> groupedRowSums(int rowDim) const;
};

// Groups the columns of c by equality of their normalized column vectors
// within kMergeTolerance. Zero-probability columns are excluded. The grouped
// table times the within-group conditionals reproduces c exactly up to the
// merge tolerance, so both marginals are preserved.
MergedCoupling mergeColumns(const SparseCoupling& c);

}  // namespace entrocoup
