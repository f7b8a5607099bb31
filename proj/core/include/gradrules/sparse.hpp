#pragma once

#include <cstddef>
#include <vector>

#include "gradrules/common.hpp"

namespace gradrules {

struct SparseEntry {
  FeatureIndex index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Entries sorted by ascending index, no duplicates.
using SparseRow = std::vector<SparseEntry>;

/// Instance-by-feature matrix with implicit zeros.
///
/// `labels` is either empty (unlabeled data) or holds one class index per row.
struct FeatureMatrix {
  std::vector<SparseRow> rows;
  std::size_t n_features = 0;
  std::vector<ClassIndex> labels;

  std::size_t size() const { return rows.size(); }
  bool has_labels() const { return labels.size() == rows.size(); }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

}  // namespace gradrules
