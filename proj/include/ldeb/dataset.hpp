// Copyright 2026 The LDEB Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ldeb/error.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/hiersplit.hpp"

namespace ldeb {

/// Sparse rows with binary labels; the input every learner trains on.
struct BinaryDataset {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  std::size_t dimension = 0;

  std::size_t size() const noexcept { return rows.size(); }
};

inline void require_two_classes(std::span<const int> labels) {
  std::size_t counts[2] = {0, 0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorKind::BadLabel, "binary label " + std::to_string(l));
    ++counts[l];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorKind::OneClassTraining, "training data has " + std::to_string(counts[0]) + " label-0 and " +
                                                 std::to_string(counts[1]) + " label-1 rows");
  }
}

/// Rows of `split` at the given positions (indices into split.row_ids).
inline BinaryDataset select_rows(const FeatureMatrix& matrix, const SplitSet& split,
                                 std::span<const std::size_t> positions) {
  BinaryDataset out;
  out.dimension = matrix.dimension;
  out.rows.reserve(positions.size());
  out.labels.reserve(positions.size());
  for (auto p : positions) {
    out.rows.push_back(matrix.rows.at(split.row_ids.at(p)));
    out.labels.push_back(split.labels.at(p));
  }
  return out;
}

}  // namespace ldeb
