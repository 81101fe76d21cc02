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

// Hierarchical split-sets. A SplitSpec lists, per level, the Emo_Sum group
// that receives binary label 0 at that level. Level k sees every dialogue not
// claimed by levels 1..k-1; everything no level claims falls through to the
// final residual leaf. With L levels there are L+1 leaves.

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldeb/emosum.hpp"
#include "ldeb/error.hpp"
#include "ldeb/featurize.hpp"

namespace ldeb {

struct SplitSpec {
  std::vector<std::vector<EmoSum>> levels;

  std::size_t num_levels() const noexcept { return levels.size(); }
  std::size_t num_leaves() const noexcept { return levels.size() + 1; }

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

inline void validate(const SplitSpec& spec) {
  if (spec.levels.empty()) throw Error(ErrorKind::Config, "split spec has no levels");
  std::set<EmoSum> seen;
  for (std::size_t k = 0; k < spec.levels.size(); ++k) {
    if (spec.levels[k].empty()) {
      throw Error(ErrorKind::Config, "split spec level " + std::to_string(k + 1) + " is empty");
    }
    for (auto v : spec.levels[k]) {
      if (!seen.insert(v).second) {
        throw Error(ErrorKind::Config, "Emo_Sum " + std::to_string(v.value()) + " appears in more than one level");
      }
    }
  }
}

/// {64}, {68}, {65, 69, 4}, {66, 96, 80}; residual leaf holds the rest.
inline SplitSpec default_split_spec() {
  auto group = [](std::initializer_list<int> values) {
    std::vector<EmoSum> out;
    for (int v : values) out.push_back(EmoSum::from(v));
    return out;
  };
  return SplitSpec{{group({64}), group({68}), group({65, 69, 4}), group({66, 96, 80})}};
}

/// Parses `[[64],[68],[65,69,4],[66,96,80]]`.
inline SplitSpec split_spec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Config, "split spec must be an array of arrays");
  SplitSpec spec;
  for (const auto& level : j) {
    if (!level.is_array()) throw Error(ErrorKind::Config, "split spec level must be an array");
    std::vector<EmoSum> group;
    for (const auto& v : level) {
      if (!v.is_number_integer()) throw Error(ErrorKind::Config, "split spec values must be integers");
      try {
        group.push_back(EmoSum::from(v.get<int>()));
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
      }
    }
    spec.levels.push_back(std::move(group));
  }
  validate(spec);
  return spec;
}

inline nlohmann::json to_json(const SplitSpec& spec) {
  auto out = nlohmann::json::array();
  for (const auto& level : spec.levels) {
    auto group = nlohmann::json::array();
    for (auto v : level) group.push_back(v.value());
    out.push_back(std::move(group));
  }
  return out;
}

/// Leaf index in 0..L: the first level whose group contains `value`, or L.
inline std::size_t route_to_leaf(EmoSum value, const SplitSpec& spec) {
  for (std::size_t k = 0; k < spec.levels.size(); ++k) {
    const auto& g = spec.levels[k];
    if (std::find(g.begin(), g.end(), value) != g.end()) return k;
  }
  return spec.levels.size();
}

inline std::size_t route_to_leaf(int value, const SplitSpec& spec) {
  return route_to_leaf(EmoSum::from(value), spec);
}

struct SplitSet {
  std::size_t level = 1;  // 1-based
  std::vector<std::size_t> row_ids;
  std::vector<int> labels;

  std::size_t size() const noexcept { return row_ids.size(); }
  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }
};

inline std::vector<SplitSet> build_split_sets(const LabeledCorpus& labeled, const SplitSpec& spec) {
  validate(spec);
  std::vector<SplitSet> splits(spec.num_levels());
  for (std::size_t k = 0; k < splits.size(); ++k) splits[k].level = k + 1;

  for (std::size_t r = 0; r < labeled.size(); ++r) {
    const auto leaf = route_to_leaf(labeled.rows[r].label, spec);
    // A row reaches levels 1..leaf+1 (capped at L); it is label 0 only where it stops.
    const auto deepest = std::min(leaf, spec.num_levels() - 1);
    for (std::size_t k = 0; k <= deepest; ++k) {
      splits[k].row_ids.push_back(r);
      splits[k].labels.push_back(k == leaf ? 0 : 1);
    }
  }

  for (const auto& s : splits) {
    const auto zeros = s.count(0);
    const auto ones = s.size() - zeros;
    if (zeros == 0 || ones == 0) {
      throw Error(ErrorKind::EmptySplitSet, "level " + std::to_string(s.level) + " has " + std::to_string(zeros) +
                                                " label-0 rows and " + std::to_string(ones) + " label-1 rows");
    }
  }
  return splits;
}

struct LevelBalance {
  std::size_t level = 0;
  std::size_t count0 = 0;
  std::size_t count1 = 0;
  double pct0 = 0.0;
  double pct1 = 0.0;
};

inline std::vector<LevelBalance> balance_report(const std::vector<SplitSet>& splits) {
  std::vector<LevelBalance> report;
  for (const auto& s : splits) {
    LevelBalance b;
    b.level = s.level;
    b.count0 = s.count(0);
    b.count1 = s.size() - b.count0;
    if (s.size() > 0) {
      b.pct0 = 100.0 * static_cast<double>(b.count0) / static_cast<double>(s.size());
      b.pct1 = 100.0 * static_cast<double>(b.count1) / static_cast<double>(s.size());
    }
    report.push_back(b);
  }
  return report;
}

/// Same sparse line format as the dataset, with the binary label first.
inline void write_split_set(std::ostream& os, const SplitSet& split, const FeatureMatrix& matrix) {
  for (std::size_t i = 0; i < split.size(); ++i) write_sparse_row(os, split.labels[i], matrix.rows.at(split.row_ids[i]));
}

}  // namespace ldeb
