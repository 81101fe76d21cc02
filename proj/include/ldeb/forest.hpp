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

// Random forest of CART trees on sparse count features.
//
// Each tree t is grown from its own stream Rng(seed, t): first the bootstrap
// resample (N draws with replacement, kept as per-row multiplicities), then
// the per-node feature draws in depth-first, left-first node order. Trees are
// therefore independent of how many threads build them.
//
// Splits are `x[f] <= threshold` goes left, thresholds are midpoints between
// consecutive distinct values, and the score is weighted child Gini impurity.
// At each node features are drawn without replacement in random order;
// features that are constant over the node are skipped without counting, and
// the search stops once max_features non-constant features were examined.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldeb/dataset.hpp"
#include "ldeb/error.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/parallel.hpp"
#include "ldeb/rng.hpp"

namespace ldeb {

/// 1 - sum p_i^2. Zero for pure nodes, (k-1)/k at a uniform k-class mix.
template <typename T>
  requires std::is_arithmetic_v<T>
double gini(std::span<const T> class_counts) {
  double total = 0.0;
  for (auto c : class_counts) total += static_cast<double>(c);
  if (!(total > 0.0)) throw Error(ErrorKind::EmptyNode, "gini of an empty node");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

template <typename T>
  requires std::is_arithmetic_v<T>
double gini(std::initializer_list<T> class_counts) {
  return gini(std::span<const T>(class_counts.begin(), class_counts.size()));
}

inline constexpr double kImpurityTolerance = 1e-12;

struct SplitCandidate {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

namespace detail {

struct ColumnEntry {
  double value;
  int label;
  double weight;
};

struct FeatureSplit {
  double threshold;
  double child_impurity;  // weighted by child sizes, divided by node size
};

inline double weighted_gini_sum(double a, double b) {
  const double n = a + b;
  return n > 0.0 ? n - (a * a + b * b) / n : 0.0;
}

// Best threshold for one feature. `nonzero` holds the node's entries with a
// nonzero value (any order); `zeros` the class weights of the implicit zeros.
// Returns nullopt if the feature is constant over the node.
inline std::optional<FeatureSplit> best_threshold(std::span<ColumnEntry> nonzero, std::array<double, 2> zeros,
                                                  std::array<double, 2> totals) {
  std::sort(nonzero.begin(), nonzero.end(),
            [](const ColumnEntry& x, const ColumnEntry& y) { return x.value < y.value; });
  const bool has_zeros = zeros[0] + zeros[1] > 0.0;
  if (nonzero.empty()) return std::nullopt;
  if (!has_zeros && nonzero.front().value == nonzero.back().value) return std::nullopt;

  const double n = totals[0] + totals[1];
  std::optional<FeatureSplit> best;
  std::array<double, 2> left = zeros;
  double prev = 0.0;
  bool have_prev = has_zeros;
  std::size_t i = 0;
  while (i < nonzero.size()) {
    const double v = nonzero[i].value;
    if (have_prev) {
      const double child =
          (weighted_gini_sum(left[0], left[1]) + weighted_gini_sum(totals[0] - left[0], totals[1] - left[1])) / n;
      if (!best || child < best->child_impurity - kImpurityTolerance) best = FeatureSplit{(prev + v) / 2.0, child};
    }
    while (i < nonzero.size() && nonzero[i].value == v) {
      left[static_cast<std::size_t>(nonzero[i].label)] += nonzero[i].weight;
      ++i;
    }
    prev = v;
    have_prev = true;
  }
  return best;
}

}  // namespace detail

/// Exhaustive search over `candidate_features` for the split with the lowest
/// weighted child Gini. Ties go to the lower feature index, then the lower
/// threshold. Returns nullopt when no split lowers the impurity.
inline std::optional<SplitCandidate> best_split(std::span<const FeatureVector> rows, std::span<const int> labels,
                                                std::span<const std::uint32_t> candidate_features,
                                                std::span<const double> weights = {}) {
  if (rows.size() != labels.size() || (!weights.empty() && weights.size() != rows.size())) {
    throw Error(ErrorKind::ShapeMismatch, "best_split inputs have different lengths");
  }
  std::array<double, 2> totals{0.0, 0.0};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    totals[static_cast<std::size_t>(labels[r])] += weights.empty() ? 1.0 : weights[r];
  }
  if (totals[0] + totals[1] <= 0.0) return std::nullopt;
  const double parent = gini(std::span<const double>(totals));
  if (parent <= kImpurityTolerance) return std::nullopt;

  std::vector<std::uint32_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<SplitCandidate> best;
  double best_child = 0.0;
  std::vector<detail::ColumnEntry> column;
  for (auto f : features) {
    column.clear();
    std::array<double, 2> zeros = totals;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto v = rows[r].value(f);
      if (v == 0) continue;
      const double w = weights.empty() ? 1.0 : weights[r];
      column.push_back({static_cast<double>(v), labels[r], w});
      zeros[static_cast<std::size_t>(labels[r])] -= w;
    }
    const auto split = detail::best_threshold(column, zeros, totals);
    if (!split) continue;
    if (!best || split->child_impurity < best_child - kImpurityTolerance) {
      best = SplitCandidate{f, split->threshold, parent - split->child_impurity};
      best_child = split->child_impurity;
    }
  }
  if (best && best->impurity_decrease <= kImpurityTolerance) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------

struct ForestConfig {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  /// Features examined per node; floor(sqrt(dimension)) (min 1) when unset.
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 0;
};

inline void validate(const ForestConfig& c) {
  if (c.n_trees < 1) throw Error(ErrorKind::Config, "forest n_trees must be >= 1");
  if (c.min_samples_split < 2) throw Error(ErrorKind::Config, "forest min_samples_split must be >= 2");
  if (c.max_features && *c.max_features < 1) throw Error(ErrorKind::Config, "forest max_features must be >= 1");
}

inline std::size_t features_per_node(const ForestConfig& c, std::size_t dimension) {
  if (c.max_features) return std::min(*c.max_features, std::max<std::size_t>(dimension, 1));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dimension)))));
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint32_t, 2> counts{0, 0};

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  ForestConfig config;
  std::size_t dimension = 0;
  std::vector<DecisionTree> trees;
};

inline const TreeNode& tree_leaf(const DecisionTree& tree, const FeatureVector& row) {
  const TreeNode* node = &tree.nodes.at(0);
  while (!node->is_leaf()) {
    const auto v = static_cast<double>(row.value(static_cast<std::uint32_t>(node->feature)));
    node = &tree.nodes[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

/// Majority class of the reached leaf; ties go to label 0.
inline int predict_tree(const DecisionTree& tree, const FeatureVector& row) {
  const auto& leaf = tree_leaf(tree, row);
  return leaf.counts[1] > leaf.counts[0] ? 1 : 0;
}

/// Majority vote over trees; exact ties go to label 0.
inline int predict_forest(const ForestModel& model, const FeatureVector& row) {
  std::size_t ones = 0;
  for (const auto& t : model.trees) ones += static_cast<std::size_t>(predict_tree(t, row));
  return 2 * ones > model.trees.size() ? 1 : 0;
}

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const BinaryDataset& data, const ForestConfig& config, std::size_t tree_index)
      : data_(data),
        config_(config),
        rng_(config.seed, tree_index),
        k_features_(features_per_node(config, data.dimension)),
        stamp_(data.dimension, 0),
        col_count_(data.dimension, 0),
        col_start_(data.dimension, 0),
        goes_right_(data.size(), 0) {}

  DecisionTree grow() {
    const std::size_t n = data_.size();
    weights_.assign(n, 0.0);
    if (config_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) weights_[rng_.below(n)] += 1.0;
    } else {
      std::fill(weights_.begin(), weights_.end(), 1.0);
    }
    std::vector<std::uint32_t> root_rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights_[i] > 0.0) root_rows.push_back(static_cast<std::uint32_t>(i));
    }

    DecisionTree tree;
    struct Pending {
      std::int32_t node;
      std::vector<std::uint32_t> rows;
      std::size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(root_rows), 0});
    while (!stack.empty()) {
      auto item = std::move(stack.back());
      stack.pop_back();

      std::array<double, 2> totals{0.0, 0.0};
      for (auto r : item.rows) totals[static_cast<std::size_t>(data_.labels[r])] += weights_[r];
      auto& node = tree.nodes[static_cast<std::size_t>(item.node)];
      node.counts = {static_cast<std::uint32_t>(totals[0]), static_cast<std::uint32_t>(totals[1])};

      const bool pure = totals[0] == 0.0 || totals[1] == 0.0;
      const bool too_small = totals[0] + totals[1] < static_cast<double>(config_.min_samples_split);
      const bool too_deep = config_.max_depth && item.depth >= *config_.max_depth;
      if (pure || too_small || too_deep) continue;

      const auto split = find_split(item.rows, totals);
      if (!split) continue;

      std::vector<std::uint32_t> left_rows, right_rows;
      mark_right(item.rows, split->feature, split->threshold);
      for (auto r : item.rows) (goes_right_[r] ? right_rows : left_rows).push_back(r);
      for (auto r : item.rows) goes_right_[r] = 0;

      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      const auto right_id = left_id + 1;
      // `node` may dangle after emplace_back; index again.
      tree.nodes[static_cast<std::size_t>(item.node)].feature = static_cast<std::int32_t>(split->feature);
      tree.nodes[static_cast<std::size_t>(item.node)].threshold = split->threshold;
      tree.nodes[static_cast<std::size_t>(item.node)].left = left_id;
      tree.nodes[static_cast<std::size_t>(item.node)].right = right_id;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({right_id, std::move(right_rows), item.depth + 1});
      stack.push_back({left_id, std::move(left_rows), item.depth + 1});
    }
    return tree;
  }

 private:
  struct Chosen {
    std::uint32_t feature;
    double threshold;
  };

  // Transposes the node's rows into per-feature columns over the features
  // present in the node.
  void gather_columns(const std::vector<std::uint32_t>& rows) {
    ++current_stamp_;
    present_.clear();
    for (auto r : rows) {
      for (const auto& e : data_.rows[r].entries) {
        if (stamp_[e.index] != current_stamp_) {
          stamp_[e.index] = current_stamp_;
          col_count_[e.index] = 0;
          present_.push_back(e.index);
        }
        ++col_count_[e.index];
      }
    }
    std::size_t offset = 0;
    for (auto f : present_) {
      col_start_[f] = offset;
      offset += col_count_[f];
      col_count_[f] = 0;
    }
    columns_.resize(offset);
    for (auto r : rows) {
      for (const auto& e : data_.rows[r].entries) {
        columns_[col_start_[e.index] + col_count_[e.index]++] =
            ColumnEntry{static_cast<double>(e.count), data_.labels[r], weights_[r]};
      }
    }
  }

  std::optional<Chosen> find_split(const std::vector<std::uint32_t>& rows, std::array<double, 2> totals) {
    gather_columns(rows);
    const double n = totals[0] + totals[1];
    const double parent = (weighted_gini_sum(totals[0], totals[1])) / n;

    std::optional<Chosen> best;
    double best_child = 0.0;
    std::size_t examined = 0;
    for (std::size_t i = 0; i < present_.size() && examined < k_features_; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(present_.size() - i));
      std::swap(present_[i], present_[j]);
      const auto f = present_[i];

      std::span<ColumnEntry> column(columns_.data() + col_start_[f], col_count_[f]);
      std::array<double, 2> zeros = totals;
      for (const auto& e : column) zeros[static_cast<std::size_t>(e.label)] -= e.weight;
      const auto split = best_threshold(column, zeros, totals);
      if (!split) continue;  // constant over the node
      ++examined;
      const bool better = !best || split->child_impurity < best_child - kImpurityTolerance ||
                          (split->child_impurity <= best_child + kImpurityTolerance && f < best->feature);
      if (better) {
        best = Chosen{f, split->threshold};
        best_child = split->child_impurity;
      }
    }
    if (!best || parent - best_child <= kImpurityTolerance) return std::nullopt;
    return best;
  }

  void mark_right(const std::vector<std::uint32_t>& rows, std::uint32_t feature, double threshold) {
    for (auto r : rows) {
      if (static_cast<double>(data_.rows[r].value(feature)) > threshold) goes_right_[r] = 1;
    }
  }

  const BinaryDataset& data_;
  const ForestConfig& config_;
  Rng rng_;
  std::size_t k_features_;
  std::vector<double> weights_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t current_stamp_ = 0;
  std::vector<std::uint32_t> col_count_;
  std::vector<std::size_t> col_start_;
  std::vector<std::uint32_t> present_;
  std::vector<ColumnEntry> columns_;
  std::vector<std::uint8_t> goes_right_;
};

}  // namespace detail

/// Grows one tree exactly as fit_forest grows tree `tree_index`.
inline DecisionTree grow_tree(const BinaryDataset& data, const ForestConfig& config, std::size_t tree_index) {
  return detail::TreeGrower(data, config, tree_index).grow();
}

inline ForestModel fit_forest(const BinaryDataset& data, const ForestConfig& config, unsigned jobs = 1) {
  validate(config);
  if (data.size() < 2) throw Error(ErrorKind::TooFewRows, "forest needs at least 2 training rows");
  require_two_classes(data.labels);

  ForestModel model;
  model.config = config;
  model.dimension = data.dimension;
  model.trees.resize(config.n_trees);
  parallel_for(config.n_trees, jobs, [&](std::size_t t) { model.trees[t] = grow_tree(data, config, t); });
  return model;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const ForestConfig& c) {
  nlohmann::json j;
  j["n_trees"] = c.n_trees;
  j["criterion"] = "gini";
  j["bootstrap"] = c.bootstrap;
  j["max_depth"] = c.max_depth ? nlohmann::json(*c.max_depth) : nlohmann::json(nullptr);
  j["min_samples_split"] = c.min_samples_split;
  j["max_features"] = c.max_features ? nlohmann::json(*c.max_features) : nlohmann::json("sqrt");
  j["seed"] = c.seed;
  return j;
}

inline ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig c = {}) {
  try {
    if (j.contains("n_trees")) c.n_trees = j.at("n_trees").get<std::size_t>();
    if (j.contains("criterion") && j.at("criterion") != "gini") {
      throw Error(ErrorKind::Config, "only the gini criterion is supported");
    }
    if (j.contains("bootstrap")) c.bootstrap = j.at("bootstrap").get<bool>();
    if (j.contains("max_depth")) {
      c.max_depth = j.at("max_depth").is_null() ? std::nullopt
                                                : std::optional<std::size_t>(j.at("max_depth").get<std::size_t>());
    }
    if (j.contains("min_samples_split")) c.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    if (j.contains("max_features")) {
      const auto& mf = j.at("max_features");
      c.max_features = mf.is_string() ? std::nullopt : std::optional<std::size_t>(mf.get<std::size_t>());
      if (mf.is_string() && mf != "sqrt") throw Error(ErrorKind::Config, "max_features must be 'sqrt' or a count");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("forest config: ") + e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const ForestModel& m) {
  nlohmann::json j;
  j["format"] = "ldeb-forest";
  j["version"] = 1;
  j["dimension"] = m.dimension;
  j["config"] = to_json(m.config);
  auto trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]});
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "ldeb-forest" || j.at("version") != 1) {
      throw Error(ErrorKind::ModelFormat, "not a version-1 forest model");
    }
    ForestModel m;
    m.dimension = j.at("dimension").get<std::size_t>();
    m.config = forest_config_from_json(j.at("config"));
    for (const auto& jt : j.at("trees")) {
      DecisionTree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<std::int32_t>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<std::int32_t>();
        n.right = jn.at(3).get<std::int32_t>();
        n.counts = {jn.at(4).get<std::uint32_t>(), jn.at(5).get<std::uint32_t>()};
        t.nodes.push_back(n);
      }
      const auto count = static_cast<std::int32_t>(t.nodes.size());
      if (count == 0) throw Error(ErrorKind::ModelFormat, "empty tree");
      for (const auto& n : t.nodes) {
        if (n.is_leaf()) continue;
        if (static_cast<std::size_t>(n.feature) >= m.dimension || n.left <= 0 || n.left >= count || n.right <= 0 ||
            n.right >= count) {
          throw Error(ErrorKind::ModelFormat, "tree node out of range");
        }
      }
      m.trees.push_back(std::move(t));
    }
    if (m.trees.empty()) throw Error(ErrorKind::ModelFormat, "forest has no trees");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, std::string("forest model: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ModelFormat) throw;
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

}  // namespace ldeb
