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

// Train/test splitting, binary confusion matrices and their metrics,
// per-level evaluation, and cascade inference over the trained levels.
// The positive class is binary label 1 throughout.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ldeb/dataset.hpp"
#include "ldeb/error.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/forest.hpp"
#include "ldeb/hiersplit.hpp"
#include "ldeb/mlp.hpp"
#include "ldeb/rng.hpp"

namespace ldeb {

inline constexpr std::uint64_t kSplitStream = 0x7E57'5B17ull;

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1; the first floor(ratio * n) go to train.
inline TrainTestSplit train_test_split(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::Config, "train ratio must be in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, kSplitStream);
  rng.shuffle(std::span(order));
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorKind::TooFewRows, "a " + std::to_string(ratio) + " split of " + std::to_string(n) +
                                           " rows leaves one side empty");
  }
  TrainTestSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

/// Stratified variant: each label class is split separately at `ratio`.
inline TrainTestSplit stratified_train_test_split(std::span<const int> labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::Config, "train ratio must be in (0, 1)");
  TrainTestSplit out;
  Rng rng(seed, kSplitStream);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span(members));
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  if (out.train.empty() || out.test.empty()) throw Error(ErrorKind::TooFewRows, "stratified split leaves a side empty");
  return out;
}

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw Error(ErrorKind::LengthMismatch, "confusion needs equal, non-empty label lists");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == 1, p = y_pred[i] == 1;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (t && !p) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

/// Ratios with a zero denominator are absent rather than 0.
struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> precision;     // tp / (tp + fp)
  std::optional<double> sensitivity;   // tp / (tp + fn)
  std::optional<double> specificity;   // tn / (tn + fp)
  std::optional<double> npv;           // tn / (tn + fn): precision with label 0 as positive
  std::optional<double> tp_fp_ratio;
  std::optional<double> tp_fn_ratio;
  // Row-normalized confusion: rate[t][p] = P(pred p | true t).
  std::optional<double> rate[2][2];
};

namespace detail {
inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

inline MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.accuracy = detail::ratio(cm.tp + cm.tn, cm.total());
  r.precision = detail::ratio(cm.tp, cm.tp + cm.fp);
  r.sensitivity = detail::ratio(cm.tp, cm.tp + cm.fn);
  r.specificity = detail::ratio(cm.tn, cm.tn + cm.fp);
  r.npv = detail::ratio(cm.tn, cm.tn + cm.fn);
  r.tp_fp_ratio = detail::ratio(cm.tp, cm.fp);
  r.tp_fn_ratio = detail::ratio(cm.tp, cm.fn);
  r.rate[0][0] = detail::ratio(cm.tn, cm.tn + cm.fp);
  r.rate[0][1] = detail::ratio(cm.fp, cm.tn + cm.fp);
  r.rate[1][0] = detail::ratio(cm.fn, cm.tp + cm.fn);
  r.rate[1][1] = detail::ratio(cm.tp, cm.tp + cm.fn);
  return r;
}

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"accuracy", opt(r.accuracy)},
          {"precision", opt(r.precision)},
          {"sensitivity", opt(r.sensitivity)},
          {"specificity", opt(r.specificity)},
          {"npv", opt(r.npv)},
          {"tp_fp_ratio", opt(r.tp_fp_ratio)},
          {"tp_fn_ratio", opt(r.tp_fn_ratio)},
          {"row_normalized", {{opt(r.rate[0][0]), opt(r.rate[0][1])}, {opt(r.rate[1][0]), opt(r.rate[1][1])}}}};
}

// ---------------------------------------------------------------------------
// Learners behind one interface

enum class LearnerKind { Forest, Mlp };

inline std::string_view to_string(LearnerKind k) { return k == LearnerKind::Forest ? "forest" : "mlp"; }

using LearnerConfig = std::variant<ForestConfig, MlpConfig>;
using LevelModel = std::variant<ForestModel, MlpModel>;

inline LearnerKind kind_of(const LearnerConfig& c) {
  return std::holds_alternative<ForestConfig>(c) ? LearnerKind::Forest : LearnerKind::Mlp;
}

inline int predict(const LevelModel& model, const FeatureVector& row) {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ForestModel>) {
          return predict_forest(m, row);
        } else {
          return mlp_predict(m, row);
        }
      },
      model);
}

struct TrainedLevel {
  LevelModel model;
  std::vector<double> train_accuracy;  // one value for forests, one per epoch for MLPs
};

/// Trains with `seed` substituted into the learner's config.
inline TrainedLevel train_level(const BinaryDataset& data, LearnerConfig config, std::uint64_t seed, unsigned jobs = 1) {
  if (auto* fc = std::get_if<ForestConfig>(&config)) {
    fc->seed = seed;
    auto model = fit_forest(data, *fc, jobs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += predict_forest(model, data.rows[i]) == data.labels[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(data.size());
    return {std::move(model), {acc}};
  }
  auto mc = std::get<MlpConfig>(config);
  mc.seed = seed;
  auto result = mlp_train(data, mc);
  return {std::move(result.model), std::move(result.train_accuracy)};
}

struct LevelEvaluation {
  std::size_t level = 0;
  LearnerKind learner = LearnerKind::Forest;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
  std::vector<double> train_accuracy;
};

inline ConfusionMatrix evaluate_model(const LevelModel& model, const BinaryDataset& test) {
  std::vector<int> pred;
  pred.reserve(test.size());
  for (const auto& row : test.rows) pred.push_back(predict(model, row));
  return confusion(test.labels, pred);
}

inline LevelEvaluation evaluate_level(const SplitSet& split, const FeatureMatrix& matrix, const LearnerConfig& learner,
                                      std::uint64_t seed, double train_ratio = 0.8, unsigned jobs = 1,
                                      bool stratified = false) {
  const auto parts = stratified ? stratified_train_test_split(split.labels, train_ratio, seed)
                                : train_test_split(split.size(), train_ratio, seed);
  const auto train = select_rows(matrix, split, parts.train);
  const auto test = select_rows(matrix, split, parts.test);
  auto trained = train_level(train, learner, seed, jobs);

  LevelEvaluation ev;
  ev.level = split.level;
  ev.learner = kind_of(learner);
  ev.seed = seed;
  ev.train_rows = train.size();
  ev.test_rows = test.size();
  ev.confusion = evaluate_model(trained.model, test);
  ev.metrics = metrics(ev.confusion);
  ev.train_accuracy = std::move(trained.train_accuracy);
  return ev;
}

// ---------------------------------------------------------------------------
// Cascade

struct CascadeModel {
  SplitSpec spec;
  Vocabulary vocabulary;
  TokenizerOptions tokenizer;
  std::vector<std::optional<LevelModel>> levels;
};

/// Level k predicting 0 ends at leaf k; predicting 1 descends. A 1 at the
/// last level lands in the residual leaf L.
inline std::size_t cascade_predict(const FeatureVector& row, const CascadeModel& cascade) {
  if (cascade.levels.size() != cascade.spec.num_levels()) {
    throw Error(ErrorKind::UntrainedLevel, "cascade has " + std::to_string(cascade.levels.size()) +
                                               " models for " + std::to_string(cascade.spec.num_levels()) + " levels");
  }
  for (std::size_t k = 0; k < cascade.levels.size(); ++k) {
    if (!cascade.levels[k]) throw Error(ErrorKind::UntrainedLevel, "level " + std::to_string(k + 1) + " is untrained");
  }
  for (std::size_t k = 0; k < cascade.levels.size(); ++k) {
    if (predict(*cascade.levels[k], row) == 0) return k;
  }
  return cascade.levels.size();
}

inline std::size_t cascade_predict(const std::vector<std::string>& utterances, const CascadeModel& cascade) {
  return cascade_predict(vectorize_utterances(utterances, cascade.vocabulary, cascade.tokenizer), cascade);
}

}  // namespace ldeb
