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

// Run configuration and the stages behind the `ldeb` subcommands.
//
// Output directory layout:
//   vocab.txt               one token per line, line i (0-based) = feature i
//   dataset.ldeb            `<emo_sum> <index>:<count> ...` per dialogue
//   splits/level<k>.ldeb    same format, binary level label first
//   models/<learner>_m<k>.json
//   reports/*.json|csv|txt
//   manifest.json
//
// Training and evaluation share one corpus-level train/test partition drawn
// from the run seed. A level trains on its split rows that fall in the train
// partition and is scored on those in the test partition, so the cascade can
// be scored on held-out dialogues without leakage between levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldeb/corpus.hpp"
#include "ldeb/emosum.hpp"
#include "ldeb/error.hpp"
#include "ldeb/evaluate.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/forest.hpp"
#include "ldeb/hiersplit.hpp"
#include "ldeb/mlp.hpp"

namespace ldeb {

namespace fs = std::filesystem;

struct InputConfig {
  std::string format = "text";  // "text" or "jsonl"
  fs::path dialogues;
  fs::path emotions;
  fs::path jsonl;
  std::string delimiter{kDefaultDelimiter};
};

struct RunConfig {
  InputConfig input;
  SplitSpec split_spec = default_split_spec();
  TokenizerOptions tokenizer;
  std::vector<LearnerKind> learners{LearnerKind::Forest, LearnerKind::Mlp};
  ForestConfig forest;
  MlpConfig mlp;
  double train_ratio = 0.8;
  bool stratified = false;
  std::uint64_t seed = 0;
  std::size_t repeats = 5;
  fs::path out = "ldeb-out";
  unsigned jobs = 1;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Config (de)serialization

inline LearnerKind learner_from_string(const std::string& s) {
  if (s == "forest" || s == "rf") return LearnerKind::Forest;
  if (s == "mlp" || s == "ann") return LearnerKind::Mlp;
  throw Error(ErrorKind::Config, "unknown learner '" + s + "'");
}

/// Relative paths are resolved against `base_dir` (the config file's directory).
inline RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}, RunConfig c = {}) {
  auto resolve = [&](const nlohmann::json& v) {
    fs::path p = v.get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  try {
    if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    if (j.contains("input")) {
      const auto& in = j.at("input");
      if (in.contains("format")) c.input.format = in.at("format").get<std::string>();
      if (in.contains("dialogues")) c.input.dialogues = resolve(in.at("dialogues"));
      if (in.contains("emotions")) c.input.emotions = resolve(in.at("emotions"));
      if (in.contains("jsonl")) c.input.jsonl = resolve(in.at("jsonl"));
      if (in.contains("delimiter")) c.input.delimiter = in.at("delimiter").get<std::string>();
    }
    if (j.contains("split_spec")) c.split_spec = split_spec_from_json(j.at("split_spec"));
    if (j.contains("tokenizer")) {
      const auto& t = j.at("tokenizer");
      if (t.contains("lowercase")) c.tokenizer.lowercase = t.at("lowercase").get<bool>();
      if (t.contains("strip_interior")) c.tokenizer.strip_interior = t.at("strip_interior").get<bool>();
    }
    if (j.contains("learners")) {
      c.learners.clear();
      for (const auto& l : j.at("learners")) c.learners.push_back(learner_from_string(l.get<std::string>()));
    }
    if (j.contains("forest")) c.forest = forest_config_from_json(j.at("forest"), c.forest);
    if (j.contains("mlp")) c.mlp = mlp_config_from_json(j.at("mlp"), c.mlp);
    if (j.contains("train_ratio")) c.train_ratio = j.at("train_ratio").get<double>();
    if (j.contains("stratified")) c.stratified = j.at("stratified").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("repeats")) c.repeats = j.at("repeats").get<std::size_t>();
    if (j.contains("out")) c.out = resolve(j.at("out"));
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

/// Everything that determines results. Output directory and thread count are
/// left out: they never change what gets written.
inline nlohmann::json canonical_json(const RunConfig& c) {
  nlohmann::json learners = nlohmann::json::array();
  for (auto l : c.learners) learners.push_back(std::string(to_string(l)));
  return {{"input",
           {{"format", c.input.format},
            {"dialogues", c.input.dialogues.filename().string()},
            {"emotions", c.input.emotions.filename().string()},
            {"jsonl", c.input.jsonl.filename().string()},
            {"delimiter", c.input.delimiter}}},
          {"split_spec", to_json(c.split_spec)},
          {"tokenizer", {{"lowercase", c.tokenizer.lowercase}, {"strip_interior", c.tokenizer.strip_interior}}},
          {"learners", learners},
          {"forest", to_json(c.forest)},
          {"mlp", to_json(c.mlp)},
          {"train_ratio", c.train_ratio},
          {"stratified", c.stratified},
          {"seed", c.seed},
          {"repeats", c.repeats}};
}

inline void validate(const RunConfig& c) {
  validate(c.split_spec);
  validate(c.forest);
  validate(c.mlp);
  if (!(c.train_ratio > 0.0 && c.train_ratio < 1.0)) throw Error(ErrorKind::Config, "train_ratio must be in (0, 1)");
  if (c.repeats < 1) throw Error(ErrorKind::Config, "repeats must be >= 1");
  if (c.learners.empty()) throw Error(ErrorKind::Config, "no learners configured");
  auto require_file = [](const fs::path& p, const char* what) {
    if (p.empty()) throw Error(ErrorKind::Config, std::string("missing ") + what + " path");
    if (!fs::is_regular_file(p)) throw Error(ErrorKind::Config, std::string(what) + " file not found: " + p.string());
  };
  if (c.input.format == "text") {
    require_file(c.input.dialogues, "dialogues");
    require_file(c.input.emotions, "emotions");
  } else if (c.input.format == "jsonl") {
    require_file(c.input.jsonl, "jsonl");
  } else {
    throw Error(ErrorKind::Config, "input format must be 'text' or 'jsonl'");
  }
}

// ---------------------------------------------------------------------------
// Stages

struct Prepared {
  Corpus corpus;
  LabeledCorpus labeled;
  VocabularyBuild vocab;
  FeatureMatrix matrix;
};

inline Corpus load_input(const RunConfig& c) {
  validate(c);
  if (c.input.format == "jsonl") return load_corpus_jsonl(c.input.jsonl);
  return load_corpus(c.input.dialogues, c.input.emotions, c.input.delimiter);
}

inline Prepared prepare(const RunConfig& c) {
  Prepared p;
  p.corpus = load_input(c);
  p.labeled = label_corpus(p.corpus);
  p.vocab = build_vocabulary(p.corpus, c.tokenizer);
  p.matrix = build_feature_matrix(p.corpus, p.labeled, p.vocab.vocabulary, c.tokenizer, c.jobs);
  return p;
}

namespace detail {

inline std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return os;
}

inline void write_json(const fs::path& path, const nlohmann::json& j, int indent = 2) {
  auto os = open_out(path);
  os << j.dump(indent) << '\n';
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace detail

struct StatsSummary {
  std::size_t dialogues = 0;
  std::size_t total_tokens = 0;
  std::size_t unique_tokens = 0;
  EmoHistogram histogram;
};

inline StatsSummary cmd_stats(const RunConfig& c) {
  const auto corpus = load_input(c);
  StatsSummary s;
  s.dialogues = corpus.size();
  s.histogram = emo_histogram(label_corpus(corpus));
  if (!corpus.empty()) {
    const auto vb = build_vocabulary(corpus, c.tokenizer);
    s.total_tokens = vb.total_tokens;
    s.unique_tokens = vb.vocabulary.size();
  }
  return s;
}

inline nlohmann::json to_json(const StatsSummary& s) {
  auto rows = nlohmann::json::array();
  for (const auto& [v, n] : s.histogram) {
    rows.push_back({{"emo_sum", v.value()}, {"binary", emo_binary(v)}, {"description", emo_describe(v)}, {"count", n}});
  }
  return {{"dialogues", s.dialogues},
          {"total_tokens", s.total_tokens},
          {"unique_tokens", s.unique_tokens},
          {"histogram", rows}};
}

inline Prepared cmd_export(const RunConfig& c) {
  auto p = prepare(c);
  {
    auto os = detail::open_out(c.out / "vocab.txt");
    write_vocabulary(os, p.vocab.vocabulary);
  }
  {
    auto os = detail::open_out(c.out / "dataset.ldeb");
    write_dataset(os, p.matrix);
  }
  {
    auto os = detail::open_out(c.out / "reports" / "histogram.csv");
    write_histogram_csv(os, emo_histogram(p.labeled));
  }
  return p;
}

/// Reloads an exported dataset directory.
inline FeatureMatrix load_exported_dataset(const fs::path& dir, Vocabulary* vocab_out = nullptr) {
  std::ifstream vin(dir / "vocab.txt", std::ios::binary);
  if (!vin) throw Error(ErrorKind::Io, "cannot read " + (dir / "vocab.txt").string());
  auto vocab = read_vocabulary(vin);
  std::ifstream din(dir / "dataset.ldeb", std::ios::binary);
  if (!din) throw Error(ErrorKind::Io, "cannot read " + (dir / "dataset.ldeb").string());
  auto m = read_dataset(din, vocab.size());
  if (vocab_out) *vocab_out = std::move(vocab);
  return m;
}

inline nlohmann::json to_json(const std::vector<LevelBalance>& report) {
  auto out = nlohmann::json::array();
  for (const auto& b : report) {
    out.push_back({{"level", b.level}, {"count0", b.count0}, {"count1", b.count1}, {"pct0", b.pct0}, {"pct1", b.pct1}});
  }
  return out;
}

inline void write_balance_csv(std::ostream& os, const std::vector<LevelBalance>& report) {
  os << "level,count0,count1,pct0,pct1\n";
  for (const auto& b : report) {
    os << b.level << ',' << b.count0 << ',' << b.count1 << ',' << detail::fixed1(b.pct0) << ','
       << detail::fixed1(b.pct1) << '\n';
  }
}

struct SplitStage {
  Prepared prepared;
  std::vector<SplitSet> splits;
  std::vector<LevelBalance> balance;
};

inline SplitStage cmd_split(const RunConfig& c) {
  SplitStage s;
  s.prepared = cmd_export(c);
  s.splits = build_split_sets(s.prepared.labeled, c.split_spec);
  s.balance = balance_report(s.splits);
  for (const auto& split : s.splits) {
    auto os = detail::open_out(c.out / "splits" / ("level" + std::to_string(split.level) + ".ldeb"));
    write_split_set(os, split, s.prepared.matrix);
  }
  {
    auto os = detail::open_out(c.out / "reports" / "balance.csv");
    write_balance_csv(os, s.balance);
  }
  detail::write_json(c.out / "reports" / "balance.json", to_json(s.balance));
  return s;
}

/// Corpus-level partition shared by train and evaluate.
inline TrainTestSplit corpus_partition(const RunConfig& c, const LabeledCorpus& labeled, std::uint64_t seed) {
  if (c.stratified) {
    // Stratify on the residual-vs-first-group label of level 1.
    std::vector<int> top;
    for (const auto& r : labeled.rows) top.push_back(route_to_leaf(r.label, c.split_spec) == 0 ? 0 : 1);
    return stratified_train_test_split(top, c.train_ratio, seed);
  }
  return train_test_split(labeled.size(), c.train_ratio, seed);
}

struct LevelPartition {
  std::vector<std::size_t> train;  // positions within the split set
  std::vector<std::size_t> test;
};

inline LevelPartition partition_level(const SplitSet& split, const TrainTestSplit& corpus_parts, std::size_t n_rows) {
  std::vector<std::uint8_t> in_train(n_rows, 0);
  for (auto r : corpus_parts.train) in_train[r] = 1;
  LevelPartition lp;
  for (std::size_t i = 0; i < split.size(); ++i) (in_train[split.row_ids[i]] ? lp.train : lp.test).push_back(i);
  if (lp.train.empty() || lp.test.empty()) {
    throw Error(ErrorKind::TooFewRows, "level " + std::to_string(split.level) + " has an empty train or test side");
  }
  return lp;
}

inline LearnerConfig learner_config(const RunConfig& c, LearnerKind k) {
  if (k == LearnerKind::Forest) return c.forest;
  return c.mlp;
}

inline std::string model_filename(LearnerKind k, std::size_t level) {
  return std::string(to_string(k)) + "_m" + std::to_string(level) + ".json";
}

inline nlohmann::json to_json(const LevelModel& m) {
  return std::visit([](const auto& x) { return to_json(x); }, m);
}

inline LevelModel level_model_from_json(const nlohmann::json& j) {
  if (j.contains("format") && j.at("format") == "ldeb-forest") return forest_from_json(j);
  if (j.contains("format") && j.at("format") == "ldeb-mlp") return mlp_from_json(j);
  throw Error(ErrorKind::ModelFormat, "unrecognized model format");
}

inline nlohmann::json cmd_train(const RunConfig& c) {
  const auto stage = cmd_split(c);
  const auto& p = stage.prepared;
  const auto parts = corpus_partition(c, p.labeled, c.seed);

  nlohmann::json levels = nlohmann::json::array();
  for (auto kind : c.learners) {
    for (const auto& split : stage.splits) {
      const auto lp = partition_level(split, parts, p.labeled.size());
      const auto train = select_rows(p.matrix, split, lp.train);
      auto trained = train_level(train, learner_config(c, kind), c.seed, c.jobs);
      const auto file = model_filename(kind, split.level);
      const auto text = to_json(trained.model).dump();
      {
        auto os = detail::open_out(c.out / "models" / file);
        os << text << '\n';
      }
      levels.push_back({{"learner", std::string(to_string(kind))},
                        {"level", split.level},
                        {"train_rows", lp.train.size()},
                        {"test_rows", lp.test.size()},
                        {"train_accuracy", trained.train_accuracy},
                        {"model_file", "models/" + file},
                        {"model_hash", hex64(fnv1a64(text))}});
    }
  }

  const auto config = canonical_json(c);
  nlohmann::json manifest = {{"format", "ldeb-run"},
                             {"version", 1},
                             {"config", config},
                             {"config_hash", hex64(fnv1a64(config.dump()))},
                             {"seed", c.seed},
                             {"dialogues", p.corpus.size()},
                             {"vocabulary_size", p.vocab.vocabulary.size()},
                             {"total_tokens", p.vocab.total_tokens},
                             {"balance", to_json(stage.balance)},
                             {"models", levels}};
  detail::write_json(c.out / "manifest.json", manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// Evaluation reports

struct MetricSummary {
  double best = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

inline MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  s.best = *std::max_element(xs.begin(), xs.end());
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = xs.size() > 1 ? std::sqrt(s.sd / static_cast<double>(xs.size() - 1)) : 0.0;
  return s;
}

struct CascadeEvaluation {
  LearnerKind learner = LearnerKind::Forest;
  std::vector<std::vector<std::size_t>> leaf_confusion;  // [true leaf][predicted leaf]
  std::size_t correct = 0;
  std::size_t total = 0;
};

struct EvaluationReport {
  // runs[learner][level-1][repeat]
  std::map<LearnerKind, std::vector<std::vector<LevelEvaluation>>> runs;
  std::vector<CascadeEvaluation> cascades;
};

inline LevelEvaluation run_level(const SplitSet& split, const FeatureMatrix& matrix, const LevelPartition& lp,
                                 const LevelModel& model, LearnerKind kind, std::uint64_t seed,
                                 std::vector<double> train_accuracy) {
  LevelEvaluation ev;
  ev.level = split.level;
  ev.learner = kind;
  ev.seed = seed;
  ev.train_rows = lp.train.size();
  ev.test_rows = lp.test.size();
  ev.confusion = evaluate_model(model, select_rows(matrix, split, lp.test));
  ev.metrics = metrics(ev.confusion);
  ev.train_accuracy = std::move(train_accuracy);
  return ev;
}

inline nlohmann::json read_manifest(const fs::path& model_dir) {
  const auto path = model_dir / "manifest.json";
  if (!fs::is_regular_file(path)) throw Error(ErrorKind::ModelFormat, "no trained models in " + model_dir.string());
  try {
    return nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, path.string() + ": " + e.what());
  }
}

inline LevelModel load_level_model(const fs::path& model_dir, LearnerKind kind, std::size_t level) {
  const auto path = model_dir / "models" / model_filename(kind, level);
  if (!fs::is_regular_file(path)) throw Error(ErrorKind::ModelFormat, "missing model file " + path.string());
  try {
    return level_model_from_json(nlohmann::json::parse(detail::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, path.string() + ": " + e.what());
  }
}

inline std::vector<LearnerKind> manifest_learners(const nlohmann::json& manifest) {
  std::vector<LearnerKind> out;
  for (const auto& l : manifest.at("config").at("learners")) out.push_back(learner_from_string(l.get<std::string>()));
  return out;
}

inline nlohmann::json to_json(const LevelEvaluation& ev) {
  return {{"level", ev.level},
          {"learner", std::string(to_string(ev.learner))},
          {"seed", ev.seed},
          {"train_rows", ev.train_rows},
          {"test_rows", ev.test_rows},
          {"confusion", to_json(ev.confusion)},
          {"metrics", to_json(ev.metrics)},
          {"train_accuracy", ev.train_accuracy}};
}

inline void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm) {
  const auto m = metrics(cm);
  auto pct = [](const std::optional<double>& v) { return v ? detail::fixed1(100.0 * *v) : std::string(""); };
  os << "true_label,pred_0,pred_1,pct_pred_0,pct_pred_1\n";
  os << "0," << cm.tn << ',' << cm.fp << ',' << pct(m.rate[0][0]) << ',' << pct(m.rate[0][1]) << '\n';
  os << "1," << cm.fn << ',' << cm.tp << ',' << pct(m.rate[1][0]) << ',' << pct(m.rate[1][1]) << '\n';
}

/// Table with rows learner x {A, P, S(spec), S(sens)} and columns M1..ML,
/// using the best-accuracy run of each level.
inline std::string format_table(const EvaluationReport& report, std::size_t num_levels) {
  std::ostringstream os;
  os << "learner metric  ";
  for (std::size_t k = 1; k <= num_levels; ++k) os << "  M" << k << "   ";
  os << '\n';
  for (const auto& [kind, levels] : report.runs) {
    const char* rows[] = {"A", "P", "S(spec)", "S(sens)"};
    for (int r = 0; r < 4; ++r) {
      char head[32];
      std::snprintf(head, sizeof head, "%-7s %-8s", r == 0 ? std::string(to_string(kind)).c_str() : "", rows[r]);
      os << head;
      for (const auto& runs : levels) {
        const auto best = std::max_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
          return a.metrics.accuracy.value_or(0.0) < b.metrics.accuracy.value_or(0.0);
        });
        std::optional<double> v;
        switch (r) {
          case 0: v = best->metrics.accuracy; break;
          case 1: v = best->metrics.precision; break;
          case 2: v = best->metrics.specificity; break;
          default: v = best->metrics.sensitivity; break;
        }
        os << ' ' << (v ? detail::fixed3(*v) : std::string("  -  ")) << ' ';
      }
      os << '\n';
    }
  }
  return os.str();
}

inline EvaluationReport cmd_evaluate(const RunConfig& c, const fs::path& model_dir) {
  const auto manifest = read_manifest(model_dir);
  const auto stage_seed = manifest.at("seed").get<std::uint64_t>();
  auto p = prepare(c);
  const auto splits = build_split_sets(p.labeled, c.split_spec);
  const auto parts = corpus_partition(c, p.labeled, stage_seed);
  const auto learners = manifest_learners(manifest);

  EvaluationReport report;
  for (auto kind : learners) {
    auto& per_level = report.runs[kind];
    std::vector<std::optional<LevelModel>> persisted;
    for (const auto& split : splits) {
      const auto lp = partition_level(split, parts, p.labeled.size());
      auto model = load_level_model(model_dir, kind, split.level);
      std::vector<double> curve;
      for (const auto& m : manifest.at("models")) {
        if (m.at("learner") == to_string(kind) && m.at("level") == split.level) {
          curve = m.at("train_accuracy").get<std::vector<double>>();
        }
      }
      std::vector<LevelEvaluation> runs;
      runs.push_back(run_level(split, p.matrix, lp, model, kind, stage_seed, curve));
      // Extra repeats retrain with seed + r on their own partition.
      for (std::size_t r = 1; r < c.repeats; ++r) {
        const auto seed = stage_seed + r;
        const auto rparts = corpus_partition(c, p.labeled, seed);
        const auto rlp = partition_level(split, rparts, p.labeled.size());
        auto trained = train_level(select_rows(p.matrix, split, rlp.train), learner_config(c, kind), seed, c.jobs);
        runs.push_back(run_level(split, p.matrix, rlp, trained.model, kind, seed, trained.train_accuracy));
      }
      per_level.push_back(std::move(runs));
      persisted.push_back(std::move(model));
    }

    // Cascade over held-out dialogues of the persisted run.
    CascadeModel cascade{c.split_spec, p.vocab.vocabulary, c.tokenizer, std::move(persisted)};
    CascadeEvaluation ce;
    ce.learner = kind;
    const auto leaves = c.split_spec.num_leaves();
    ce.leaf_confusion.assign(leaves, std::vector<std::size_t>(leaves, 0));
    for (auto r : parts.test) {
      const auto truth = route_to_leaf(p.labeled.rows[r].label, c.split_spec);
      const auto pred = cascade_predict(p.matrix.rows[r], cascade);
      ++ce.leaf_confusion[truth][pred];
      ce.correct += truth == pred;
      ++ce.total;
    }
    report.cascades.push_back(std::move(ce));
  }

  // Reports.
  nlohmann::json jr = {{"seed", stage_seed}, {"repeats", c.repeats}};
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& [kind, levels] : report.runs) {
    for (const auto& runs : levels) {
      std::vector<double> acc, prec, sens, spec;
      nlohmann::json jruns = nlohmann::json::array();
      for (const auto& ev : runs) {
        jruns.push_back(to_json(ev));
        if (ev.metrics.accuracy) acc.push_back(*ev.metrics.accuracy);
        if (ev.metrics.precision) prec.push_back(*ev.metrics.precision);
        if (ev.metrics.sensitivity) sens.push_back(*ev.metrics.sensitivity);
        if (ev.metrics.specificity) spec.push_back(*ev.metrics.specificity);
      }
      auto sj = [](const MetricSummary& s) { return nlohmann::json{{"best", s.best}, {"mean", s.mean}, {"sd", s.sd}}; };
      jl.push_back({{"learner", std::string(to_string(kind))},
                    {"level", runs.front().level},
                    {"runs", jruns},
                    {"accuracy", sj(summarize(acc))},
                    {"precision", sj(summarize(prec))},
                    {"sensitivity", sj(summarize(sens))},
                    {"specificity", sj(summarize(spec))}});
      auto os = detail::open_out(c.out / "reports" /
                                 ("confusion_" + std::string(to_string(kind)) + "_m" +
                                  std::to_string(runs.front().level) + ".csv"));
      write_confusion_csv(os, runs.front().confusion);
    }
  }
  jr["levels"] = std::move(jl);
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& ce : report.cascades) {
    jc.push_back({{"learner", std::string(to_string(ce.learner))},
                  {"leaf_confusion", ce.leaf_confusion},
                  {"correct", ce.correct},
                  {"total", ce.total},
                  {"accuracy", ce.total ? static_cast<double>(ce.correct) / static_cast<double>(ce.total) : 0.0}});
  }
  jr["cascade"] = std::move(jc);
  detail::write_json(c.out / "reports" / "evaluation.json", jr);
  {
    auto os = detail::open_out(c.out / "reports" / "table.txt");
    os << format_table(report, splits.size());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Prediction

inline CascadeModel load_cascade(const fs::path& model_dir, std::optional<LearnerKind> learner = std::nullopt) {
  const auto manifest = read_manifest(model_dir);
  const auto learners = manifest_learners(manifest);
  const auto kind = learner.value_or(learners.empty() ? LearnerKind::Forest : learners.front());
  if (std::find(learners.begin(), learners.end(), kind) == learners.end()) {
    throw Error(ErrorKind::UntrainedLevel, "no " + std::string(to_string(kind)) + " models in " + model_dir.string());
  }
  CascadeModel cascade;
  try {
    const auto cfg = run_config_from_json(manifest.at("config"));
    cascade.spec = cfg.split_spec;
    cascade.tokenizer = cfg.tokenizer;
  } catch (const Error& e) {
    throw Error(ErrorKind::ModelFormat, std::string("manifest: ") + e.what());
  }
  std::ifstream vin(model_dir / "vocab.txt", std::ios::binary);
  if (!vin) throw Error(ErrorKind::ModelFormat, "missing vocab.txt in " + model_dir.string());
  cascade.vocabulary = read_vocabulary(vin);
  for (std::size_t k = 1; k <= cascade.spec.num_levels(); ++k) {
    cascade.levels.emplace_back(load_level_model(model_dir, kind, k));
  }
  return cascade;
}

struct Prediction {
  std::size_t leaf = 0;
  std::vector<EmoSum> group;  // empty for the residual leaf
  bool residual = false;
};

inline Prediction cmd_predict(const CascadeModel& cascade, std::string_view text, std::string_view delimiter) {
  const auto utterances = parse_dialogue_line(text, delimiter);
  Prediction p;
  p.leaf = cascade_predict(utterances, cascade);
  p.residual = p.leaf == cascade.spec.num_levels();
  if (!p.residual) p.group = cascade.spec.levels[p.leaf];
  return p;
}

inline void print_prediction(std::ostream& os, const Prediction& p) {
  os << "leaf " << p.leaf << '\n';
  if (p.residual) {
    os << "group residual (every Emo_Sum outside the level groups)\n";
    return;
  }
  for (auto v : p.group) os << v.value() << ' ' << emo_binary(v) << ' ' << emo_describe(v) << '\n';
}

}  // namespace ldeb
