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

// ldeb: label digitization, featurization, hierarchical split-sets,
// per-level training, evaluation and cascade prediction.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 model error.
// Errors are printed as one line: `error: <Kind>: <message>`.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ldeb/ldeb.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> jobs;
  std::string dialogues, emotions, jsonl, delimiter;
  std::optional<std::size_t> repeats;
  std::string learners;
  std::string format = "csv";
  std::string model_dir;
  std::string text;
  std::string learner;
};

ldeb::RunConfig resolve_config(const Flags& f) {
  auto c = f.config.empty() ? ldeb::RunConfig{} : ldeb::load_run_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.dialogues.empty()) {
    c.input.format = "text";
    c.input.dialogues = f.dialogues;
  }
  if (!f.emotions.empty()) c.input.emotions = f.emotions;
  if (!f.jsonl.empty()) {
    c.input.format = "jsonl";
    c.input.jsonl = f.jsonl;
  }
  if (!f.delimiter.empty()) c.input.delimiter = f.delimiter;
  if (f.repeats) c.repeats = *f.repeats;
  if (!f.learners.empty()) {
    c.learners.clear();
    std::size_t start = 0;
    while (start <= f.learners.size()) {
      auto end = f.learners.find(',', start);
      if (end == std::string::npos) end = f.learners.size();
      c.learners.push_back(ldeb::learner_from_string(f.learners.substr(start, end - start)));
      start = end + 1;
    }
  }
  return c;
}

int run(CLI::App& app, const Flags& f) {
  auto c = resolve_config(f);
  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  if (name == "stats") {
    const auto s = ldeb::cmd_stats(c);
    if (f.format == "json") {
      std::cout << ldeb::to_json(s).dump(2) << '\n';
    } else {
      ldeb::write_histogram_csv(std::cout, s.histogram);
    }
  } else if (name == "export") {
    const auto p = ldeb::cmd_export(c);
    std::cout << "dialogues " << p.corpus.size() << "\ntotal_tokens " << p.vocab.total_tokens << "\nunique_tokens "
              << p.vocab.vocabulary.size() << "\nwrote " << (c.out / "dataset.ldeb").string() << '\n';
  } else if (name == "split") {
    const auto s = ldeb::cmd_split(c);
    ldeb::write_balance_csv(std::cout, s.balance);
  } else if (name == "train") {
    const auto manifest = ldeb::cmd_train(c);
    std::cout << "config_hash " << manifest.at("config_hash").get<std::string>() << '\n';
    for (const auto& m : manifest.at("models")) {
      std::cout << m.at("model_file").get<std::string>() << " train_accuracy "
                << m.at("train_accuracy").back().get<double>() << '\n';
    }
  } else if (name == "evaluate") {
    const auto dir = f.model_dir.empty() ? c.out : std::filesystem::path(f.model_dir);
    const auto report = ldeb::cmd_evaluate(c, dir);
    std::cout << ldeb::format_table(report, c.split_spec.num_levels());
    for (const auto& ce : report.cascades) {
      std::cout << "cascade " << ldeb::to_string(ce.learner) << " leaf accuracy " << ce.correct << '/' << ce.total
                << '\n';
    }
  } else if (name == "predict") {
    const auto dir = f.model_dir.empty() ? c.out : std::filesystem::path(f.model_dir);
    std::optional<ldeb::LearnerKind> learner;
    if (!f.learner.empty()) learner = ldeb::learner_from_string(f.learner);
    const auto cascade = ldeb::load_cascade(dir, learner);
    ldeb::print_prediction(std::cout, ldeb::cmd_predict(cascade, f.text, c.input.delimiter));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-set labels, bag-of-words features and hierarchical classifiers for dialogue corpora"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--seed", f.seed, "Run seed (overrides config)");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--jobs", f.jobs, "Worker threads for vectorization and forest training");
  app.add_option("--dialogues", f.dialogues, "Dialogue text file (one dialogue per line)");
  app.add_option("--emotions", f.emotions, "Emotion label file (one line per dialogue)");
  app.add_option("--jsonl", f.jsonl, "JSON-lines corpus instead of the two text files");
  app.add_option("--delimiter", f.delimiter, "Utterance delimiter (default __eou__)");
  app.add_option("--learners", f.learners, "Comma-separated learners: forest,mlp");

  auto* stats = app.add_subcommand("stats", "Emo_Sum histogram of a corpus");
  stats->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_subcommand("export", "Write vocabulary and sparse dataset");
  app.add_subcommand("split", "Write per-level split-sets and the balance report");
  app.add_subcommand("train", "Train per-level models and write the manifest");
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on the held-out partition");
  evaluate->add_option("--model-dir", f.model_dir, "Directory written by train (default --out)");
  evaluate->add_option("--repeats", f.repeats, "Number of seeds to run");
  auto* predict = app.add_subcommand("predict", "Route one dialogue through the trained cascade");
  predict->add_option("--model-dir", f.model_dir, "Directory written by train (default --out)");
  predict->add_option("--text", f.text, "Dialogue text, utterances separated by the delimiter")->required();
  predict->add_option("--learner", f.learner, "forest or mlp (default: first trained)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Config: " << e.what() << '\n';
    return 2;
  }

  try {
    return run(app, f);
  } catch (const ldeb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldeb::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: Io: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 1;
  }
}
