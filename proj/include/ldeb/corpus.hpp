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

// Conversation corpora in the DailyDialog layout: one dialogue per line with
// utterances separated by a delimiter token, and a parallel file holding one
// space-separated emotion class (0..6) per utterance.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ldeb/error.hpp"

namespace ldeb {

inline constexpr std::string_view kDefaultDelimiter = "__eou__";
inline constexpr int kNumEmotions = 7;

struct Dialogue {
  std::size_t id = 0;
  std::vector<std::string> utterances;
  std::vector<int> emotions;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::string source;

  std::size_t size() const noexcept { return dialogues.size(); }
  bool empty() const noexcept { return dialogues.empty(); }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.dialogues == b.dialogues; }
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  // Trailing blank lines are file padding, not dialogues.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline Error at_line(const Error& e, const std::filesystem::path& path, std::size_t line_no) {
  std::string what = e.what();
  const auto prefix = std::string(to_string(e.kind())) + ": ";
  if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
  return Error(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

/// Splits a dialogue line on `delimiter`, trimming each segment. Empty
/// segments (including the one after a trailing delimiter) are dropped.
inline std::vector<std::string> parse_dialogue_line(std::string_view line,
                                                    std::string_view delimiter = kDefaultDelimiter) {
  if (delimiter.empty()) throw Error(ErrorKind::Config, "empty utterance delimiter");
  std::vector<std::string> utterances;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(delimiter, start);
    if (end == std::string_view::npos) end = line.size();
    const auto segment = detail::trim(line.substr(start, end - start));
    if (!segment.empty()) utterances.emplace_back(segment);
    start = end + delimiter.size();
  }
  if (utterances.empty()) throw Error(ErrorKind::EmptyDialogue, "dialogue has no utterances");
  return utterances;
}

inline std::vector<int> parse_emotion_line(std::string_view line) {
  std::vector<int> labels;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && detail::is_space(line[i])) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !detail::is_space(line[j])) ++j;
    const auto token = line.substr(i, j - i);
    if (token.size() != 1 || token[0] < '0' || token[0] > '6') {
      throw Error(ErrorKind::BadLabel, "emotion label '" + std::string(token) + "' is not in 0..6");
    }
    labels.push_back(token[0] - '0');
    i = j;
  }
  if (labels.empty()) throw Error(ErrorKind::BadLabel, "no emotion labels");
  return labels;
}

inline void validate_dialogue(const Dialogue& d) {
  if (d.utterances.empty()) {
    throw Error(ErrorKind::EmptyDialogue, "dialogue " + std::to_string(d.id) + " has no utterances");
  }
  if (d.utterances.size() != d.emotions.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "dialogue " + std::to_string(d.id) + " has " + std::to_string(d.utterances.size()) +
                    " utterances but " + std::to_string(d.emotions.size()) + " emotion labels");
  }
  for (int e : d.emotions) {
    if (e < 0 || e >= kNumEmotions) {
      throw Error(ErrorKind::BadLabel, "dialogue " + std::to_string(d.id) + " has label " + std::to_string(e));
    }
  }
}

inline Corpus load_corpus(const std::filesystem::path& dialogues_path,
                          const std::filesystem::path& emotions_path,
                          std::string_view delimiter = kDefaultDelimiter) {
  const auto text_lines = detail::read_lines(dialogues_path);
  const auto label_lines = detail::read_lines(emotions_path);
  if (text_lines.size() != label_lines.size()) {
    throw Error(ErrorKind::LineCountMismatch, dialogues_path.string() + " has " +
                                                  std::to_string(text_lines.size()) + " lines, " +
                                                  emotions_path.string() + " has " +
                                                  std::to_string(label_lines.size()));
  }

  Corpus corpus;
  corpus.source = dialogues_path.string() + "," + emotions_path.string();
  corpus.dialogues.reserve(text_lines.size());
  for (std::size_t i = 0; i < text_lines.size(); ++i) {
    Dialogue d;
    d.id = i;
    try {
      d.utterances = parse_dialogue_line(text_lines[i], delimiter);
    } catch (const Error& e) {
      throw detail::at_line(e, dialogues_path, i + 1);
    }
    try {
      d.emotions = parse_emotion_line(label_lines[i]);
      validate_dialogue(d);
    } catch (const Error& e) {
      throw detail::at_line(e, emotions_path, i + 1);
    }
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

/// JSON-lines adapter: one object per line with "utterances" (strings) and
/// "emotions" (integers 0..6). Same validation as the two-file loader.
inline Corpus load_corpus_jsonl(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  Corpus corpus;
  corpus.source = path.string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Dialogue d;
    d.id = i;
    try {
      const auto obj = nlohmann::json::parse(lines[i]);
      if (!obj.is_object() || !obj.contains("utterances") || !obj.contains("emotions")) {
        throw Error(ErrorKind::BadFormat, "expected an object with 'utterances' and 'emotions'");
      }
      for (const auto& u : obj.at("utterances")) {
        if (!u.is_string()) throw Error(ErrorKind::BadFormat, "utterance is not a string");
        const auto text = detail::trim(u.get_ref<const std::string&>());
        if (text.empty()) throw Error(ErrorKind::EmptyDialogue, "empty utterance");
        d.utterances.emplace_back(text);
      }
      for (const auto& e : obj.at("emotions")) {
        if (!e.is_number_integer()) throw Error(ErrorKind::BadLabel, "emotion label is not an integer");
        d.emotions.push_back(e.get<int>());
      }
      validate_dialogue(d);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::BadFormat, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw detail::at_line(e, path, i + 1);
    }
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

/// Writes the two-file text layout that load_corpus reads.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& dialogues_path,
                         const std::filesystem::path& emotions_path,
                         std::string_view delimiter = kDefaultDelimiter) {
  std::ofstream text(dialogues_path, std::ios::binary);
  std::ofstream labels(emotions_path, std::ios::binary);
  if (!text || !labels) throw Error(ErrorKind::Io, "cannot write corpus files");
  for (const auto& d : corpus.dialogues) {
    for (std::size_t u = 0; u < d.utterances.size(); ++u) {
      text << d.utterances[u] << ' ' << delimiter << (u + 1 < d.utterances.size() ? " " : "");
    }
    text << '\n';
    for (std::size_t e = 0; e < d.emotions.size(); ++e) labels << (e ? " " : "") << d.emotions[e];
    labels << '\n';
  }
}

}  // namespace ldeb
