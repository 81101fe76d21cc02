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

// Bag-of-words feature space: token normalization, a first-occurrence-ordered
// vocabulary, and sparse per-dialogue token counts. Also the sparse text
// format `<label> <index>:<count> ...` used for dataset and split exports.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ldeb/corpus.hpp"
#include "ldeb/emosum.hpp"
#include "ldeb/error.hpp"
#include "ldeb/parallel.hpp"

namespace ldeb {

struct TokenizerOptions {
  bool lowercase = true;
  /// Also remove punctuation inside tokens ("don't" -> "dont").
  bool strip_interior = false;

  friend bool operator==(const TokenizerOptions&, const TokenizerOptions&) = default;
};

namespace detail {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

// Malformed UTF-8 bytes decode as themselves, one byte at a time.
inline CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
    }
  }
  return {b0, 1};
}

}  // namespace detail

/// ASCII punctuation and symbols plus the common Unicode punctuation blocks
/// (Latin-1 marks, general punctuation, CJK and full-width punctuation).
constexpr bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65);
}

namespace detail {

inline std::string normalize_token(std::string_view raw, const TokenizerOptions& options) {
  // Decode once so leading/trailing stripping works on code points.
  std::vector<std::pair<std::size_t, CodePoint>> cps;
  for (std::size_t pos = 0; pos < raw.size();) {
    const auto cp = decode_utf8(raw, pos);
    cps.emplace_back(pos, cp);
    pos += cp.length;
  }
  std::size_t first = 0, last = cps.size();
  while (first < last && is_punctuation(cps[first].second.value)) ++first;
  while (last > first && is_punctuation(cps[last - 1].second.value)) --last;

  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = first; i < last; ++i) {
    const auto& [pos, cp] = cps[i];
    if (options.strip_interior && is_punctuation(cp.value)) continue;
    out.append(raw.substr(pos, cp.length));
  }
  if (options.lowercase) {
    for (auto& ch : out) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
  }
  return out;
}

}  // namespace detail

/// Whitespace split, edge punctuation stripped, lowercased. Stop words are
/// kept; tokens that are pure punctuation vanish.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {}) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !detail::is_space(text[j])) ++j;
    if (j > i) {
      auto token = detail::normalize_token(text.substr(i, j - i), options);
      if (!token.empty()) tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from an explicit token list (e.g. a vocabulary file).
  static Vocabulary from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    for (auto& t : tokens) {
      if (t.empty()) throw Error(ErrorKind::BadFormat, "empty vocabulary token");
      if (v.find(t)) throw Error(ErrorKind::BadFormat, "duplicate vocabulary token '" + t + "'");
      v.add(std::move(t));
    }
    return v;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }

  std::optional<std::uint32_t> find(const std::string& token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Returns the index of `token`, appending it if unseen.
  std::uint32_t add(std::string token) {
    const auto next = static_cast<std::uint32_t>(tokens_.size());
    const auto [it, inserted] = index_.try_emplace(token, next);
    if (inserted) tokens_.push_back(std::move(token));
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct VocabularyBuild {
  Vocabulary vocabulary;
  std::size_t total_tokens = 0;
};

/// Single pass in dialogue, utterance, token order.
inline VocabularyBuild build_vocabulary(const Corpus& corpus, const TokenizerOptions& options = {}) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
  VocabularyBuild out;
  for (const auto& d : corpus.dialogues) {
    for (const auto& u : d.utterances) {
      for (auto& t : tokenize(u, options)) {
        out.vocabulary.add(std::move(t));
        ++out.total_tokens;
      }
    }
  }
  return out;
}

struct SparseEntry {
  std::uint32_t index = 0;
  std::uint32_t count = 0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Token counts with strictly increasing indices; every count >= 1.
struct FeatureVector {
  std::vector<SparseEntry> entries;
  std::size_t dimension = 0;

  std::uint32_t value(std::uint32_t index) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                     [](const SparseEntry& e, std::uint32_t i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? it->count : 0;
  }

  std::size_t total() const {
    std::size_t sum = 0;
    for (const auto& e : entries) sum += e.count;
    return sum;
  }

  std::vector<double> dense() const {
    std::vector<double> out(dimension, 0.0);
    for (const auto& e : entries) out[e.index] = e.count;
    return out;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Counts in-vocabulary tokens across a list of utterances. Unknown tokens
/// are ignored.
inline FeatureVector vectorize_utterances(const std::vector<std::string>& utterances, const Vocabulary& vocab,
                                          const TokenizerOptions& options = {}) {
  std::vector<std::uint32_t> hits;
  for (const auto& u : utterances) {
    for (const auto& t : tokenize(u, options)) {
      if (auto idx = vocab.find(t)) hits.push_back(*idx);
    }
  }
  std::sort(hits.begin(), hits.end());
  FeatureVector fv;
  fv.dimension = vocab.size();
  for (auto idx : hits) {
    if (!fv.entries.empty() && fv.entries.back().index == idx) {
      ++fv.entries.back().count;
    } else {
      fv.entries.push_back({idx, 1});
    }
  }
  return fv;
}

inline FeatureVector vectorize(const Dialogue& dialogue, const Vocabulary& vocab,
                               const TokenizerOptions& options = {}) {
  return vectorize_utterances(dialogue.utterances, vocab, options);
}

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<EmoSum> labels;
  std::size_t dimension = 0;

  std::size_t size() const noexcept { return rows.size(); }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Row i is vectorize(dialogue i). Vectorization runs on `jobs` threads and
/// is identical for every thread count.
inline FeatureMatrix build_feature_matrix(const Corpus& corpus, const LabeledCorpus& labeled,
                                          const Vocabulary& vocab, const TokenizerOptions& options = {},
                                          unsigned jobs = 1) {
  if (corpus.size() != labeled.size()) {
    throw Error(ErrorKind::AlignmentError, "corpus has " + std::to_string(corpus.size()) + " dialogues but " +
                                               std::to_string(labeled.size()) + " labels");
  }
  FeatureMatrix m;
  m.dimension = vocab.size();
  m.rows.resize(corpus.size());
  m.labels.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (labeled.rows[i].dialogue_id != corpus.dialogues[i].id) {
      throw Error(ErrorKind::AlignmentError, "label row " + std::to_string(i) + " refers to dialogue " +
                                                 std::to_string(labeled.rows[i].dialogue_id));
    }
    m.labels.push_back(labeled.rows[i].label);
  }
  parallel_for(corpus.size(), jobs,
               [&](std::size_t i) { m.rows[i] = vectorize(corpus.dialogues[i], vocab, options); });
  return m;
}

// ---------------------------------------------------------------------------
// File formats

inline void write_vocabulary(std::ostream& os, const Vocabulary& vocab) {
  for (const auto& t : vocab.tokens()) os << t << '\n';
}

inline Vocabulary read_vocabulary(std::istream& is) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

inline void write_sparse_row(std::ostream& os, int label, const FeatureVector& row) {
  os << label;
  for (const auto& e : row.entries) os << ' ' << e.index << ':' << e.count;
  os << '\n';
}

/// The exported dataset: one dialogue per line, Emo_Sum first.
inline void write_dataset(std::ostream& os, const FeatureMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) write_sparse_row(os, m.labels[i].value(), m.rows[i]);
}

struct SparseRows {
  std::vector<int> labels;
  std::vector<FeatureVector> rows;
};

inline SparseRows read_sparse_rows(std::istream& is, std::size_t dimension) {
  SparseRows out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    return Error(ErrorKind::BadFormat, "sparse line " + std::to_string(line_no) + ": " + why);
  };
  auto parse_uint = [&](std::string_view s) -> std::uint64_t {
    if (s.empty() || s.size() > 10) throw fail("bad integer '" + std::string(s) + "'");
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw fail("bad integer '" + std::string(s) + "'");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest = line;
    auto next_field = [&]() {
      const auto sp = rest.find(' ');
      auto field = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
      return field;
    };
    const auto label = parse_uint(next_field());
    if (label > static_cast<std::uint64_t>(kMaxEmoSum)) throw fail("label out of range");
    FeatureVector fv;
    fv.dimension = dimension;
    while (!rest.empty()) {
      const auto field = next_field();
      const auto colon = field.find(':');
      if (colon == std::string_view::npos) throw fail("expected index:count");
      const auto index = parse_uint(field.substr(0, colon));
      const auto count = parse_uint(field.substr(colon + 1));
      if (index >= dimension) throw fail("feature index " + std::to_string(index) + " >= dimension");
      if (count == 0) throw fail("zero count");
      if (!fv.entries.empty() && fv.entries.back().index >= index) throw fail("indices not strictly increasing");
      fv.entries.push_back({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(count)});
    }
    out.labels.push_back(static_cast<int>(label));
    out.rows.push_back(std::move(fv));
  }
  return out;
}

inline FeatureMatrix read_dataset(std::istream& is, std::size_t dimension) {
  auto sparse = read_sparse_rows(is, dimension);
  FeatureMatrix m;
  m.dimension = dimension;
  m.rows = std::move(sparse.rows);
  for (int l : sparse.labels) m.labels.push_back(EmoSum::from(l));
  return m;
}

}  // namespace ldeb
