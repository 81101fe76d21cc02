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

// Emotion binarization: the set of emotion classes present in a dialogue is
// written as a 7-bit integer. Class e contributes 2^(6-e), so "no emotion"
// (class 0) is the most significant bit and "surprise" (class 6) the least.
// Order and multiplicity of the per-utterance labels are erased.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldeb/corpus.hpp"
#include "ldeb/error.hpp"

namespace ldeb {

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "No Emotion", "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise"};

inline constexpr int kMaxEmoSum = (1 << kNumEmotions) - 1;

constexpr int emotion_weight(int emotion) { return 1 << (kNumEmotions - 1 - emotion); }

class EmoSum {
 public:
  constexpr EmoSum() = default;

  /// Range-checked construction from a raw integer in 0..127.
  static EmoSum from(int value) {
    if (value < 0 || value > kMaxEmoSum) {
      throw Error(ErrorKind::OutOfRange, "Emo_Sum " + std::to_string(value) + " outside 0..127");
    }
    return EmoSum(static_cast<std::uint8_t>(value));
  }

  constexpr int value() const noexcept { return value_; }
  constexpr bool has(int emotion) const noexcept { return (value_ & emotion_weight(emotion)) != 0; }

  friend constexpr auto operator<=>(EmoSum, EmoSum) = default;
  friend std::ostream& operator<<(std::ostream& os, EmoSum v) { return os << v.value(); }

 private:
  constexpr explicit EmoSum(std::uint8_t v) : value_(v) {}
  std::uint8_t value_ = 0;
};

inline EmoSum emo_sum(std::span<const int> emotions) {
  if (emotions.empty()) throw Error(ErrorKind::EmptyLabelList, "no emotion labels to encode");
  int mask = 0;
  for (int e : emotions) {
    if (e < 0 || e >= kNumEmotions) {
      throw Error(ErrorKind::BadLabel, "emotion label " + std::to_string(e) + " outside 0..6");
    }
    mask |= emotion_weight(e);
  }
  return EmoSum::from(mask);
}

inline EmoSum emo_sum(std::initializer_list<int> emotions) {
  return emo_sum(std::span<const int>(emotions.begin(), emotions.size()));
}

/// Emotion classes present in `value`, ascending.
inline std::vector<int> emo_decode(EmoSum value) {
  std::vector<int> classes;
  for (int e = 0; e < kNumEmotions; ++e) {
    if (value.has(e)) classes.push_back(e);
  }
  return classes;
}

inline std::vector<int> emo_decode(int value) { return emo_decode(EmoSum::from(value)); }

/// "+"-joined class names in class order, e.g. "No Emotion + Sadness".
inline std::string emo_describe(EmoSum value) {
  std::string out;
  for (int e : emo_decode(value)) {
    if (!out.empty()) out += " + ";
    out += kEmotionNames[static_cast<std::size_t>(e)];
  }
  return out;
}

inline std::string emo_describe(int value) { return emo_describe(EmoSum::from(value)); }

/// Seven-character bit string, most significant (class 0) first.
inline std::string emo_binary(EmoSum value) {
  std::string bits(kNumEmotions, '0');
  for (int e = 0; e < kNumEmotions; ++e) {
    if (value.has(e)) bits[static_cast<std::size_t>(e)] = '1';
  }
  return bits;
}

struct LabeledRow {
  std::size_t dialogue_id = 0;
  EmoSum label;

  friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

struct LabeledCorpus {
  std::vector<LabeledRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
};

inline LabeledCorpus label_corpus(const Corpus& corpus) {
  LabeledCorpus labeled;
  labeled.rows.reserve(corpus.size());
  for (const auto& d : corpus.dialogues) labeled.rows.push_back({d.id, emo_sum(d.emotions)});
  return labeled;
}

using EmoHistogram = std::map<EmoSum, std::size_t>;

inline EmoHistogram emo_histogram(const LabeledCorpus& labeled) {
  EmoHistogram hist;
  for (const auto& row : labeled.rows) ++hist[row.label];
  return hist;
}

/// CSV with columns emo_sum,binary,description,count; ascending Emo_Sum.
inline void write_histogram_csv(std::ostream& os, const EmoHistogram& hist) {
  os << "emo_sum,binary,description,count\n";
  for (const auto& [value, count] : hist) {
    os << value.value() << ',' << emo_binary(value) << ',' << emo_describe(value) << ',' << count << '\n';
  }
}

}  // namespace ldeb
