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

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ldeb/emosum.hpp"
#include "ldeb/featurize.hpp"
#include "test_util.hpp"

namespace ldeb {
namespace {

using Tokens = std::vector<std::string>;

Corpus fixture_corpus() {
  return load_corpus(testing::fixture_dir() / "dialogues.txt", testing::fixture_dir() / "emotions.txt");
}

Corpus make_corpus(const std::vector<std::vector<std::string>>& utterances) {
  Corpus c;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    c.dialogues.push_back(Dialogue{i, utterances[i], std::vector<int>(utterances[i].size(), 0)});
  }
  return c;
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("The kitchen stinks."), (Tokens{"the", "kitchen", "stinks"}));
  EXPECT_EQ(tokenize("I’ll throw out the garbage."), (Tokens{"i’ll", "throw", "out", "the", "garbage"}));
  EXPECT_EQ(tokenize("  Hello,   WORLD!! "), (Tokens{"hello", "world"}));
  EXPECT_EQ(tokenize("... ? !"), Tokens{});
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("“Quoted” (parens) don't"), (Tokens{"quoted", "parens", "don't"}));
  EXPECT_EQ(tokenize("Café…"), (Tokens{"café"}));
}

TEST(Tokenize, StopWordsKept) {
  EXPECT_EQ(tokenize("a the of and"), (Tokens{"a", "the", "of", "and"}));
}

TEST(Tokenize, Options) {
  TokenizerOptions keep_case;
  keep_case.lowercase = false;
  EXPECT_EQ(tokenize("The Cat.", keep_case), (Tokens{"The", "Cat"}));
  TokenizerOptions interior;
  interior.strip_interior = true;
  EXPECT_EQ(tokenize("don't re-do", interior), (Tokens{"dont", "redo"}));
}

TEST(Vocabulary, FirstOccurrenceOrder) {
  const auto build = build_vocabulary(make_corpus({{"b a", "c a"}, {"d b"}}));
  EXPECT_EQ(build.vocabulary.tokens(), (Tokens{"b", "a", "c", "d"}));
  EXPECT_EQ(build.total_tokens, 6u);
  EXPECT_EQ(build.vocabulary.find("c"), 2u);
  EXPECT_FALSE(build.vocabulary.find("zzz"));
}

TEST(Vocabulary, EmptyCorpus) {
  try {
    build_vocabulary(Corpus{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
}

TEST(Vocabulary, FromTokensRejectsDuplicatesAndEmpty) {
  EXPECT_THROW(Vocabulary::from_tokens({"a", "b", "a"}), Error);
  EXPECT_THROW(Vocabulary::from_tokens({"a", ""}), Error);
  EXPECT_EQ(Vocabulary::from_tokens({"x", "y"}).size(), 2u);
}

TEST(Vectorize, CountsAndOov) {
  const auto vocab = Vocabulary::from_tokens({"the", "kitchen", "stinks", "garbage"});
  const auto fv = vectorize_utterances({"The kitchen stinks.", "the unknown garbage the"}, vocab);
  EXPECT_EQ(fv.dimension, 4u);
  EXPECT_EQ(fv.entries, (std::vector<SparseEntry>{{0, 3}, {1, 1}, {2, 1}, {3, 1}}));
  EXPECT_EQ(fv.dense(), (std::vector<double>{3, 1, 1, 1}));
  EXPECT_EQ(fv.value(0), 3u);
  EXPECT_EQ(vectorize_utterances({"nothing known"}, vocab).entries.size(), 0u);
}

TEST(FeatureMatrix, AlignmentError) {
  const auto corpus = make_corpus({{"a"}, {"b"}});
  const auto vocab = build_vocabulary(corpus).vocabulary;
  LabeledCorpus one{{{0, EmoSum::from(64)}}};
  try {
    build_feature_matrix(corpus, one, vocab);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AlignmentError);
  }
  LabeledCorpus swapped{{{1, EmoSum::from(64)}, {0, EmoSum::from(64)}}};
  EXPECT_THROW(build_feature_matrix(corpus, swapped, vocab), Error);
}

TEST(Fixture, VocabularyAndDatasetMatchOracle) {
  const auto corpus = fixture_corpus();
  const auto build = build_vocabulary(corpus);
  const auto expected = testing::expected();
  EXPECT_EQ(build.total_tokens, expected.at("total_tokens").get<std::size_t>());
  EXPECT_EQ(build.vocabulary.size(), expected.at("unique_tokens").get<std::size_t>());
  EXPECT_EQ(build.vocabulary.tokens(), expected.at("vocabulary").get<Tokens>());

  const auto matrix = build_feature_matrix(corpus, label_corpus(corpus), build.vocabulary);
  std::ostringstream os;
  write_dataset(os, matrix);
  std::string want;
  for (const auto& line : expected.at("dataset")) want += line.get<std::string>() + "\n";
  EXPECT_EQ(os.str(), want);
}

// Per-row token totals sum to the corpus token count when the vocabulary is
// built from the same corpus.
TEST(Fixture, TokenConservation) {
  const auto corpus = fixture_corpus();
  const auto build = build_vocabulary(corpus);
  const auto matrix = build_feature_matrix(corpus, label_corpus(corpus), build.vocabulary);
  std::size_t total = 0;
  for (const auto& row : matrix.rows) {
    total += row.total();
    EXPECT_TRUE(std::is_sorted(row.entries.begin(), row.entries.end(),
                               [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; }));
    for (std::size_t i = 1; i < row.entries.size(); ++i) EXPECT_LT(row.entries[i - 1].index, row.entries[i].index);
    for (const auto& e : row.entries) EXPECT_GE(e.count, 1u);
  }
  EXPECT_EQ(total, build.total_tokens);
}

TEST(Fixture, MatrixIndependentOfThreadCount) {
  const auto corpus = fixture_corpus();
  const auto labeled = label_corpus(corpus);
  const auto vocab = build_vocabulary(corpus).vocabulary;
  const auto base = build_feature_matrix(corpus, labeled, vocab, {}, 1);
  for (unsigned jobs : {2u, 3u, 8u}) EXPECT_EQ(build_feature_matrix(corpus, labeled, vocab, {}, jobs), base);
}

// Random word soups: every vector entry counts exactly the tokens that map
// to it, and a superset vocabulary never lowers any count.
TEST(VectorizeProperty, CountsAndSupersetMonotonicity) {
  std::mt19937 gen(17);
  const Tokens words = {"alpha", "beta", "Gamma", "delta,", "eps!", "zeta", "éta", "theta"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> utterances(1 + gen() % 3);
    for (auto& u : utterances) {
      const int n = static_cast<int>(gen() % 10);
      for (int i = 0; i < n; ++i) u += words[gen() % words.size()] + " ";
    }
    Tokens sub;
    for (const auto& w : words) {
      if (gen() % 2) sub.push_back(tokenize(w).front());
    }
    auto super = sub;
    for (const auto& w : words) {
      const auto t = tokenize(w).front();
      if (std::find(super.begin(), super.end(), t) == super.end() && gen() % 2) super.push_back(t);
    }
    const auto vs = Vocabulary::from_tokens(sub);
    const auto vb = Vocabulary::from_tokens(super);
    const auto fs = vectorize_utterances(utterances, vs);
    const auto fb = vectorize_utterances(utterances, vb);

    Tokens all;
    for (const auto& u : utterances) {
      for (auto& t : tokenize(u)) all.push_back(t);
    }
    for (std::size_t i = 0; i < sub.size(); ++i) {
      const auto want = static_cast<std::uint32_t>(std::count(all.begin(), all.end(), sub[i]));
      EXPECT_EQ(fs.value(static_cast<std::uint32_t>(i)), want);
      EXPECT_GE(fb.value(*vb.find(sub[i])), fs.value(static_cast<std::uint32_t>(i)));
    }
    EXPECT_GE(fb.total(), fs.total());
  }
}

TEST(SparseFormat, RoundTrip) {
  const auto corpus = fixture_corpus();
  const auto vocab = build_vocabulary(corpus).vocabulary;
  const auto matrix = build_feature_matrix(corpus, label_corpus(corpus), vocab);
  std::stringstream ss;
  write_dataset(ss, matrix);
  EXPECT_EQ(read_dataset(ss, vocab.size()), matrix);

  std::stringstream vs;
  write_vocabulary(vs, vocab);
  EXPECT_EQ(read_vocabulary(vs), vocab);
}

TEST(SparseFormat, RejectsMalformedLines) {
  for (const char* bad : {"64 3:1 2:1", "64 5:1", "64 1:0", "abc 1:1", "64 1-1", "200 1:1", "64 1:1 1:2", "64 :1"}) {
    std::istringstream is(bad);
    try {
      read_sparse_rows(is, 5);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadFormat) << bad;
    }
  }
  std::istringstream ok("1\n\n64 0:2 4:1\r\n");
  const auto rows = read_sparse_rows(ok, 5);
  ASSERT_EQ(rows.rows.size(), 2u);
  EXPECT_TRUE(rows.rows[0].entries.empty());
  EXPECT_EQ(rows.rows[1].value(4), 1u);
}

}  // namespace
}  // namespace ldeb
