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
#include <vector>

#include <gtest/gtest.h>

#include "ldeb/hiersplit.hpp"
#include "test_util.hpp"

namespace ldeb {
namespace {

LabeledCorpus labeled_of(const std::vector<int>& values) {
  LabeledCorpus out;
  for (std::size_t i = 0; i < values.size(); ++i) out.rows.push_back({i, EmoSum::from(values[i])});
  return out;
}

// Oracle: leaf = index of the first group listing the value, scanning
// groups as plain integer lists.
std::size_t leaf_oracle(int value, const std::vector<std::vector<int>>& groups) {
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (int v : groups[k]) {
      if (v == value) return k;
    }
  }
  return groups.size();
}

TEST(Route, DefaultSpecExamples) {
  const auto spec = default_split_spec();
  EXPECT_EQ(spec.num_levels(), 4u);
  EXPECT_EQ(spec.num_leaves(), 5u);
  EXPECT_EQ(route_to_leaf(64, spec), 0u);
  EXPECT_EQ(route_to_leaf(68, spec), 1u);
  EXPECT_EQ(route_to_leaf(4, spec), 2u);
  EXPECT_EQ(route_to_leaf(80, spec), 3u);
  EXPECT_EQ(route_to_leaf(88, spec), 4u);
  EXPECT_EQ(route_to_leaf(116, spec), 4u);
}

TEST(Route, PartitionsWholeDomain) {
  const auto spec = default_split_spec();
  const std::vector<std::vector<int>> groups = {{64}, {68}, {65, 69, 4}, {66, 96, 80}};
  std::vector<std::size_t> leaf_counts(spec.num_leaves());
  for (int v = 0; v <= kMaxEmoSum; ++v) {
    const auto leaf = route_to_leaf(v, spec);
    ASSERT_LT(leaf, spec.num_leaves());
    EXPECT_EQ(leaf, leaf_oracle(v, groups)) << v;
    ++leaf_counts[leaf];
  }
  EXPECT_EQ(leaf_counts, (std::vector<std::size_t>{1, 1, 3, 3, 120}));
}

TEST(SplitSets, TwoLevelToyCase) {
  SplitSpec spec{{{EmoSum::from(64)}, {EmoSum::from(68)}}};
  // 64, 68 and 116: level 1 is 64 vs rest; level 2 is 68 vs 116.
  const auto splits = build_split_sets(labeled_of({64, 68, 116}), spec);
  ASSERT_EQ(splits.size(), 2u);
  EXPECT_EQ(splits[0].row_ids, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(splits[0].labels, (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(splits[1].row_ids, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(splits[1].labels, (std::vector<int>{0, 1}));
}

TEST(SplitSets, OneClassLevelIsEmptySplitSet) {
  SplitSpec spec{{{EmoSum::from(64)}, {EmoSum::from(68)}}};
  try {
    build_split_sets(labeled_of({64, 68}), spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySplitSet);
    EXPECT_NE(std::string(e.what()).find("level 2"), std::string::npos) << e.what();
  }
}

TEST(SplitSets, FixtureMatchesOracle) {
  const auto corpus = load_corpus(testing::fixture_dir() / "dialogues.txt", testing::fixture_dir() / "emotions.txt");
  const auto labeled = label_corpus(corpus);
  const auto spec = default_split_spec();
  const auto expected = testing::expected();

  const auto leaves = expected.at("leaves").get<std::vector<std::size_t>>();
  ASSERT_EQ(leaves.size(), labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) EXPECT_EQ(route_to_leaf(labeled.rows[i].label, spec), leaves[i]);

  const auto report = balance_report(build_split_sets(labeled, spec));
  const auto& want = expected.at("levels");
  ASSERT_EQ(report.size(), want.size());
  for (std::size_t k = 0; k < report.size(); ++k) {
    EXPECT_EQ(report[k].level, k + 1);
    EXPECT_EQ(report[k].count0, want[k].at("count0").get<std::size_t>());
    EXPECT_EQ(report[k].count1, want[k].at("count1").get<std::size_t>());
    EXPECT_NEAR(report[k].pct0, want[k].at("pct0").get<double>(), 1e-9);
    EXPECT_NEAR(report[k].pct0 + report[k].pct1, 100.0, 1e-9);
  }
}

// For random corpora and random disjoint specs: every level-k set equals
// (rows stopping at k) + (rows continuing), level k+1 has exactly the
// continuing rows, and the label-0 counts plus the residual sum to N.
TEST(SplitSetsProperty, Conservation) {
  std::mt19937 gen(23);
  int built = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<int> pool(127);
    for (int i = 0; i < 127; ++i) pool[i] = i + 1;
    std::shuffle(pool.begin(), pool.end(), gen);
    const std::size_t L = 1 + gen() % 4;
    std::vector<std::vector<int>> groups(L);
    SplitSpec spec;
    std::size_t next = 0;
    for (auto& g : groups) {
      const std::size_t n = 1 + gen() % 3;
      std::vector<EmoSum> level;
      for (std::size_t i = 0; i < n; ++i) {
        g.push_back(pool[next]);
        level.push_back(EmoSum::from(pool[next++]));
      }
      spec.levels.push_back(level);
    }
    std::vector<int> values(5 + gen() % 40);
    for (auto& v : values) v = gen() % 2 ? groups[gen() % L][0] : static_cast<int>(1 + gen() % 127);
    std::vector<std::vector<SplitSet>> holder;
    try {
      holder.push_back(build_split_sets(labeled_of(values), spec));
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptySplitSet);
      continue;
    }
    ++built;
    const auto& splits = holder.front();
    std::vector<std::size_t> leaf_sizes(L + 1);
    for (int v : values) ++leaf_sizes[leaf_oracle(v, groups)];
    std::size_t zeros = 0;
    for (std::size_t k = 0; k < L; ++k) {
      std::size_t reaching = 0;
      for (std::size_t j = k; j <= L; ++j) reaching += leaf_sizes[j];
      EXPECT_EQ(splits[k].size(), reaching);
      EXPECT_EQ(splits[k].count(0), leaf_sizes[k]);
      if (k + 1 < L) {
        EXPECT_EQ(splits[k].count(1), splits[k + 1].size());
      }
      zeros += splits[k].count(0);
    }
    EXPECT_EQ(zeros + splits[L - 1].count(1), values.size());
  }
  EXPECT_GT(built, 50);
}

TEST(SplitSpecJson, ParseAndValidate) {
  const auto spec = split_spec_from_json(nlohmann::json::parse("[[64],[68],[65,69,4],[66,96,80]]"));
  EXPECT_EQ(spec, default_split_spec());
  EXPECT_EQ(to_json(spec).dump(), "[[64],[68],[65,69,4],[66,96,80]]");
  for (const char* bad : {"[]", "[[64],[]]", "[[64],[64]]", "[[128]]", "[[\"x\"]]", "{}", "[[0.5]]"}) {
    try {
      split_spec_from_json(nlohmann::json::parse(bad));
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << bad;
    }
  }
}

TEST(SplitSetFile, SparseLinesWithBinaryLabel) {
  FeatureMatrix m;
  m.dimension = 3;
  m.rows = {FeatureVector{{{0, 1}}, 3}, FeatureVector{{{2, 4}}, 3}};
  m.labels = {EmoSum::from(64), EmoSum::from(4)};
  const auto splits = build_split_sets(labeled_of({64, 4}), SplitSpec{{{EmoSum::from(64)}}});
  std::ostringstream os;
  write_split_set(os, splits[0], m);
  EXPECT_EQ(os.str(), "0 0:1\n1 2:4\n");
}

}  // namespace
}  // namespace ldeb
