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

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ldeb/corpus.hpp"
#include "test_util.hpp"

namespace ldeb {
namespace {

using testing::TempDir;

TEST(ParseDialogueLine, SplitsAndTrims) {
  EXPECT_EQ(parse_dialogue_line("The kitchen stinks. __eou__ I’ll throw out the garbage. __eou__"),
            (std::vector<std::string>{"The kitchen stinks.", "I’ll throw out the garbage."}));
  EXPECT_EQ(parse_dialogue_line("Hello __eou__"), std::vector<std::string>{"Hello"});
  EXPECT_EQ(parse_dialogue_line("  a  b   __eou__c"), (std::vector<std::string>{"a  b", "c"}));
}

TEST(ParseDialogueLine, EmptyDialogue) {
  try {
    parse_dialogue_line("__eou__ __eou__");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDialogue);
  }
  EXPECT_THROW(parse_dialogue_line("   "), Error);
}

TEST(ParseDialogueLine, CustomDelimiter) {
  EXPECT_EQ(parse_dialogue_line("a | b |", "|"), (std::vector<std::string>{"a", "b"}));
}

TEST(ParseEmotionLine, Values) {
  EXPECT_EQ(parse_emotion_line("2 0"), (std::vector<int>{2, 0}));
  EXPECT_EQ(parse_emotion_line("0 1 5 1 5 1"), (std::vector<int>{0, 1, 5, 1, 5, 1}));
  EXPECT_EQ(parse_emotion_line(" 6\t3 "), (std::vector<int>{6, 3}));
}

TEST(ParseEmotionLine, BadLabel) {
  for (const char* bad : {"2 7", "x", "-1", "10", "1,2", ""}) {
    try {
      parse_emotion_line(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadLabel) << bad;
    }
  }
}

TEST(LoadCorpus, MinimalFiles) {
  TempDir dir;
  testing::spit(dir / "d.txt", "Hi there . __eou__ Hello ! __eou__\nBye . __eou__\n");
  testing::spit(dir / "e.txt", "0 4\n0\n");
  const auto corpus = load_corpus(dir / "d.txt", dir / "e.txt");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.dialogues[0].id, 0u);
  EXPECT_EQ(corpus.dialogues[1].id, 1u);
  EXPECT_EQ(corpus.dialogues[0].utterances, (std::vector<std::string>{"Hi there .", "Hello !"}));
  EXPECT_EQ(corpus.dialogues[0].emotions, (std::vector<int>{0, 4}));
}

TEST(LoadCorpus, CrlfAndTrailingBlankLines) {
  TempDir dir;
  testing::spit(dir / "d.txt", "a __eou__\r\nb __eou__\r\n\r\n");
  testing::spit(dir / "e.txt", "1\r\n2\r\n");
  EXPECT_EQ(load_corpus(dir / "d.txt", dir / "e.txt").size(), 2u);
}

TEST(LoadCorpus, LengthMismatchNamesTheLine) {
  TempDir dir;
  testing::spit(dir / "d.txt", "a __eou__\nx __eou__ y __eou__ z __eou__\n");
  testing::spit(dir / "e.txt", "0\n0 4\n");
  try {
    load_corpus(dir / "d.txt", dir / "e.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, LineCountMismatch) {
  TempDir dir;
  testing::spit(dir / "d.txt", "a __eou__\nb __eou__\n");
  testing::spit(dir / "e.txt", "0\n");
  try {
    load_corpus(dir / "d.txt", dir / "e.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LineCountMismatch);
  }
}

TEST(LoadCorpus, ParseErrorsCarryLineNumbers) {
  TempDir dir;
  testing::spit(dir / "d.txt", "a __eou__\nb __eou__\nc __eou__\n");
  testing::spit(dir / "e.txt", "0\n0\n9\n");
  try {
    load_corpus(dir / "d.txt", dir / "e.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadLabel);
    EXPECT_NE(std::string(e.what()).find("e.txt:3:"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, MissingFileIsIoError) {
  TempDir dir;
  try {
    load_corpus(dir / "nope.txt", dir / "nope2.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(LoadCorpus, Fixture) {
  const auto corpus = load_corpus(testing::fixture_dir() / "dialogues.txt", testing::fixture_dir() / "emotions.txt");
  EXPECT_EQ(corpus.size(), testing::expected().at("dialogues").get<std::size_t>());
}

TEST(LoadCorpusJsonl, SameValidation) {
  TempDir dir;
  testing::spit(dir / "c.jsonl",
                R"({"utterances": ["Hi .", " Hello ! "], "emotions": [0, 4]})"
                "\n"
                R"({"utterances": ["Bye ."], "emotions": [6]})"
                "\n");
  const auto corpus = load_corpus_jsonl(dir / "c.jsonl");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.dialogues[0].utterances[1], "Hello !");

  testing::spit(dir / "bad.jsonl", R"({"utterances": ["a", "b"], "emotions": [0]})" "\n");
  try {
    load_corpus_jsonl(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
  testing::spit(dir / "bad2.jsonl", R"({"utterances": ["a"], "emotions": [7]})" "\n");
  EXPECT_THROW(load_corpus_jsonl(dir / "bad2.jsonl"), Error);
  testing::spit(dir / "bad3.jsonl", "{not json\n");
  try {
    load_corpus_jsonl(dir / "bad3.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadFormat);
  }
}

// Random corpora survive write -> load unchanged.
TEST(CorpusProperty, RoundTrip) {
  std::mt19937 gen(11);
  const std::vector<std::string> words = {"hi", "there", "I’ll", "go", "ok", "what?", "no,", "café"};
  TempDir dir;
  for (int trial = 0; trial < 25; ++trial) {
    Corpus corpus;
    const int n = 1 + static_cast<int>(gen() % 8);
    for (int i = 0; i < n; ++i) {
      Dialogue d;
      d.id = static_cast<std::size_t>(i);
      const int u = 1 + static_cast<int>(gen() % 5);
      for (int k = 0; k < u; ++k) {
        std::string text;
        const int w = 1 + static_cast<int>(gen() % 4);
        for (int x = 0; x < w; ++x) text += (x ? " " : "") + words[gen() % words.size()];
        d.utterances.push_back(text);
        d.emotions.push_back(static_cast<int>(gen() % 7));
      }
      corpus.dialogues.push_back(d);
    }
    write_corpus(corpus, dir / "d.txt", dir / "e.txt");
    EXPECT_EQ(load_corpus(dir / "d.txt", dir / "e.txt"), corpus);
  }
}

// Any utterance/label count disagreement is rejected.
TEST(CorpusProperty, FuzzedMismatchesRejected) {
  std::mt19937 gen(5);
  TempDir dir;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 5);
    const int bad = static_cast<int>(gen() % n);
    std::string dtext, etext;
    for (int i = 0; i < n; ++i) {
      const int u = 1 + static_cast<int>(gen() % 4);
      int l = u;
      if (i == bad) {
        do {
          l = 1 + static_cast<int>(gen() % 6);
        } while (l == u);
      }
      for (int k = 0; k < u; ++k) dtext += "w" + std::to_string(k) + " __eou__ ";
      for (int k = 0; k < l; ++k) etext += (k ? " " : "") + std::to_string(gen() % 7);
      dtext += "\n";
      etext += "\n";
    }
    testing::spit(dir / "d.txt", dtext);
    testing::spit(dir / "e.txt", etext);
    try {
      load_corpus(dir / "d.txt", dir / "e.txt");
      FAIL() << "trial " << trial;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
    }
  }
}

}  // namespace
}  // namespace ldeb
