// Copyright 2026 The graphnle Authors.
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

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "graphnle/dataset.h"
#include "graphnle/synthetic.h"
#include "graphnle/tokenizer.h"

namespace graphnle {
namespace {

namespace fs = std::filesystem;

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p.string();
}

RawRecord esnli_record() {
  return {"e1", "A woman is asleep at home.",
          "A woman with a red scarf is giving a shushing sign to the camera in front of shelves "
          "of books.",
          "contradiction",
          {"The woman cannot be giving a sign and asleep at the same time."}};
}

TEST(LoadDatasetTest, ReadsEveryLineInOrder) {
  const std::string path = write_temp(
      "graphnle_ds3.jsonl",
      R"({"id":"a","part_a":"p1","part_b":"h1","gold_label":"entailment","gold_nle":"x"})" "\n"
      R"({"id":"b","part_a":"p2","part_b":"h2","gold_label":"neutral","gold_nle":["y","z"]})" "\n"
      R"({"id":"c","part_a":"p3","part_b":"h3","gold_label":"contradiction","gold_nle":"w"})" "\n");
  const auto records = load_dataset(path, Task::kNli);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].id, "a");
  EXPECT_EQ(records[2].id, "c");
  EXPECT_EQ(records[1].gold_nle, (std::vector<std::string>{"y", "z"}));
}

TEST(LoadDatasetTest, MissingLabelNamesTheLine) {
  const std::string path = write_temp(
      "graphnle_ds_bad.jsonl",
      R"({"id":"a","part_a":"p","part_b":"h","gold_label":"neutral","gold_nle":"x"})" "\n"
      R"({"id":"b","part_a":"p","part_b":"h","gold_nle":"x"})" "\n");
  try {
    load_dataset(path, Task::kNli);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("gold_label"), std::string::npos);
  }
}

TEST(LoadDatasetTest, EmptyFileGivesNoRecords) {
  EXPECT_TRUE(load_dataset(write_temp("graphnle_empty.jsonl", ""), Task::kNli).empty());
}

TEST(LoadDatasetTest, MissingFileAndUnknownLabelAndMalformedLine) {
  EXPECT_THROW(load_dataset("/nonexistent/graphnle.jsonl", Task::kNli), InvalidInput);
  EXPECT_THROW(load_dataset(write_temp("graphnle_lbl.jsonl",
                                       R"({"id":"a","part_a":"p","part_b":"h","gold_label":"maybe","gold_nle":"x"})"
                                       "\n"),
                            Task::kNli),
               ParseError);
  EXPECT_THROW(load_dataset(write_temp("graphnle_mal.jsonl", "{not json\n"), Task::kNli), ParseError);
}

TEST(ReformulateTest, NliTemplate) {
  const RawRecord r = reformulate(esnli_record(), Task::kNli);
  EXPECT_EQ(r.part_a, "Premise: A woman is asleep at home.");
  EXPECT_EQ(input_text(r),
            "Premise: A woman is asleep at home. Hypothesis: A woman with a red scarf is giving a "
            "shushing sign to the camera in front of shelves of books.");
  EXPECT_EQ(target_text(r, Task::kNli),
            "Contradiction. The woman cannot be giving a sign and asleep at the same time.");
}

TEST(ReformulateTest, ComveUsesFixedQuestion) {
  const RawRecord raw{"c1", "when it is hot humidity forms", "when it rains humidity forms", "2",
                      {"Water makes humidity, not temperature."}};
  const RawRecord r = reformulate(raw, Task::kComve);
  EXPECT_EQ(r.part_a, "Which statement of the two is against common sense?");
  EXPECT_EQ(r.part_b, "1. when it is hot humidity forms 2. when it rains humidity forms");
  EXPECT_EQ(target_text(r, Task::kComve), "2. Water makes humidity, not temperature.");
  const RawRecord other =
      reformulate({"c2", "a b", "c d", "1", {"e"}}, Task::kComve);
  EXPECT_EQ(other.part_a, r.part_a);
}

TEST(ReformulateTest, EcqaJoinsChoices) {
  const RawRecord raw{"q1",
                      "The student was contemplating the problem, that's when he made the what "
                      "that led him to the answer?",
                      "action|discovery|reflection|deciding|thinking",
                      "discovery",
                      {"Contemplating on the problem, the student made the discovery."}};
  const RawRecord r = reformulate(raw, Task::kEcqa);
  EXPECT_EQ(r.part_b, "action, discovery, reflection, deciding, thinking");
  EXPECT_EQ(target_text(r, Task::kEcqa).rfind("discovery. ", 0), 0u);
}

TEST(ReformulateTest, Idempotent) {
  const RawRecord comve{"c1", "s one", "s two", "1", {"why"}};
  for (auto [task, rec] : {std::pair{Task::kNli, esnli_record()}, std::pair{Task::kComve, comve},
                           std::pair{Task::kEcqa, RawRecord{"q", "what?", "a, b, c", "b", {"n"}}}}) {
    const RawRecord once = reformulate(rec, task);
    EXPECT_EQ(reformulate(once, task), once) << to_string(task);
  }
}

TEST(ReformulateTest, UnknownTask) { EXPECT_THROW(parse_task("sst2"), InvalidInput); }

class TokenizeInstanceTest : public ::testing::Test {
 protected:
  WordPieceTokenizer tokenizer_{build_vocabulary(
      {"Premise: the cat sat down. Hypothesis: an amaranthine cat sleeps.",
       "Entailment. The cat is resting."})};
};

TEST_F(TokenizeInstanceTest, BoundaryAndWordMap) {
  const RawRecord r = reformulate({"t1", "the cat sat down", "an amaranthine cat sleeps",
                                   "entailment", {"The cat is resting."}},
                                  Task::kNli);
  const TokenizedInstance inst = tokenize_instance(r, Task::kNli, tokenizer_);
  // "premise", ":" then four unsplit words.
  EXPECT_EQ(inst.boundary_m, 6);
  int part_a_words = 0;
  for (const auto& w : inst.word_map) part_a_words += w.range.end <= inst.boundary_m ? 1 : 0;
  EXPECT_EQ(part_a_words, 6);
  const auto it = std::find_if(inst.word_map.begin(), inst.word_map.end(),
                               [](const WordSpan& w) { return w.word == "amaranthine"; });
  ASSERT_NE(it, inst.word_map.end());
  EXPECT_EQ(it->range.size(), 3);
  ASSERT_GE(inst.target_tokens.size(), 3u);
  EXPECT_EQ(inst.target_tokens[0], "enta");
  EXPECT_EQ(inst.target_tokens[1], "##ilme");
  EXPECT_EQ(inst.target_tokens[2], "##nt");
}

TEST_F(TokenizeInstanceTest, WordMapPartitionsTokens) {
  for (const auto& raw : make_toy_nli(30, 3)) {
    const WordPieceTokenizer tok(build_vocabulary({input_text(reformulate(raw, Task::kNli))}));
    const TokenizedInstance inst = tokenize_instance(reformulate(raw, Task::kNli), Task::kNli, tok);
    int next = 0;
    for (const auto& w : inst.word_map) {
      EXPECT_EQ(w.range.begin, next);
      EXPECT_GT(w.range.size(), 0);
      next = w.range.end;
    }
    EXPECT_EQ(next, inst.size());
    EXPECT_GE(inst.boundary_m, 1);
    EXPECT_LT(inst.boundary_m, inst.size());
  }
}

TEST_F(TokenizeInstanceTest, DeterministicAndCacheRoundTrip) {
  const RawRecord r = reformulate({"t1", "the cat sat down", "an amaranthine cat sleeps",
                                   "entailment", {"The cat is resting."}},
                                  Task::kNli);
  const TokenizedInstance a = tokenize_instance(r, Task::kNli, tokenizer_);
  EXPECT_EQ(a, tokenize_instance(r, Task::kNli, tokenizer_));
  const std::string path = (fs::temp_directory_path() / "graphnle_inst.jsonl").string();
  save_instances(path, {a, a});
  const auto loaded = load_instances(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1], a);
}

TEST_F(TokenizeInstanceTest, TruncatesPartBFirst) {
  const RawRecord r = reformulate({"t1", "the cat sat down", "an amaranthine cat sleeps",
                                   "entailment", {"x"}},
                                  Task::kNli);
  TokenizeOptions opt;
  opt.max_input_tokens = 8;
  const TokenizedInstance inst = tokenize_instance(r, Task::kNli, tokenizer_, opt);
  EXPECT_EQ(inst.size(), 8);
  EXPECT_EQ(inst.boundary_m, 6);
  opt.max_input_tokens = 3;
  const TokenizedInstance tiny = tokenize_instance(r, Task::kNli, tokenizer_, opt);
  EXPECT_EQ(tiny.part_b_size(), 1);
  EXPECT_EQ(tiny.boundary_m, 2);
}

TEST_F(TokenizeInstanceTest, EmptyPartIsAnError) {
  const RawRecord r{"t1", "   ", "cat", "entailment", {"x"}};
  EXPECT_THROW(tokenize_instance(r, Task::kNli, tokenizer_), InvalidInput);
}

}  // namespace
}  // namespace graphnle
