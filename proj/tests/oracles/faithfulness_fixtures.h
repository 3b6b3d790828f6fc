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

#ifndef GRAPHNLE_TESTS_ORACLES_FAITHFULNESS_FIXTURES_H_
#define GRAPHNLE_TESTS_ORACLES_FAITHFULNESS_FIXTURES_H_

#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphnle/faithfulness.h"
#include "oracles/oracles.h"

namespace graphnle::fixture {

inline PerturbationOutcome outcome(bool changed, bool in_nle) { return {changed, in_nle, false}; }

// Ten instances: four change their label, three of those unfaithfully, and
// one is skipped for lack of nouns.
inline std::vector<FaithfulnessRecord> ten_instance_records() {
  std::vector<FaithfulnessRecord> r;
  r.push_back({"i0", {outcome(true, false), outcome(false, false)}, false});
  r.push_back({"i1", {outcome(true, true), outcome(true, false)}, false});
  r.push_back({"i2", {outcome(false, true), outcome(true, false), outcome(true, false)}, false});
  r.push_back({"i3", {outcome(true, true), outcome(true, true)}, false});
  for (int i = 4; i < 9; ++i) r.push_back({"i" + std::to_string(i), {outcome(false, false)}, false});
  r.push_back({"i9", {}, true});
  return r;
}

struct RandomLog {
  std::vector<PredictionLogEntry> log;
  std::vector<oracle::LogRow> rows;  // The same log for the oracle.
  std::set<std::string> ids;
  std::vector<FaithfulnessRecord> skipped;  // Ids without any row.
};

// Up to eight instances with 0-16 rows each. Labels and NLE words include
// case and punctuation variants of the inserted adjectives.
inline RandomLog random_log(std::mt19937_64& rng, int trial) {
  static const std::vector<std::string> labels = {"entailment", "Entailment", "neutral",
                                                  "contradiction"};
  static const std::vector<std::string> adjectives = {"red", "big", "old"};
  static const std::vector<std::string> filler = {"the",     "red.", "BIG", "(old)", "bigger",
                                                  "reddish", "cat",  "older", "is", "Red,"};
  RandomLog out;
  const int n = 1 + static_cast<int>(rng() % 8);
  for (int i = 0; i < n; ++i) {
    const std::string id = "t" + std::to_string(trial) + "-" + std::to_string(i);
    out.ids.insert(id);
    const int count = static_cast<int>(rng() % 17);
    if (count == 0) out.skipped.push_back({id, {}, true});
    for (int k = 0; k < count; ++k) {
      PredictionLogEntry e;
      e.base_id = id;
      e.position = k / 4;
      e.inserted_word = adjectives[rng() % adjectives.size()];
      e.original_label = labels[rng() % 2];
      e.new_label = labels[rng() % labels.size()];
      for (int w = 0, len = static_cast<int>(rng() % 6); w < len; ++w) {
        e.new_nle += (w ? " " : "") + filler[rng() % filler.size()];
      }
      e.failed = rng() % 10 == 0;
      out.rows.push_back({e.base_id, e.original_label, e.new_label, e.inserted_word, e.new_nle, e.failed});
      out.log.push_back(std::move(e));
    }
  }
  return out;
}

inline std::vector<FaithfulnessRecord> records_of(const RandomLog& r) {
  std::vector<FaithfulnessRecord> records = records_from_log(r.log);
  records.insert(records.end(), r.skipped.begin(), r.skipped.end());
  return records;
}

}  // namespace graphnle::fixture

#endif  // GRAPHNLE_TESTS_ORACLES_FAITHFULNESS_FIXTURES_H_
