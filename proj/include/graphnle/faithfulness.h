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

#ifndef GRAPHNLE_FAITHFULNESS_H_
#define GRAPHNLE_FAITHFULNESS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "graphnle/dataset.h"

namespace graphnle {

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // true for every word tagged as a noun.
  virtual std::vector<bool> noun_mask(const std::vector<std::string>& words) const = 0;
};

// Tags a word as a noun when its normalised form is in a fixed word list.
class LexiconTagger : public PosTagger {
 public:
  explicit LexiconTagger(std::vector<std::string> nouns);
  static LexiconTagger load(const std::string& path);
  std::vector<bool> noun_mask(const std::vector<std::string>& words) const override;

 private:
  std::unordered_set<std::string> nouns_;
};

struct AdjectiveLexicon {
  std::vector<std::string> words;
  static AdjectiveLexicon load(const std::string& path);
};

struct PerturbationConfig {
  int positions = 4;
  int candidates_per_position = 4;
  uint64_t seed = 0;
};

struct PerturbedInstance {
  std::string base_id;
  int position = 0;  // Index of the noun among the words of part A then part B.
  std::string adjective;
  RawRecord record;  // Raw record with the adjective inserted.
};

struct PerturbationSet {
  std::vector<PerturbedInstance> items;
  bool skipped = false;  // No nouns to perturb.
};

// Inserts random adjectives before min(positions, #nouns) randomly chosen
// nouns, `candidates_per_position` distinct adjectives each. Deterministic
// for a fixed seed and record id.
PerturbationSet perturb_instance(const RawRecord& record, const PosTagger& tagger,
                                 const AdjectiveLexicon& lexicon,
                                 const PerturbationConfig& config);

struct Prediction {
  std::string label;
  std::string nle;
  bool failed = false;
};

// Runs the model (and any explanation extraction it needs) on one raw record.
using Predictor = std::function<Prediction(const RawRecord&)>;

struct PerturbationOutcome {
  bool label_changed = false;
  bool word_in_nle = false;
  bool failed = false;  // Excluded from every count.
};

struct FaithfulnessRecord {
  std::string base_id;
  std::vector<PerturbationOutcome> outcomes;
  bool skipped = false;
};

// One replayable row per (instance, perturbation).
struct PredictionLogEntry {
  std::string base_id;
  int position = 0;
  std::string inserted_word;
  std::string original_label;
  std::string new_label;
  std::string new_nle;
  bool failed = false;
};

struct CounterfactualRun {
  std::vector<FaithfulnessRecord> records;
  std::vector<PredictionLogEntry> log;
  int failed_perturbations = 0;
  int failed_originals = 0;
};

CounterfactualRun run_counterfactual_test(const Predictor& predictor,
                                          const std::vector<RawRecord>& records,
                                          const PosTagger& tagger, const AdjectiveLexicon& lexicon,
                                          const PerturbationConfig& config);

PerturbationOutcome outcome_of(const PredictionLogEntry& entry);
std::vector<FaithfulnessRecord> records_from_log(const std::vector<PredictionLogEntry>& log);
void save_prediction_log(const std::string& path, const std::vector<PredictionLogEntry>& log);
std::vector<PredictionLogEntry> load_prediction_log(const std::string& path);

struct FaithfulnessReport {
  double counter_unfaith = 0.0;  // Percent of label-changed instances.
  double total_unfaith = 0.0;    // Percent of all instances.
  int n_total = 0;
  int n_changed = 0;
  int n_unfaithful = 0;
  int n_failed = 0;
  bool degenerate = false;  // No instance changed its label.
};

// An instance is unfaithful when some perturbation changes the label while
// the inserted word is missing from the new explanation.
FaithfulnessReport compute_unfaithfulness(const std::vector<FaithfulnessRecord>& records);

}  // namespace graphnle

#endif  // GRAPHNLE_FAITHFULNESS_H_
