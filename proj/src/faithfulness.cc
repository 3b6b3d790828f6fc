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

#include "graphnle/faithfulness.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "json.hpp"
#include "graphnle/text.h"

namespace graphnle {

using nlohmann::json;

LexiconTagger::LexiconTagger(std::vector<std::string> nouns) {
  for (auto& n : nouns) nouns_.insert(text::normalize_word(n));
}

LexiconTagger LexiconTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("noun lexicon not found: " + path);
  std::vector<std::string> nouns;
  for (std::string line; std::getline(in, line);) {
    line = text::trim(line);
    if (!line.empty() && line[0] != '#') nouns.push_back(line);
  }
  return LexiconTagger(std::move(nouns));
}

std::vector<bool> LexiconTagger::noun_mask(const std::vector<std::string>& words) const {
  std::vector<bool> mask;
  mask.reserve(words.size());
  for (const auto& w : words) mask.push_back(nouns_.count(text::normalize_word(w)) > 0);
  return mask;
}

AdjectiveLexicon AdjectiveLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("adjective lexicon not found: " + path);
  AdjectiveLexicon lex;
  for (std::string line; std::getline(in, line);) {
    line = text::trim(line);
    if (!line.empty() && line[0] != '#') lex.words.push_back(line);
  }
  return lex;
}

PerturbationSet perturb_instance(const RawRecord& record, const PosTagger& tagger,
                                 const AdjectiveLexicon& lexicon,
                                 const PerturbationConfig& config) {
  if (static_cast<int>(lexicon.words.size()) < config.candidates_per_position) {
    throw InvalidInput("adjective lexicon needs at least " +
                       std::to_string(config.candidates_per_position) + " entries");
  }
  const std::vector<std::string> words_a = text::split_whitespace(record.part_a);
  const std::vector<std::string> words_b = text::split_whitespace(record.part_b);
  std::vector<std::string> words = words_a;
  words.insert(words.end(), words_b.begin(), words_b.end());
  const std::vector<bool> is_noun = tagger.noun_mask(words);

  std::vector<int> nouns;
  for (size_t i = 0; i < words.size(); ++i) {
    if (is_noun[i]) nouns.push_back(static_cast<int>(i));
  }
  PerturbationSet out;
  if (nouns.empty()) {
    out.skipped = true;
    return out;
  }
  std::mt19937_64 rng(config.seed ^ text::fnv1a64(record.id));
  std::shuffle(nouns.begin(), nouns.end(), rng);
  nouns.resize(std::min<size_t>(nouns.size(), config.positions));
  std::sort(nouns.begin(), nouns.end());

  for (int pos : nouns) {
    std::vector<std::string> pool;
    for (const auto& adj : lexicon.words) {
      const std::string a = text::normalize_word(adj);
      if (a == text::normalize_word(words[pos])) continue;
      if (pos > 0 && a == text::normalize_word(words[pos - 1])) continue;
      pool.push_back(adj);
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (static_cast<int>(pool.size()) < config.candidates_per_position) {
      throw InvalidInput("not enough distinct adjectives for record " + record.id);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int c = 0; c < config.candidates_per_position; ++c) {
      std::vector<std::string> a = words_a, b = words_b;
      const int na = static_cast<int>(words_a.size());
      if (pos < na) {
        a.insert(a.begin() + pos, pool[c]);
      } else {
        b.insert(b.begin() + (pos - na), pool[c]);
      }
      PerturbedInstance p;
      p.base_id = record.id;
      p.position = pos;
      p.adjective = pool[c];
      p.record = record;
      p.record.part_a = text::join(a, " ");
      p.record.part_b = text::join(b, " ");
      out.items.push_back(std::move(p));
    }
  }
  return out;
}

PerturbationOutcome outcome_of(const PredictionLogEntry& e) {
  PerturbationOutcome o;
  o.failed = e.failed;
  if (o.failed) return o;
  o.label_changed = text::to_lower(text::trim(e.new_label)) != text::to_lower(text::trim(e.original_label));
  o.word_in_nle = text::contains_word(e.new_nle, e.inserted_word);
  return o;
}

CounterfactualRun run_counterfactual_test(const Predictor& predictor,
                                          const std::vector<RawRecord>& records,
                                          const PosTagger& tagger, const AdjectiveLexicon& lexicon,
                                          const PerturbationConfig& config) {
  CounterfactualRun run;
  for (const auto& record : records) {
    FaithfulnessRecord fr;
    fr.base_id = record.id;
    const PerturbationSet set = perturb_instance(record, tagger, lexicon, config);
    fr.skipped = set.skipped;
    if (!set.skipped) {
      const Prediction original = predictor(record);
      if (original.failed) ++run.failed_originals;
      for (const auto& p : set.items) {
        PredictionLogEntry e;
        e.base_id = record.id;
        e.position = p.position;
        e.inserted_word = p.adjective;
        e.original_label = original.label;
        if (original.failed) {
          e.failed = true;
        } else {
          const Prediction changed = predictor(p.record);
          e.new_label = changed.label;
          e.new_nle = changed.nle;
          e.failed = changed.failed;
        }
        if (e.failed) ++run.failed_perturbations;
        fr.outcomes.push_back(outcome_of(e));
        run.log.push_back(std::move(e));
      }
    }
    run.records.push_back(std::move(fr));
  }
  return run;
}

std::vector<FaithfulnessRecord> records_from_log(const std::vector<PredictionLogEntry>& log) {
  std::vector<FaithfulnessRecord> out;
  std::map<std::string, size_t> index;
  for (const auto& e : log) {
    auto [it, inserted] = index.emplace(e.base_id, out.size());
    if (inserted) out.push_back({e.base_id, {}, false});
    out[it->second].outcomes.push_back(outcome_of(e));
  }
  return out;
}

void save_prediction_log(const std::string& path, const std::vector<PredictionLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& e : log) {
    json obj = {{"id", e.base_id},
                {"position", e.position},
                {"inserted_word", e.inserted_word},
                {"original_label", e.original_label},
                {"new_label", e.new_label},
                {"new_nle", e.new_nle},
                {"failed", e.failed}};
    out << obj.dump() << '\n';
  }
}

std::vector<PredictionLogEntry> load_prediction_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("prediction log not found: " + path);
  std::vector<PredictionLogEntry> log;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json obj = json::parse(line);
      PredictionLogEntry e;
      e.base_id = obj.at("id").get<std::string>();
      e.position = obj.at("position").get<int>();
      e.inserted_word = obj.at("inserted_word").get<std::string>();
      e.original_label = obj.at("original_label").get<std::string>();
      e.new_label = obj.at("new_label").get<std::string>();
      e.new_nle = obj.at("new_nle").get<std::string>();
      e.failed = obj.at("failed").get<bool>();
      log.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return log;
}

FaithfulnessReport compute_unfaithfulness(const std::vector<FaithfulnessRecord>& records) {
  if (records.empty()) throw InvalidInput("no faithfulness records");
  FaithfulnessReport r;
  r.n_total = static_cast<int>(records.size());
  for (const auto& rec : records) {
    bool changed = false, unfaithful = false;
    for (const auto& o : rec.outcomes) {
      if (o.failed) {
        ++r.n_failed;
        continue;
      }
      if (o.label_changed) {
        changed = true;
        if (!o.word_in_nle) unfaithful = true;
      }
    }
    r.n_changed += changed ? 1 : 0;
    r.n_unfaithful += unfaithful ? 1 : 0;
  }
  r.degenerate = r.n_changed == 0;
  r.counter_unfaith = r.degenerate ? 0.0 : 100.0 * r.n_unfaithful / r.n_changed;
  r.total_unfaith = 100.0 * r.n_unfaithful / r.n_total;
  return r;
}

}  // namespace graphnle
