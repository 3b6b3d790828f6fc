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

#include "graphnle/dataset.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"
#include "graphnle/text.h"

namespace graphnle {

using nlohmann::json;

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kNli:
      return "nli";
    case Task::kComve:
      return "comve";
    case Task::kEcqa:
      return "ecqa";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "nli") return Task::kNli;
  if (name == "comve") return Task::kComve;
  if (name == "ecqa") return Task::kEcqa;
  throw InvalidInput("unknown task '" + std::string(name) +
                     "' (valid: nli, comve, ecqa)");
}

namespace {

std::vector<std::string> ecqa_choices(std::string_view part_b) {
  const char delim = part_b.find('|') != std::string_view::npos ? '|' : ',';
  std::vector<std::string> out;
  for (const auto& c : text::split(part_b, delim)) {
    auto t = text::trim(c);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string required_string(const json& obj, const char* field,
                             const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(where + ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

bool is_valid_label(const RawRecord& record, Task task, std::string_view label) {
  const std::string l = text::to_lower(text::trim(label));
  switch (task) {
    case Task::kNli:
      return l == "entailment" || l == "neutral" || l == "contradiction";
    case Task::kComve:
      return l == "1" || l == "2";
    case Task::kEcqa:
      for (const auto& c : ecqa_choices(record.part_b)) {
        if (text::to_lower(c) == l) return true;
      }
      return false;
  }
  return false;
}

std::vector<RawRecord> load_dataset(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("dataset file not found: " + path);
  std::vector<RawRecord> records;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": malformed record: " + e.what());
    }
    if (!obj.is_object()) throw ParseError(where + ": record is not an object");
    RawRecord r;
    r.id = required_string(obj, "id", where);
    r.part_a = required_string(obj, "part_a", where);
    r.part_b = required_string(obj, "part_b", where);
    r.gold_label = required_string(obj, "gold_label", where);
    auto nle = obj.find("gold_nle");
    if (nle == obj.end()) {
      throw ParseError(where + ": missing field 'gold_nle'");
    } else if (nle->is_string()) {
      r.gold_nle.push_back(nle->get<std::string>());
    } else if (nle->is_array() && !nle->empty()) {
      for (const auto& e : *nle) {
        if (!e.is_string()) throw ParseError(where + ": gold_nle entries must be strings");
        r.gold_nle.push_back(e.get<std::string>());
      }
    } else {
      throw ParseError(where + ": gold_nle must be a string or nonempty array");
    }
    if (!is_valid_label(r, task, r.gold_label)) {
      throw ParseError(where + ": unknown label '" + r.gold_label + "' for task " +
                       std::string(to_string(task)));
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_dataset(const std::string& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) {
    json obj = {{"id", r.id},
                {"part_a", r.part_a},
                {"part_b", r.part_b},
                {"gold_label", r.gold_label},
                {"gold_nle", r.gold_nle}};
    out << obj.dump() << '\n';
  }
}

RawRecord reformulate(const RawRecord& record, Task task) {
  RawRecord r = record;
  switch (task) {
    case Task::kNli:
      if (!text::starts_with(r.part_a, "Premise: ")) r.part_a = "Premise: " + r.part_a;
      if (!text::starts_with(r.part_b, "Hypothesis: ")) {
        r.part_b = "Hypothesis: " + r.part_b;
      }
      break;
    case Task::kComve:
      if (r.part_a != kComveQuestion) {
        r.part_b = "1. " + text::trim(r.part_a) + " 2. " + text::trim(r.part_b);
        r.part_a = std::string(kComveQuestion);
      }
      break;
    case Task::kEcqa:
      r.part_b = text::join(ecqa_choices(r.part_b), ", ");
      break;
  }
  if (text::trim(r.part_a).empty() || text::trim(r.part_b).empty()) {
    throw InvalidInput("record " + r.id + ": empty part after reformulation");
  }
  return r;
}

std::string target_text(const RawRecord& record, Task task) {
  std::string label = text::trim(record.gold_label);
  if (task == Task::kNli) label = capitalize(text::to_lower(label));
  const std::string nle =
      record.gold_nle.empty() ? std::string() : text::trim(record.gold_nle.front());
  return nle.empty() ? label + "." : label + ". " + nle;
}

std::string input_text(const RawRecord& record) {
  return record.part_a + " " + record.part_b;
}

int TokenizedInstance::word_of(int token) const {
  for (size_t w = 0; w < word_map.size(); ++w) {
    if (word_map[w].range.contains(token)) return static_cast<int>(w);
  }
  return -1;
}

namespace {

struct PartTokens {
  std::vector<WordSpan> words;  // Ranges relative to the part.
  std::vector<std::string> tokens;
};

PartTokens tokenize_part(std::string_view s, const WordPieceTokenizer& tok) {
  PartTokens p;
  for (auto& wp : tok.segment(s)) {
    const int begin = static_cast<int>(p.tokens.size());
    for (auto& piece : wp.pieces) p.tokens.push_back(std::move(piece));
    p.words.push_back({std::move(wp.word), {begin, static_cast<int>(p.tokens.size())}});
  }
  return p;
}

void truncate_part(PartTokens& p, int keep) {
  if (static_cast<int>(p.tokens.size()) <= keep) return;
  p.tokens.resize(keep);
  std::vector<WordSpan> kept;
  for (auto& w : p.words) {
    if (w.range.begin >= keep) break;
    w.range.end = std::min(w.range.end, keep);
    kept.push_back(std::move(w));
  }
  p.words = std::move(kept);
}

}  // namespace

TokenizedInstance tokenize_instance(const RawRecord& record, Task task,
                                    const WordPieceTokenizer& tokenizer,
                                    const TokenizeOptions& options) {
  PartTokens a = tokenize_part(record.part_a, tokenizer);
  PartTokens b = tokenize_part(record.part_b, tokenizer);
  if (a.tokens.empty() || b.tokens.empty()) {
    throw InvalidInput("record " + record.id + ": empty part after tokenization");
  }
  if (options.max_input_tokens > 0) {
    const int limit = std::max(2, options.max_input_tokens);
    const int na = static_cast<int>(a.tokens.size());
    const int nb = static_cast<int>(b.tokens.size());
    if (na + nb > limit) {
      const int keep_b = std::max(1, limit - na);
      truncate_part(b, keep_b);
      truncate_part(a, std::max(1, limit - keep_b));
    }
  }

  TokenizedInstance inst;
  inst.id = record.id;
  inst.boundary_m = static_cast<int>(a.tokens.size());
  inst.tokens = std::move(a.tokens);
  inst.tokens.insert(inst.tokens.end(), b.tokens.begin(), b.tokens.end());
  inst.word_map = std::move(a.words);
  for (auto& w : b.words) {
    w.range.begin += inst.boundary_m;
    w.range.end += inst.boundary_m;
    inst.word_map.push_back(std::move(w));
  }
  inst.token_ids = tokenizer.to_ids(inst.tokens);

  inst.target_tokens = tokenizer.tokenize(target_text(record, task));
  if (options.max_target_tokens > 0 &&
      static_cast<int>(inst.target_tokens.size()) > options.max_target_tokens) {
    inst.target_tokens.resize(std::max(1, options.max_target_tokens));
  }
  if (inst.target_tokens.empty()) {
    throw InvalidInput("record " + record.id + ": empty target");
  }
  inst.target_ids = tokenizer.to_ids(inst.target_tokens);
  return inst;
}

void save_instances(const std::string& path,
                    const std::vector<TokenizedInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& inst : instances) {
    json words = json::array();
    for (const auto& w : inst.word_map) {
      words.push_back({w.word, w.range.begin, w.range.end});
    }
    json obj = {{"id", inst.id},
                {"tokens", inst.tokens},
                {"token_ids", inst.token_ids},
                {"boundary_m", inst.boundary_m},
                {"words", words},
                {"target_tokens", inst.target_tokens},
                {"target_ids", inst.target_ids}};
    out << obj.dump() << '\n';
  }
}

std::vector<TokenizedInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("instance cache not found: " + path);
  std::vector<TokenizedInstance> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json obj = json::parse(line);
      TokenizedInstance inst;
      inst.id = obj.at("id").get<std::string>();
      inst.tokens = obj.at("tokens").get<std::vector<std::string>>();
      inst.token_ids = obj.at("token_ids").get<std::vector<int>>();
      inst.boundary_m = obj.at("boundary_m").get<int>();
      for (const auto& w : obj.at("words")) {
        inst.word_map.push_back(
            {w.at(0).get<std::string>(), {w.at(1).get<int>(), w.at(2).get<int>()}});
      }
      inst.target_tokens = obj.at("target_tokens").get<std::vector<std::string>>();
      inst.target_ids = obj.at("target_ids").get<std::vector<int>>();
      out.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace graphnle
