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

#ifndef GRAPHNLE_DATASET_H_
#define GRAPHNLE_DATASET_H_

#include <string>
#include <string_view>
#include <vector>

#include "graphnle/common.h"
#include "graphnle/tokenizer.h"

namespace graphnle {

enum class Task { kNli, kComve, kEcqa };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

inline constexpr std::string_view kComveQuestion =
    "Which statement of the two is against common sense?";

struct RawRecord {
  std::string id;
  std::string part_a;
  std::string part_b;
  std::string gold_label;
  // All reference explanations; training uses the first.
  std::vector<std::string> gold_nle;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

// Reads one JSON object per line with fields id, part_a, part_b, gold_label
// and gold_nle (string or array of strings). Blank lines are skipped.
std::vector<RawRecord> load_dataset(const std::string& path, Task task);
void save_dataset(const std::string& path, const std::vector<RawRecord>& records);

// Whether `label` belongs to the closed label set of `task` for `record`.
bool is_valid_label(const RawRecord& record, Task task, std::string_view label);

// Rewrites a record into the two-part text-to-text input layout of its task.
// Idempotent.
RawRecord reformulate(const RawRecord& record, Task task);

// "label. explanation" output string used as the training target.
std::string target_text(const RawRecord& record, Task task);

// Input text as fed to the encoder: part A followed by part B.
std::string input_text(const RawRecord& record);

struct WordSpan {
  std::string word;
  IndexRange range;

  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

struct TokenizedInstance {
  std::string id;
  std::vector<std::string> tokens;  // Content subtokens, no special tokens.
  std::vector<int> token_ids;
  int boundary_m = 0;               // Number of part-A subtokens.
  std::vector<WordSpan> word_map;   // Ranges partition [0, tokens.size()).
  std::vector<std::string> target_tokens;
  std::vector<int> target_ids;      // target_ids[0] is the label token.

  int size() const { return static_cast<int>(tokens.size()); }
  int part_b_size() const { return size() - boundary_m; }
  // Index into word_map of the word containing subtoken `token`.
  int word_of(int token) const;

  friend bool operator==(const TokenizedInstance&,
                         const TokenizedInstance&) = default;
};

struct TokenizeOptions {
  // Maximum number of content subtokens; 0 disables truncation. Part B is
  // shortened first and neither part drops below one subtoken.
  int max_input_tokens = 0;
  // Maximum number of target subtokens (before EOS); 0 disables truncation.
  int max_target_tokens = 0;
};

TokenizedInstance tokenize_instance(const RawRecord& record, Task task,
                                    const WordPieceTokenizer& tokenizer,
                                    const TokenizeOptions& options = {});

void save_instances(const std::string& path,
                    const std::vector<TokenizedInstance>& instances);
std::vector<TokenizedInstance> load_instances(const std::string& path);

}  // namespace graphnle

#endif  // GRAPHNLE_DATASET_H_
