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

#ifndef GRAPHNLE_ATTRIBUTION_H_
#define GRAPHNLE_ATTRIBUTION_H_

#include <string>
#include <vector>

#include "graphnle/common.h"

namespace graphnle {

// Attention captured on the base model's label-prediction pass, restricted
// to the content tokens of one instance.
struct AttentionSnapshot {
  std::string instance_id;
  int boundary_m = 0;
  // weights[h](q, k): probability that position q attends to input token k.
  // Rows are renormalised over content tokens and sum to one.
  std::vector<Matrix> weights;
  // contributions[h](k): sign (-1, 0, +1) of the predicted-label logit
  // gradient with respect to the attention paid to token k.
  std::vector<Vector> contributions;

  int head_count() const { return static_cast<int>(weights.size()); }
  int token_count() const { return weights.empty() ? 0 : static_cast<int>(weights[0].cols()); }

  // Throws InvalidInput when shapes disagree or a row does not sum to one.
  void validate(double tolerance = 1e-4) const;
};

std::string serialize_snapshot(const AttentionSnapshot& snapshot);
AttentionSnapshot parse_snapshot(const std::string& payload);
void save_snapshot(const std::string& path, const AttentionSnapshot& snapshot);
AttentionSnapshot load_snapshot(const std::string& path);

struct ScoredToken {
  int index = 0;
  double score = 0.0;
  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

struct ScoredPair {
  int i = 0;  // Part-A token.
  int j = 0;  // Part-B token.
  double score = 0.0;
  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

struct ScoredSpanPair {
  IndexRange span_a;
  IndexRange span_b;
  double score = 0.0;
  friend bool operator==(const ScoredSpanPair&, const ScoredSpanPair&) = default;
};

struct HighlightTokenSet {
  std::vector<ScoredToken> entries;
};
struct TokenInteractionSet {
  int boundary_m = 0;
  std::vector<ScoredPair> entries;
};
struct SpanInteractionSet {
  std::vector<ScoredSpanPair> entries;
};

struct HeadSelection {
  int head = 0;
  // Set when no head has a positively contributing token; head is then 0.
  bool degenerate = false;
  std::vector<double> head_scores;
};

// Picks the head maximising the summed mean attention paid to tokens with a
// positive contribution. Ties go to the lowest index.
HeadSelection select_head(const AttentionSnapshot& snapshot);

// a_i = mean over q != i of w[head](q, i).
HighlightTokenSet token_importance(const AttentionSnapshot& snapshot, int head);

// a_ij = (w[head](i, j) + w[head](j, i)) / 2 for every i in part A and j in
// part B, emitted in (i, j) lexicographic order.
TokenInteractionSet token_interactions(const AttentionSnapshot& snapshot, int head);

// Louvain communities over the token-interaction graph, split into maximal
// contiguous spans per part; every cross-part span pair inside a community
// is scored by the mean of its constituent token-pair scores.
SpanInteractionSet span_interactions(const TokenInteractionSet& interactions,
                                     int boundary_m);

struct ExplanationSets {
  HeadSelection head;
  HighlightTokenSet highlight_tokens;
  TokenInteractionSet token_interactions;
  SpanInteractionSet span_interactions;
};

ExplanationSets extract_explanations(const AttentionSnapshot& snapshot);

}  // namespace graphnle

#endif  // GRAPHNLE_ATTRIBUTION_H_
