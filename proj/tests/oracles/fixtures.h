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

#ifndef GRAPHNLE_TESTS_ORACLES_FIXTURES_H_
#define GRAPHNLE_TESTS_ORACLES_FIXTURES_H_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graphnle/attribution.h"
#include "graphnle/dataset.h"
#include "graphnle/graph.h"

namespace graphnle::fixture {

// One token per word, `m` tokens in part A.
inline TokenizedInstance flat_instance(int n, int m) {
  TokenizedInstance inst;
  inst.id = "flat";
  inst.boundary_m = m;
  for (int i = 0; i < n; ++i) {
    inst.tokens.push_back("w" + std::to_string(i));
    inst.token_ids.push_back(4 + i);
    inst.word_map.push_back({inst.tokens.back(), {i, i + 1}});
  }
  inst.target_tokens = {"entailment"};
  inst.target_ids = {4};
  return inst;
}

// Ten tokens: "the porc ##upin ##e sleeps | a cat naps all day". Tokens 1-3
// form one word.
inline TokenizedInstance ten_token_instance() {
  TokenizedInstance inst;
  inst.id = "ten";
  inst.tokens = {"the", "porc", "##upin", "##e", "sleeps", "a", "cat", "naps", "all", "day"};
  inst.token_ids = {4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  inst.boundary_m = 5;
  inst.word_map = {{"the", {0, 1}}, {"porcupine", {1, 4}}, {"sleeps", {4, 5}}, {"a", {5, 6}},
                   {"cat", {6, 7}}, {"naps", {7, 8}},      {"all", {8, 9}},    {"day", {9, 10}}};
  inst.target_tokens = {"entailment"};
  inst.target_ids = {4};
  return inst;
}

inline HighlightTokenSet ten_token_highlights() {
  const double scores[] = {0.05, 0.30, 0.02, 0.01, 0.20, 0.03, 0.25, 0.04, 0.06, 0.04};
  HighlightTokenSet s;
  for (int i = 0; i < 10; ++i) s.entries.push_back({i, scores[i]});
  return s;
}

inline TokenInteractionSet ten_token_interactions() {
  TokenInteractionSet s;
  s.boundary_m = 5;
  const std::vector<std::pair<std::pair<int, int>, double>> top = {
      {{0, 5}, .9}, {{1, 6}, .8}, {{2, 7}, .7},  {{3, 8}, .6},
      {{4, 9}, .5}, {{0, 9}, .4}, {{4, 5}, .35}, {{2, 9}, .3}};
  for (int i = 0; i < 5; ++i) {
    for (int j = 5; j < 10; ++j) {
      double score = 0.01;
      for (const auto& [p, v] : top) {
        if (p == std::pair{i, j}) score = v;
      }
      s.entries.push_back({i, j, score});
    }
  }
  return s;
}

inline SpanInteractionSet ten_token_spans() {
  SpanInteractionSet s;
  s.entries = {{{0, 2}, {6, 8}, 0.5}, {{4, 5}, {9, 10}, 0.3}};
  return s;
}

using EdgeSet = std::set<std::pair<int, int>>;

inline EdgeSet edges_of(const ExplanationGraph& g) {
  return EdgeSet(g.edges.begin(), g.edges.end());
}

// Expected edges for the three regimes on the ten-token fixture at k = 30.
inline EdgeSet expected_highlight_edges() { return {{1, 4}, {1, 6}, {4, 6}, {1, 2}, {2, 3}}; }
inline EdgeSet expected_interaction_edges() {
  return {{0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}, {0, 9}, {4, 5}, {2, 9}, {1, 2}, {2, 3}};
}
inline EdgeSet expected_span_edges() {
  return {{0, 1}, {6, 7}, {0, 6}, {0, 7}, {1, 6}, {1, 7}, {4, 9}, {1, 2}, {2, 3}};
}

}  // namespace graphnle::fixture

#endif  // GRAPHNLE_TESTS_ORACLES_FIXTURES_H_
