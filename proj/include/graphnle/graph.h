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

#ifndef GRAPHNLE_GRAPH_H_
#define GRAPHNLE_GRAPH_H_

#include <string>
#include <utility>
#include <vector>

#include "graphnle/attribution.h"
#include "graphnle/common.h"
#include "graphnle/dataset.h"

namespace graphnle {

inline constexpr double kDefaultTopPercent = 30.0;

// Per-instance token graph. Every content token is a node; edges are
// undirected, stored once as (u, v) with u < v, sorted, unit weight.
struct ExplanationGraph {
  std::string instance_id;
  ExplanationType type = ExplanationType::kHighlightToken;
  double k_percent = kDefaultTopPercent;
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  bool has_edge(int u, int v) const;
  // Symmetric adjacency lists, ascending.
  std::vector<std::vector<int>> neighbors() const;
  // Same graph with extra isolated nodes appended (e.g. EOS or padding).
  ExplanationGraph padded_to(int nodes) const;

  friend bool operator==(const ExplanationGraph&, const ExplanationGraph&) = default;
};

struct ExplanationSelection {
  ExplanationType type = ExplanationType::kHighlightToken;
  double k_percent = kDefaultTopPercent;
  // Exactly one of these is populated, matching `type`, by descending score.
  std::vector<ScoredToken> tokens;
  std::vector<ScoredPair> pairs;
  std::vector<ScoredSpanPair> spans;

  bool empty() const { return tokens.empty() && pairs.empty() && spans.empty(); }
  // Token indices touched by the selection, ascending and unique.
  std::vector<int> token_indices() const;
};

// Number of items kept out of `total` at `k_percent`: ceil(k/100 * total),
// at least one.
int top_fraction_count(int total, double k_percent);

ExplanationSelection select_top_fraction(const HighlightTokenSet& set, double k_percent);
ExplanationSelection select_top_fraction(const TokenInteractionSet& set, double k_percent);
// Span pairs are never filtered; they are only ordered by score.
ExplanationSelection select_top_fraction(const SpanInteractionSet& set, double k_percent);

ExplanationSelection select_explanations(const ExplanationSets& sets,
                                         ExplanationType type, double k_percent);

ExplanationGraph build_graph(const ExplanationSelection& selection,
                             const TokenizedInstance& instance);

// Text format: a header block (magic, id, nodes, type, k, edge count) and one
// "u v" line per edge.
std::string serialize_graph(const ExplanationGraph& graph);
ExplanationGraph parse_graph(const std::string& payload);
void save_graph(const std::string& path, const ExplanationGraph& graph);
ExplanationGraph load_graph(const std::string& path);

}  // namespace graphnle

#endif  // GRAPHNLE_GRAPH_H_
