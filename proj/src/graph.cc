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

#include "graphnle/graph.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "graphnle/text.h"

namespace graphnle {

namespace {

constexpr std::string_view kGraphMagic = "graphnle-graph 1";

}  // namespace

bool ExplanationGraph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

std::vector<std::vector<int>> ExplanationGraph::neighbors() const {
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

ExplanationGraph ExplanationGraph::padded_to(int nodes) const {
  if (nodes < node_count) throw InvalidInput("cannot shrink a graph by padding");
  ExplanationGraph g = *this;
  g.node_count = nodes;
  return g;
}

std::vector<int> ExplanationSelection::token_indices() const {
  std::set<int> out;
  for (const auto& t : tokens) out.insert(t.index);
  for (const auto& p : pairs) {
    out.insert(p.i);
    out.insert(p.j);
  }
  for (const auto& s : spans) {
    for (int t = s.span_a.begin; t < s.span_a.end; ++t) out.insert(t);
    for (int t = s.span_b.begin; t < s.span_b.end; ++t) out.insert(t);
  }
  return {out.begin(), out.end()};
}

int top_fraction_count(int total, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw InvalidInput("k_percent must lie in (0, 100]");
  }
  // Small epsilon so that e.g. 30% of 10 is 3, not 4 from rounding noise.
  const int n = static_cast<int>(std::ceil(k_percent / 100.0 * total - 1e-9));
  return std::clamp(n, 1, total);
}

ExplanationSelection select_top_fraction(const HighlightTokenSet& set, double k_percent) {
  if (set.entries.empty()) throw InvalidInput("cannot select from an empty explanation list");
  ExplanationSelection sel;
  sel.type = ExplanationType::kHighlightToken;
  sel.k_percent = k_percent;
  sel.tokens = set.entries;
  std::stable_sort(sel.tokens.begin(), sel.tokens.end(),
                   [](const ScoredToken& a, const ScoredToken& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.index < b.index;
                   });
  sel.tokens.resize(top_fraction_count(static_cast<int>(set.entries.size()), k_percent));
  return sel;
}

ExplanationSelection select_top_fraction(const TokenInteractionSet& set, double k_percent) {
  if (set.entries.empty()) throw InvalidInput("cannot select from an empty explanation list");
  ExplanationSelection sel;
  sel.type = ExplanationType::kTokenInteraction;
  sel.k_percent = k_percent;
  sel.pairs = set.entries;
  std::stable_sort(sel.pairs.begin(), sel.pairs.end(),
                   [](const ScoredPair& a, const ScoredPair& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.i != b.i) return a.i < b.i;
                     return a.j < b.j;
                   });
  sel.pairs.resize(top_fraction_count(static_cast<int>(set.entries.size()), k_percent));
  return sel;
}

ExplanationSelection select_top_fraction(const SpanInteractionSet& set, double k_percent) {
  if (set.entries.empty()) throw InvalidInput("cannot select from an empty explanation list");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw InvalidInput("k_percent must lie in (0, 100]");
  }
  ExplanationSelection sel;
  sel.type = ExplanationType::kSpanInteraction;
  sel.k_percent = k_percent;
  sel.spans = set.entries;
  std::stable_sort(sel.spans.begin(), sel.spans.end(),
                   [](const ScoredSpanPair& a, const ScoredSpanPair& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.span_a != b.span_a) return a.span_a < b.span_a;
                     return a.span_b < b.span_b;
                   });
  return sel;
}

ExplanationSelection select_explanations(const ExplanationSets& sets,
                                         ExplanationType type, double k_percent) {
  switch (type) {
    case ExplanationType::kHighlightToken:
      return select_top_fraction(sets.highlight_tokens, k_percent);
    case ExplanationType::kTokenInteraction:
      return select_top_fraction(sets.token_interactions, k_percent);
    case ExplanationType::kSpanInteraction:
      // Louvain may find no cross-part community; the graph is then empty.
      if (sets.span_interactions.entries.empty()) {
        ExplanationSelection sel;
        sel.type = type;
        sel.k_percent = k_percent;
        return sel;
      }
      return select_top_fraction(sets.span_interactions, k_percent);
  }
  throw InvalidInput("unknown explanation type");
}

ExplanationGraph build_graph(const ExplanationSelection& selection,
                             const TokenizedInstance& instance) {
  const int n = instance.size();
  std::set<std::pair<int, int>> edges;
  auto check = [&](int t) {
    if (t < 0 || t >= n) {
      throw InvalidInput("explanation index " + std::to_string(t) +
                         " out of range for instance " + instance.id);
    }
  };
  auto connect = [&](int u, int v) {
    check(u);
    check(v);
    if (u == v) return;
    edges.insert(std::minmax(u, v));
  };
  auto clique = [&](const std::vector<int>& nodes) {
    for (size_t a = 0; a < nodes.size(); ++a) {
      for (size_t b = a + 1; b < nodes.size(); ++b) connect(nodes[a], nodes[b]);
    }
  };
  auto range_nodes = [](const IndexRange& r) {
    std::vector<int> v;
    for (int t = r.begin; t < r.end; ++t) v.push_back(t);
    return v;
  };

  switch (selection.type) {
    case ExplanationType::kHighlightToken: {
      std::vector<int> nodes;
      for (const auto& t : selection.tokens) nodes.push_back(t.index);
      clique(nodes);
      break;
    }
    case ExplanationType::kTokenInteraction:
      for (const auto& p : selection.pairs) connect(p.i, p.j);
      break;
    case ExplanationType::kSpanInteraction:
      for (const auto& s : selection.spans) {
        const auto a = range_nodes(s.span_a);
        const auto b = range_nodes(s.span_b);
        clique(a);
        clique(b);
        for (int u : a) {
          for (int v : b) connect(u, v);
        }
      }
      break;
  }

  // Chain the subtokens of every word that holds a selected token.
  for (int t : selection.token_indices()) {
    check(t);
    const int w = instance.word_of(t);
    if (w < 0) continue;
    const IndexRange r = instance.word_map[w].range;
    for (int s = r.begin; s + 1 < r.end; ++s) connect(s, s + 1);
  }

  ExplanationGraph g;
  g.instance_id = instance.id;
  g.type = selection.type;
  g.k_percent = selection.k_percent;
  g.node_count = n;
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

std::string serialize_graph(const ExplanationGraph& g) {
  std::ostringstream out;
  out.precision(17);
  out << kGraphMagic << '\n'
      << "id " << g.instance_id << '\n'
      << "nodes " << g.node_count << '\n'
      << "type " << to_string(g.type) << '\n'
      << "k " << g.k_percent << '\n'
      << "edges " << g.edges.size() << '\n';
  for (const auto& [u, v] : g.edges) out << u << ' ' << v << '\n';
  return out.str();
}

ExplanationGraph parse_graph(const std::string& payload) {
  std::istringstream in(payload);
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(std::string("graph payload truncated before ") + what);
    }
    return line;
  };
  auto field = [&](std::string_view key) {
    const std::string l = next_line(std::string(key).c_str());
    if (!text::starts_with(l, std::string(key) + " ")) {
      throw ParseError("graph header: expected '" + std::string(key) + "'");
    }
    return l.substr(key.size() + 1);
  };
  if (next_line("magic") != kGraphMagic) throw ParseError("not a graph payload");
  ExplanationGraph g;
  try {
    g.instance_id = field("id");
    g.node_count = std::stoi(field("nodes"));
    g.type = parse_explanation_type(field("type"));
    g.k_percent = std::stod(field("k"));
    const int count = std::stoi(field("edges"));
    if (g.node_count < 0 || count < 0) throw ParseError("negative graph size");
    for (int e = 0; e < count; ++e) {
      std::istringstream row(next_line("edge list end"));
      int u = -1, v = -1;
      if (!(row >> u >> v)) throw ParseError("malformed edge line: " + line);
      if (u < 0 || v < 0 || u >= g.node_count || v >= g.node_count || u == v) {
        throw ParseError("invalid edge " + line);
      }
      g.edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("malformed graph header: ") + e.what());
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

void save_graph(const std::string& path, const ExplanationGraph& graph) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_graph(graph);
}

ExplanationGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("graph not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

}  // namespace graphnle
