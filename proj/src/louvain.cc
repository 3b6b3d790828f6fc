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

#include "graphnle/louvain.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace graphnle {

void WeightedGraph::add_edge(int u, int v, double weight) {
  if (weight < 0.0) throw std::invalid_argument("negative edge weight");
  if (u < 0 || v < 0 || u >= node_count() || v >= node_count()) {
    throw std::out_of_range("edge endpoint out of range");
  }
  if (weight == 0.0) return;
  auto bump = [weight](std::vector<std::pair<int, double>>& list, int to) {
    for (auto& [n, w] : list) {
      if (n == to) {
        w += weight;
        return;
      }
    }
    list.emplace_back(to, weight);
  };
  bump(adjacency_[u], v);
  if (u != v) bump(adjacency_[v], u);
}

double WeightedGraph::degree(int u) const {
  double d = 0.0;
  for (const auto& [n, w] : adjacency_[u]) d += (n == u) ? 2.0 * w : w;
  return d;
}

double WeightedGraph::total_weight() const {
  double sum = 0.0;
  for (int u = 0; u < node_count(); ++u) sum += degree(u);
  return sum / 2.0;
}

int Partition::community_count() const {
  int c = 0;
  for (int x : community) c = std::max(c, x + 1);
  return c;
}

std::vector<std::vector<int>> Partition::groups() const {
  std::vector<std::vector<int>> out(community_count());
  for (size_t u = 0; u < community.size(); ++u) {
    out[community[u]].push_back(static_cast<int>(u));
  }
  return out;
}

double modularity(const WeightedGraph& graph, const Partition& partition,
                  double resolution) {
  const double m = graph.total_weight();
  if (m <= 0.0) return 0.0;
  const int k = partition.community_count();
  std::vector<double> internal(k, 0.0), total(k, 0.0);
  for (int u = 0; u < graph.node_count(); ++u) {
    const int cu = partition.community[u];
    total[cu] += graph.degree(u);
    for (const auto& [v, w] : graph.neighbors(u)) {
      if (partition.community[v] == cu) internal[cu] += (v == u) ? 2.0 * w : w;
    }
  }
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    q += internal[c] / (2.0 * m) - resolution * (total[c] / (2.0 * m)) * (total[c] / (2.0 * m));
  }
  return q;
}

namespace {

constexpr double kMinGain = 1e-12;

// One round of local moves. Returns true if any node changed community.
bool local_moves(const WeightedGraph& g, std::vector<int>& community,
                 double resolution) {
  const int n = g.node_count();
  const double m2 = 2.0 * g.total_weight();
  std::vector<double> degree(n), tot(n, 0.0);
  for (int u = 0; u < n; ++u) {
    degree[u] = g.degree(u);
    tot[community[u]] += degree[u];
  }
  bool moved_any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int u = 0; u < n; ++u) {
      const int own = community[u];
      // Weight from u to each neighboring community, ordered by id.
      std::map<int, double> links;
      for (const auto& [v, w] : g.neighbors(u)) {
        if (v != u) links[community[v]] += w;
      }
      tot[own] -= degree[u];
      auto gain = [&](int c) {
        auto it = links.find(c);
        const double k_in = it == links.end() ? 0.0 : it->second;
        return k_in - resolution * tot[c] * degree[u] / m2;
      };
      int best = own;
      double best_gain = gain(own);
      for (const auto& [c, w] : links) {
        const double gc = gain(c);
        if (gc > best_gain + kMinGain) {
          best = c;
          best_gain = gc;
        }
      }
      tot[best] += degree[u];
      if (best != own) {
        community[u] = best;
        improved = true;
        moved_any = true;
      }
    }
  }
  return moved_any;
}

std::vector<int> relabel(const std::vector<int>& community) {
  std::map<int, int> ids;
  std::vector<int> out(community.size());
  for (size_t u = 0; u < community.size(); ++u) {
    auto [it, inserted] = ids.emplace(community[u], static_cast<int>(ids.size()));
    out[u] = it->second;
  }
  return out;
}

}  // namespace

Partition louvain_partition(const WeightedGraph& graph, double resolution) {
  const int n = graph.node_count();
  std::vector<int> membership(n);
  for (int u = 0; u < n; ++u) membership[u] = u;
  if (graph.total_weight() <= 0.0) return {membership};

  WeightedGraph level = graph;
  while (true) {
    std::vector<int> local(level.node_count());
    for (int u = 0; u < level.node_count(); ++u) local[u] = u;
    if (!local_moves(level, local, resolution)) break;
    local = relabel(local);
    for (int& c : membership) c = local[c];

    const int k = *std::max_element(local.begin(), local.end()) + 1;
    WeightedGraph next(k);
    for (int u = 0; u < level.node_count(); ++u) {
      for (const auto& [v, w] : level.neighbors(u)) {
        if (v < u) continue;
        next.add_edge(local[u], local[v], w);
      }
    }
    if (k == level.node_count()) break;
    level = std::move(next);
  }
  return {relabel(membership)};
}

}  // namespace graphnle
