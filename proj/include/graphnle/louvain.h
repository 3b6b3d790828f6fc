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

#ifndef GRAPHNLE_LOUVAIN_H_
#define GRAPHNLE_LOUVAIN_H_

#include <vector>

namespace graphnle {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// Undirected weighted graph. Parallel edges are summed; self-loops allowed.
class WeightedGraph {
 public:
  explicit WeightedGraph(int node_count) : adjacency_(node_count) {}

  void add_edge(int u, int v, double weight);

  int node_count() const { return static_cast<int>(adjacency_.size()); }
  // Neighbor lists as (node, weight); a self-loop appears once with its
  // weight counted twice in the degree, as in the usual convention.
  const std::vector<std::pair<int, double>>& neighbors(int u) const {
    return adjacency_[u];
  }
  double degree(int u) const;
  double total_weight() const;  // Sum of undirected edge weights (m).

 private:
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

// community[u] is a dense community id in [0, community_count).
struct Partition {
  std::vector<int> community;

  int community_count() const;
  std::vector<std::vector<int>> groups() const;  // Ascending members.
};

double modularity(const WeightedGraph& graph, const Partition& partition,
                  double resolution = 1.0);

// Louvain modularity optimisation: local moves in ascending node order until
// no move improves modularity, then community aggregation, repeated until
// the partition is stable. Deterministic.
Partition louvain_partition(const WeightedGraph& graph, double resolution = 1.0);

}  // namespace graphnle

#endif  // GRAPHNLE_LOUVAIN_H_
