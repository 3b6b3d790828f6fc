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

#include "graphnle/attribution.h"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "graphnle/louvain.h"

namespace graphnle {

using nlohmann::json;

void AttentionSnapshot::validate(double tolerance) const {
  if (weights.empty()) throw InvalidInput("snapshot has no attention heads");
  if (contributions.size() != weights.size()) {
    throw InvalidInput("snapshot contribution/head count mismatch");
  }
  const int n = token_count();
  if (boundary_m < 0 || boundary_m > n) throw InvalidInput("snapshot boundary out of range");
  for (size_t h = 0; h < weights.size(); ++h) {
    if (weights[h].cols() != n || contributions[h].size() != n) {
      throw InvalidInput("snapshot head " + std::to_string(h) + " has inconsistent shape");
    }
    for (Eigen::Index q = 0; q < weights[h].rows(); ++q) {
      if (std::abs(weights[h].row(q).sum() - 1.0) > tolerance) {
        throw InvalidInput("snapshot head " + std::to_string(h) + " row " +
                           std::to_string(q) + " does not sum to one");
      }
    }
  }
}

std::string serialize_snapshot(const AttentionSnapshot& s) {
  json heads = json::array();
  for (size_t h = 0; h < s.weights.size(); ++h) {
    const Matrix& w = s.weights[h];
    std::vector<double> flat;
    flat.reserve(w.size());
    for (Eigen::Index q = 0; q < w.rows(); ++q) {
      for (Eigen::Index k = 0; k < w.cols(); ++k) flat.push_back(w(q, k));
    }
    std::vector<int> signs(s.contributions[h].size());
    for (Eigen::Index k = 0; k < s.contributions[h].size(); ++k) {
      const double c = s.contributions[h](k);
      signs[k] = c > 0 ? 1 : (c < 0 ? -1 : 0);
    }
    heads.push_back({{"rows", w.rows()}, {"weights", flat}, {"contributions", signs}});
  }
  json obj = {{"instance_id", s.instance_id},
              {"head_count", s.head_count()},
              {"token_count", s.token_count()},
              {"boundary_m", s.boundary_m},
              {"heads", heads}};
  return obj.dump();
}

AttentionSnapshot parse_snapshot(const std::string& payload) {
  try {
    const json obj = json::parse(payload);
    AttentionSnapshot s;
    s.instance_id = obj.at("instance_id").get<std::string>();
    s.boundary_m = obj.at("boundary_m").get<int>();
    const int heads = obj.at("head_count").get<int>();
    const int n = obj.at("token_count").get<int>();
    if (static_cast<int>(obj.at("heads").size()) != heads) {
      throw ParseError("snapshot head count mismatch");
    }
    for (const auto& h : obj.at("heads")) {
      const int rows = h.at("rows").get<int>();
      const auto flat = h.at("weights").get<std::vector<double>>();
      const auto signs = h.at("contributions").get<std::vector<int>>();
      if (static_cast<int>(flat.size()) != rows * n || static_cast<int>(signs.size()) != n) {
        throw ParseError("snapshot payload truncated");
      }
      Matrix w(rows, n);
      for (int q = 0; q < rows; ++q) {
        for (int k = 0; k < n; ++k) w(q, k) = flat[static_cast<size_t>(q) * n + k];
      }
      Vector c(n);
      for (int k = 0; k < n; ++k) c(k) = signs[k];
      s.weights.push_back(std::move(w));
      s.contributions.push_back(std::move(c));
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed snapshot: ") + e.what());
  }
}

void save_snapshot(const std::string& path, const AttentionSnapshot& snapshot) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_snapshot(snapshot) << '\n';
}

AttentionSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("snapshot not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_snapshot(ss.str());
}

HeadSelection select_head(const AttentionSnapshot& snapshot) {
  if (snapshot.weights.empty()) throw InvalidInput("snapshot has no attention heads");
  HeadSelection sel;
  double best = -1.0;
  for (int h = 0; h < snapshot.head_count(); ++h) {
    const RowVector mean_attended = snapshot.weights[h].colwise().mean();
    double score = 0.0;
    for (Eigen::Index k = 0; k < mean_attended.size(); ++k) {
      if (snapshot.contributions[h](k) > 0) score += mean_attended(k);
    }
    sel.head_scores.push_back(score);
    if (score > best) {
      best = score;
      sel.head = h;
    }
  }
  sel.degenerate = best <= 0.0;
  if (sel.degenerate) sel.head = 0;
  return sel;
}

namespace {

const Matrix& head_matrix(const AttentionSnapshot& s, int head) {
  if (head < 0 || head >= s.head_count()) {
    throw InvalidInput("head index " + std::to_string(head) + " out of range");
  }
  const Matrix& w = s.weights[head];
  if (w.rows() != w.cols()) {
    throw InvalidInput("token-level importance needs a square token-to-token attention matrix");
  }
  return w;
}

}  // namespace

HighlightTokenSet token_importance(const AttentionSnapshot& snapshot, int head) {
  const Matrix& w = head_matrix(snapshot, head);
  const Eigen::Index n = w.cols();
  if (n < 2) throw InvalidInput("token importance needs at least two tokens");
  HighlightTokenSet out;
  out.entries.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double others = w.col(i).sum() - w(i, i);
    out.entries.push_back({static_cast<int>(i), others / static_cast<double>(n - 1)});
  }
  return out;
}

TokenInteractionSet token_interactions(const AttentionSnapshot& snapshot, int head) {
  const Matrix& w = head_matrix(snapshot, head);
  const int n = static_cast<int>(w.cols());
  const int m = snapshot.boundary_m;
  if (m < 1 || m >= n) {
    throw InvalidInput("token interactions need nonempty parts (boundary " +
                       std::to_string(m) + ", tokens " + std::to_string(n) + ")");
  }
  TokenInteractionSet out;
  out.boundary_m = m;
  out.entries.reserve(static_cast<size_t>(m) * (n - m));
  for (int i = 0; i < m; ++i) {
    for (int j = m; j < n; ++j) out.entries.push_back({i, j, 0.5 * (w(i, j) + w(j, i))});
  }
  return out;
}

namespace {

std::vector<IndexRange> contiguous_runs(const std::vector<int>& sorted) {
  std::vector<IndexRange> runs;
  for (int t : sorted) {
    if (!runs.empty() && runs.back().end == t) {
      ++runs.back().end;
    } else {
      runs.push_back({t, t + 1});
    }
  }
  return runs;
}

}  // namespace

SpanInteractionSet span_interactions(const TokenInteractionSet& interactions,
                                     int boundary_m) {
  if (interactions.entries.empty()) throw InvalidInput("no token interactions");
  int n = 0;
  std::map<std::pair<int, int>, double> score;
  for (const auto& e : interactions.entries) {
    n = std::max({n, e.i + 1, e.j + 1});
    score[{e.i, e.j}] = e.score;
  }
  WeightedGraph graph(n);
  for (const auto& e : interactions.entries) graph.add_edge(e.i, e.j, e.score);
  const Partition partition = louvain_partition(graph);

  SpanInteractionSet out;
  for (const auto& members : partition.groups()) {
    std::vector<int> part_a, part_b;
    for (int t : members) (t < boundary_m ? part_a : part_b).push_back(t);
    if (part_a.empty() || part_b.empty()) continue;
    for (const IndexRange& sa : contiguous_runs(part_a)) {
      for (const IndexRange& sb : contiguous_runs(part_b)) {
        double sum = 0.0;
        int count = 0;
        for (int i = sa.begin; i < sa.end; ++i) {
          for (int j = sb.begin; j < sb.end; ++j) {
            auto it = score.find({i, j});
            if (it == score.end()) continue;
            sum += it->second;
            ++count;
          }
        }
        if (count > 0) out.entries.push_back({sa, sb, sum / count});
      }
    }
  }
  return out;
}

ExplanationSets extract_explanations(const AttentionSnapshot& snapshot) {
  ExplanationSets sets;
  sets.head = select_head(snapshot);
  sets.highlight_tokens = token_importance(snapshot, sets.head.head);
  sets.token_interactions = token_interactions(snapshot, sets.head.head);
  sets.span_interactions =
      span_interactions(sets.token_interactions, snapshot.boundary_m);
  return sets;
}

}  // namespace graphnle
