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

#ifndef GRAPHNLE_GNN_H_
#define GRAPHNLE_GNN_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "graphnle/common.h"
#include "graphnle/graph.h"

namespace graphnle::gnn {

enum class Variant { kGcn, kGat, kSage };
enum class Activation { kIdentity, kRelu };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

template <typename Scalar>
using NodeStates = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ParamVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Weights of one inserted GNN layer. States are row-major per node, so a
// node update W h is computed as h^T W^T for all rows at once.
template <typename Scalar>
struct GnnParameters {
  Variant variant = Variant::kSage;
  Activation activation = Activation::kRelu;
  NodeStates<Scalar> weight;       // hidden x hidden (sage: hidden x 2*hidden)
  ParamVector<Scalar> attention;   // gat only: [a_self; a_neighbor], 2*hidden
  Scalar leaky_slope = Scalar(0.2);

  int hidden() const { return static_cast<int>(weight.rows()); }

  Eigen::Index parameter_count() const { return weight.size() + attention.size(); }

  static GnnParameters initialized(Variant variant, int hidden, uint64_t seed) {
    GnnParameters p;
    p.variant = variant;
    const int in = variant == Variant::kSage ? 2 * hidden : hidden;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
    p.weight = NodeStates<Scalar>::NullaryExpr(hidden, in, [&] { return Scalar(normal(rng)); });
    if (variant == Variant::kGat) {
      std::normal_distribution<double> small(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
      p.attention = ParamVector<Scalar>::NullaryExpr(2 * hidden, [&] { return Scalar(small(rng)); });
    }
    return p;
  }
};

template <typename Scalar>
struct GnnGradients {
  NodeStates<Scalar> d_states;
  NodeStates<Scalar> d_weight;
  ParamVector<Scalar> d_attention;
};

// Where the GNN sits in the encoder stack: after layer `after_layer`
// (1-based), feeding layer after_layer + 1.
struct InsertionConfig {
  int encoder_layers = 0;
  int after_layer = 0;
  int gnn_layers = 1;

  // max(1, floor(3L/4)).
  static InsertionConfig three_quarter_depth(int encoder_layers) {
    InsertionConfig c;
    c.encoder_layers = encoder_layers;
    c.after_layer = std::max(1, (3 * encoder_layers) / 4);
    return c;
  }

  void validate() const {
    if (encoder_layers < 1 || after_layer < 1 || after_layer > encoder_layers) {
      throw InvalidInput("GNN insertion index " + std::to_string(after_layer) +
                         " out of range for " + std::to_string(encoder_layers) +
                         " encoder layers");
    }
    if (gnn_layers < 1) throw InvalidInput("at least one GNN layer is required");
  }
};

namespace internal {

template <typename Scalar>
void check_shapes(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                  const GnnParameters<Scalar>& p) {
  const Eigen::Index d = h.cols();
  const Eigen::Index in = p.variant == Variant::kSage ? 2 * d : d;
  if (g.node_count != h.rows()) {
    throw InvalidInput("graph has " + std::to_string(g.node_count) + " nodes but states have " +
                       std::to_string(h.rows()) + " rows");
  }
  if (p.weight.rows() != d || p.weight.cols() != in) {
    throw InvalidInput("GNN weight shape does not match hidden size " + std::to_string(d));
  }
  if (p.variant == Variant::kGat && p.attention.size() != 2 * d) {
    throw InvalidInput("GAT attention vector must have 2*hidden entries");
  }
}

template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& z, Activation a) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([a](Scalar x) {
    return a == Activation::kRelu ? std::max(x, Scalar(0)) : x;
  });
}

template <typename Derived>
auto activation_grad(const Eigen::MatrixBase<Derived>& z, Activation a) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([a](Scalar x) {
    return a == Activation::kRelu ? (x > Scalar(0) ? Scalar(1) : Scalar(0)) : Scalar(1);
  });
}

// Row v holds the mean of the neighbor states of v (zero when isolated).
template <typename Scalar>
NodeStates<Scalar> neighbor_mean(const NodeStates<Scalar>& h,
                                 const std::vector<std::vector<int>>& adj) {
  NodeStates<Scalar> m = NodeStates<Scalar>::Zero(h.rows(), h.cols());
  for (size_t v = 0; v < adj.size(); ++v) {
    if (adj[v].empty()) continue;
    for (int u : adj[v]) m.row(v) += h.row(u);
    m.row(v) /= static_cast<Scalar>(adj[v].size());
  }
  return m;
}

// Transpose of neighbor_mean applied to a gradient.
template <typename Scalar>
NodeStates<Scalar> neighbor_mean_transpose(const NodeStates<Scalar>& d_mean,
                                           const std::vector<std::vector<int>>& adj) {
  NodeStates<Scalar> d = NodeStates<Scalar>::Zero(d_mean.rows(), d_mean.cols());
  for (size_t v = 0; v < adj.size(); ++v) {
    if (adj[v].empty()) continue;
    const Scalar inv = Scalar(1) / static_cast<Scalar>(adj[v].size());
    for (int u : adj[v]) d.row(u) += inv * d_mean.row(v);
  }
  return d;
}

template <typename Scalar>
Scalar leaky(Scalar x, Scalar slope) {
  return x > Scalar(0) ? x : slope * x;
}

}  // namespace internal

// Softmax-normalised GAT coefficients; alpha[v][t] belongs to the t-th
// neighbor of v in ascending order. Empty for isolated nodes.
template <typename Scalar>
std::vector<std::vector<Scalar>> gat_coefficients(const NodeStates<Scalar>& h,
                                                  const ExplanationGraph& g,
                                                  const GnnParameters<Scalar>& p) {
  internal::check_shapes(h, g, p);
  const Eigen::Index d = h.cols();
  const NodeStates<Scalar> projected = h * p.weight.transpose();
  const ParamVector<Scalar> self_scores = projected * p.attention.head(d);
  const ParamVector<Scalar> nb_scores = projected * p.attention.tail(d);
  const auto adj = g.neighbors();
  std::vector<std::vector<Scalar>> alpha(adj.size());
  for (size_t v = 0; v < adj.size(); ++v) {
    if (adj[v].empty()) continue;
    std::vector<Scalar> e;
    for (int u : adj[v]) e.push_back(internal::leaky(self_scores(v) + nb_scores(u), p.leaky_slope));
    const Scalar mx = *std::max_element(e.begin(), e.end());
    Scalar z(0);
    for (auto& x : e) z += (x = std::exp(x - mx));
    for (auto& x : e) x /= z;
    alpha[v] = std::move(e);
  }
  return alpha;
}

// h_v = sigma(W * mean_{u in N(v)} h_u); isolated nodes pass through.
template <typename Scalar>
NodeStates<Scalar> gcn_forward(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                               const GnnParameters<Scalar>& p) {
  internal::check_shapes(h, g, p);
  const auto adj = g.neighbors();
  const NodeStates<Scalar> z = internal::neighbor_mean(h, adj) * p.weight.transpose();
  NodeStates<Scalar> out = internal::activate(z, p.activation);
  for (size_t v = 0; v < adj.size(); ++v) {
    if (adj[v].empty()) out.row(v) = h.row(v);
  }
  return out;
}

// h_v = sigma(sum_u alpha_vu W h_u); isolated nodes pass through.
template <typename Scalar>
NodeStates<Scalar> gat_forward(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                               const GnnParameters<Scalar>& p) {
  const auto alpha = gat_coefficients(h, g, p);
  const auto adj = g.neighbors();
  const NodeStates<Scalar> projected = h * p.weight.transpose();
  NodeStates<Scalar> z = NodeStates<Scalar>::Zero(h.rows(), h.cols());
  for (size_t v = 0; v < adj.size(); ++v) {
    for (size_t t = 0; t < adj[v].size(); ++t) z.row(v) += alpha[v][t] * projected.row(adj[v][t]);
  }
  NodeStates<Scalar> out = internal::activate(z, p.activation);
  for (size_t v = 0; v < adj.size(); ++v) {
    if (adj[v].empty()) out.row(v) = h.row(v);
  }
  return out;
}

// h_v = sigma(W [h_v ; mean_{u in N(v)} h_u]); the mean is zero when isolated.
template <typename Scalar>
NodeStates<Scalar> sage_forward(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                                const GnnParameters<Scalar>& p) {
  internal::check_shapes(h, g, p);
  const Eigen::Index d = h.cols();
  const NodeStates<Scalar> z = h * p.weight.leftCols(d).transpose() +
                               internal::neighbor_mean(h, g.neighbors()) *
                                   p.weight.rightCols(d).transpose();
  return internal::activate(z, p.activation);
}

template <typename Scalar>
NodeStates<Scalar> gnn_forward(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                               const GnnParameters<Scalar>& p) {
  switch (p.variant) {
    case Variant::kGcn:
      return gcn_forward(h, g, p);
    case Variant::kGat:
      return gat_forward(h, g, p);
    case Variant::kSage:
      return sage_forward(h, g, p);
  }
  throw InvalidInput("unknown GNN variant");
}

// Gradients of a scalar loss given d_out = dLoss/dOutput.
template <typename Scalar>
GnnGradients<Scalar> gnn_backward(const NodeStates<Scalar>& h, const ExplanationGraph& g,
                                  const GnnParameters<Scalar>& p,
                                  const NodeStates<Scalar>& d_out) {
  internal::check_shapes(h, g, p);
  if (d_out.rows() != h.rows() || d_out.cols() != h.cols()) {
    throw InvalidInput("output gradient shape mismatch");
  }
  const Eigen::Index n = h.rows();
  const Eigen::Index d = h.cols();
  const auto adj = g.neighbors();
  GnnGradients<Scalar> grads;
  grads.d_states = NodeStates<Scalar>::Zero(n, d);
  grads.d_weight = NodeStates<Scalar>::Zero(p.weight.rows(), p.weight.cols());
  grads.d_attention = ParamVector<Scalar>::Zero(p.attention.size());

  switch (p.variant) {
    case Variant::kGcn: {
      const NodeStates<Scalar> mean = internal::neighbor_mean(h, adj);
      const NodeStates<Scalar> z = mean * p.weight.transpose();
      NodeStates<Scalar> dz = d_out.cwiseProduct(internal::activation_grad(z, p.activation));
      for (Eigen::Index v = 0; v < n; ++v) {
        if (adj[v].empty()) {
          dz.row(v).setZero();
          grads.d_states.row(v) += d_out.row(v);
        }
      }
      grads.d_weight = dz.transpose() * mean;
      grads.d_states += internal::neighbor_mean_transpose<Scalar>(dz * p.weight, adj);
      break;
    }
    case Variant::kSage: {
      const NodeStates<Scalar> mean = internal::neighbor_mean(h, adj);
      const NodeStates<Scalar> z =
          h * p.weight.leftCols(d).transpose() + mean * p.weight.rightCols(d).transpose();
      const NodeStates<Scalar> dz =
          d_out.cwiseProduct(internal::activation_grad(z, p.activation));
      grads.d_weight.leftCols(d) = dz.transpose() * h;
      grads.d_weight.rightCols(d) = dz.transpose() * mean;
      grads.d_states = dz * p.weight.leftCols(d) +
                       internal::neighbor_mean_transpose<Scalar>(dz * p.weight.rightCols(d), adj);
      break;
    }
    case Variant::kGat: {
      const auto alpha = gat_coefficients(h, g, p);
      const NodeStates<Scalar> projected = h * p.weight.transpose();
      const ParamVector<Scalar> a_self = p.attention.head(d);
      const ParamVector<Scalar> a_nb = p.attention.tail(d);
      const ParamVector<Scalar> self_scores = projected * a_self;
      const ParamVector<Scalar> nb_scores = projected * a_nb;
      NodeStates<Scalar> z = NodeStates<Scalar>::Zero(n, d);
      for (Eigen::Index v = 0; v < n; ++v) {
        for (size_t t = 0; t < adj[v].size(); ++t) z.row(v) += alpha[v][t] * projected.row(adj[v][t]);
      }
      const NodeStates<Scalar> dz =
          d_out.cwiseProduct(internal::activation_grad(z, p.activation));
      NodeStates<Scalar> d_projected = NodeStates<Scalar>::Zero(n, d);
      for (Eigen::Index v = 0; v < n; ++v) {
        if (adj[v].empty()) {
          grads.d_states.row(v) += d_out.row(v);
          continue;
        }
        const size_t deg = adj[v].size();
        std::vector<Scalar> d_alpha(deg);
        Scalar weighted(0);
        for (size_t t = 0; t < deg; ++t) {
          const int u = adj[v][t];
          d_projected.row(u) += alpha[v][t] * dz.row(v);
          d_alpha[t] = dz.row(v).dot(projected.row(u));
          weighted += alpha[v][t] * d_alpha[t];
        }
        for (size_t t = 0; t < deg; ++t) {
          const int u = adj[v][t];
          const Scalar de = alpha[v][t] * (d_alpha[t] - weighted);
          const Scalar pre = self_scores(v) + nb_scores(u);
          const Scalar ds = de * (pre > Scalar(0) ? Scalar(1) : p.leaky_slope);
          grads.d_attention.head(d) += ds * projected.row(v).transpose();
          grads.d_attention.tail(d) += ds * projected.row(u).transpose();
          d_projected.row(v) += ds * a_self.transpose();
          d_projected.row(u) += ds * a_nb.transpose();
        }
      }
      grads.d_weight = d_projected.transpose() * h;
      grads.d_states += d_projected * p.weight;
      break;
    }
  }
  return grads;
}

}  // namespace graphnle::gnn

#endif  // GRAPHNLE_GNN_H_
