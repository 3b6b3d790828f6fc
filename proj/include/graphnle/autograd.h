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

#ifndef GRAPHNLE_AUTOGRAD_H_
#define GRAPHNLE_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <vector>

#include "graphnle/common.h"

// Minimal reverse-mode differentiation over dense double matrices. Each op
// allocates a node holding its value, its parents and a closure that pushes
// the node's gradient into the parents.
namespace graphnle::ag {

struct Node {
  Matrix value;
  Matrix grad;  // Allocated on first accumulation.
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Matrix& g);
  bool has_grad() const { return grad.size() > 0; }
};

using Var = std::shared_ptr<Node>;

Var constant(Matrix value);
Var leaf(Matrix value);  // Requires grad; used for parameters.

// Generic op: `backward(self)` reads self.grad and accumulates into parents.
Var make_op(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var add_row(const Var& a, const Var& row);  // Broadcast a 1 x n row.
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var embedding(const Var& table, const std::vector<int>& ids);
Var slice_rows(const Var& a, int begin, int count);
Var element(const Var& a, int row, int col);

// Attention probabilities per head and, after backward, their gradients.
struct AttentionCapture {
  std::vector<Matrix> probs;
  std::vector<Matrix> prob_grads;
};

// Scaled dot-product attention over `heads` column blocks of q, k, v.
// `causal` masks keys after the query position.
Var multi_head_attention(const Var& q, const Var& k, const Var& v, int heads,
                         bool causal, AttentionCapture* capture = nullptr);

// Sum over rows of -log softmax(logits)[target]; targets < 0 are skipped.
Var cross_entropy_sum(const Var& logits, const std::vector<int>& targets);

// Row-wise log-softmax of a plain matrix.
Matrix log_softmax_rows(const Matrix& logits);

// Seeds d(root)/d(root) = 1 and propagates through the recorded graph.
void backward(const Var& root);

}  // namespace graphnle::ag

#endif  // GRAPHNLE_AUTOGRAD_H_
