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

#include "graphnle/autograd.h"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace graphnle::ag {

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var leaf(Matrix value) {
  auto n = constant(std::move(value));
  n->requires_grad = true;
  return n;
}

Var make_op(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward = std::move(backward);
  return n;
}

Var matmul(const Var& a, const Var& b) {
  if (a->value.cols() != b->value.rows()) throw InvalidInput("matmul shape mismatch");
  return make_op(a->value * b->value, {a, b}, [](Node& self) {
    auto& a = *self.parents[0];
    auto& b = *self.parents[1];
    if (a.requires_grad) a.accumulate(self.grad * b.value.transpose());
    if (b.requires_grad) b.accumulate(a.value.transpose() * self.grad);
  });
}

Var add(const Var& a, const Var& b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols()) {
    throw InvalidInput("add shape mismatch");
  }
  return make_op(a->value + b->value, {a, b}, [](Node& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(self.grad);
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row->value.rows() != 1 || row->value.cols() != a->value.cols()) {
    throw InvalidInput("add_row shape mismatch");
  }
  Matrix out = a->value.rowwise() + row->value.row(0);
  return make_op(std::move(out), {a, row}, [](Node& self) {
    self.parents[0]->accumulate(self.grad);
    if (self.parents[1]->requires_grad) {
      self.parents[1]->accumulate(self.grad.colwise().sum());
    }
  });
}

Var scale(const Var& a, double s) {
  return make_op(a->value * s, {a}, [s](Node& self) { self.parents[0]->accumulate(self.grad * s); });
}

Var relu(const Var& a) {
  return make_op(a->value.cwiseMax(0.0), {a}, [](Node& self) {
    const Matrix mask = (self.parents[0]->value.array() > 0.0).cast<double>().matrix();
    self.parents[0]->accumulate(self.grad.cwiseProduct(mask));
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Matrix& in = x->value;
  const Eigen::Index n = in.cols();
  const Vector mean = in.rowwise().mean();
  const Matrix centered = in.colwise() - mean;
  const Vector inv_std =
      ((centered.array().square().rowwise().sum() / static_cast<double>(n)) + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix out = (xhat.array().rowwise() * gamma->value.row(0).array()).matrix();
  out.rowwise() += beta->value.row(0);
  return make_op(std::move(out), {x, gamma, beta},
                 [xhat = std::move(xhat), inv_std](Node& self) {
                   auto& x = *self.parents[0];
                   auto& gamma = *self.parents[1];
                   auto& beta = *self.parents[2];
                   if (gamma.requires_grad) {
                     gamma.accumulate(self.grad.cwiseProduct(xhat).colwise().sum());
                   }
                   if (beta.requires_grad) beta.accumulate(self.grad.colwise().sum());
                   if (x.requires_grad) {
                     const Matrix dxhat = self.grad.array().rowwise() * gamma.value.row(0).array();
                     const Vector mean_d = dxhat.rowwise().mean();
                     const Vector mean_dx = dxhat.cwiseProduct(xhat).rowwise().mean();
                     Matrix dx = dxhat;
                     dx.colwise() -= mean_d;
                     dx -= (xhat.array().colwise() * mean_dx.array()).matrix();
                     dx = dx.array().colwise() * inv_std.array();
                     x.accumulate(dx);
                   }
                 });
}

Var embedding(const Var& table, const std::vector<int>& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), table->value.cols());
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= table->value.rows()) throw InvalidInput("embedding id out of range");
    out.row(r) = table->value.row(ids[r]);
  }
  return make_op(std::move(out), {table}, [ids](Node& self) {
    auto& t = *self.parents[0];
    Matrix g = Matrix::Zero(t.value.rows(), t.value.cols());
    for (size_t r = 0; r < ids.size(); ++r) g.row(ids[r]) += self.grad.row(r);
    t.accumulate(g);
  });
}

Var slice_rows(const Var& a, int begin, int count) {
  return make_op(a->value.middleRows(begin, count), {a}, [begin, count](Node& self) {
    auto& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g.middleRows(begin, count) = self.grad;
    p.accumulate(g);
  });
}

Var element(const Var& a, int row, int col) {
  Matrix out(1, 1);
  out(0, 0) = a->value(row, col);
  return make_op(std::move(out), {a}, [row, col](Node& self) {
    auto& p = *self.parents[0];
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    g(row, col) = self.grad(0, 0);
    p.accumulate(g);
  });
}

Var multi_head_attention(const Var& q, const Var& k, const Var& v, int heads, bool causal,
                         AttentionCapture* capture) {
  const Eigen::Index d = q->value.cols();
  if (heads < 1 || d % heads != 0 || k->value.cols() != d || v->value.cols() != d ||
      k->value.rows() != v->value.rows()) {
    throw InvalidInput("attention shape mismatch");
  }
  const Eigen::Index dh = d / heads;
  const Eigen::Index tq = q->value.rows();
  const Eigen::Index tk = k->value.rows();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<Matrix> probs(heads);
  Matrix out(tq, d);
  for (int h = 0; h < heads; ++h) {
    Matrix s = q->value.middleCols(h * dh, dh) * k->value.middleCols(h * dh, dh).transpose() * inv_sqrt;
    if (causal) {
      for (Eigen::Index r = 0; r < tq; ++r) {
        for (Eigen::Index c = r + 1; c < tk; ++c) s(r, c) = -std::numeric_limits<double>::infinity();
      }
    }
    const Vector mx = s.rowwise().maxCoeff();
    Matrix p = (s.colwise() - mx).array().exp();
    p = p.array().colwise() / p.rowwise().sum().array();
    out.middleCols(h * dh, dh) = p * v->value.middleCols(h * dh, dh);
    probs[h] = std::move(p);
  }
  if (capture != nullptr) {
    capture->probs = probs;
    capture->prob_grads.assign(heads, Matrix::Zero(tq, tk));
  }
  return make_op(std::move(out), {q, k, v},
                 [probs = std::move(probs), heads, dh, inv_sqrt, capture](Node& self) {
                   auto& q = *self.parents[0];
                   auto& k = *self.parents[1];
                   auto& v = *self.parents[2];
                   Matrix dq = Matrix::Zero(q.value.rows(), q.value.cols());
                   Matrix dk = Matrix::Zero(k.value.rows(), k.value.cols());
                   Matrix dv = Matrix::Zero(v.value.rows(), v.value.cols());
                   for (int h = 0; h < heads; ++h) {
                     const Matrix& p = probs[h];
                     const Matrix d_out = self.grad.middleCols(h * dh, dh);
                     const Matrix dp = d_out * v.value.middleCols(h * dh, dh).transpose();
                     if (capture != nullptr) capture->prob_grads[h] += dp;
                     dv.middleCols(h * dh, dh) = p.transpose() * d_out;
                     const Vector row_dot = dp.cwiseProduct(p).rowwise().sum();
                     const Matrix ds = p.cwiseProduct(dp.colwise() - row_dot) * inv_sqrt;
                     dq.middleCols(h * dh, dh) = ds * k.value.middleCols(h * dh, dh);
                     dk.middleCols(h * dh, dh) = ds.transpose() * q.value.middleCols(h * dh, dh);
                   }
                   q.accumulate(dq);
                   k.accumulate(dk);
                   v.accumulate(dv);
                 });
}

Matrix log_softmax_rows(const Matrix& logits) {
  const Vector mx = logits.rowwise().maxCoeff();
  Matrix shifted = logits.colwise() - mx;
  const Vector lse = shifted.array().exp().rowwise().sum().log();
  return shifted.colwise() - lse;
}

Var cross_entropy_sum(const Var& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits->value.rows()) {
    throw InvalidInput("one distribution per target position is required");
  }
  const Matrix logp = log_softmax_rows(logits->value);
  Matrix out(1, 1);
  out(0, 0) = 0.0;
  for (size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] >= 0) out(0, 0) -= logp(static_cast<Eigen::Index>(t), targets[t]);
  }
  return make_op(std::move(out), {logits}, [logp, targets](Node& self) {
    Matrix g = logp.array().exp();
    for (size_t t = 0; t < targets.size(); ++t) {
      if (targets[t] >= 0) {
        g(static_cast<Eigen::Index>(t), targets[t]) -= 1.0;
      } else {
        g.row(static_cast<Eigen::Index>(t)).setZero();
      }
    }
    self.parents[0]->accumulate(g * self.grad(0, 0));
  });
}

void backward(const Var& root) {
  if (!root->requires_grad) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, bool>> stack{{root.get(), false}};
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(node);
      continue;
    }
    if (!seen.insert(node).second) continue;
    stack.push_back({node, true});
    for (const auto& p : node->parents) {
      if (p->requires_grad && !seen.count(p.get())) stack.push_back({p.get(), false});
    }
  }
  root->accumulate(Matrix::Ones(root->value.rows(), root->value.cols()));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->has_grad()) n->backward(*n);
  }
}

}  // namespace graphnle::ag
