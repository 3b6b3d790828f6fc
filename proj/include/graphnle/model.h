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

#ifndef GRAPHNLE_MODEL_H_
#define GRAPHNLE_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphnle/attribution.h"
#include "graphnle/autograd.h"
#include "graphnle/dataset.h"
#include "graphnle/gnn.h"
#include "graphnle/graph.h"

namespace graphnle {

struct ModelConfig {
  int vocab_size = 0;
  int hidden = 32;
  int ff = 128;
  int heads = 4;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int max_positions = 128;
  bool tie_embeddings = false;

  // Present on graph-augmented models.
  std::optional<gnn::Variant> gnn;
  gnn::Activation gnn_activation = gnn::Activation::kRelu;
  int gnn_after_layer = 0;  // 1-based encoder layer feeding the GNN.

  // 2+2 layers, hidden 32.
  static ModelConfig toy(int vocab_size);
  // Dimensions of the 24+24 layer, 1024-wide reference encoder-decoder.
  static ModelConfig reference_large();

  void validate() const;
};

// Trainable parameter count implied by a configuration.
int64_t count_parameters(const ModelConfig& config);

// Named parameter tensors. Layers refer to entries by index, so copying a
// store and its index tables yields an independent model.
class ParameterStore {
 public:
  int add(std::string name, Matrix value);
  const ag::Var& operator[](int index) const { return vars_[index]; }
  int size() const { return static_cast<int>(vars_.size()); }
  const std::string& name(int index) const { return names_[index]; }
  int find(const std::string& name) const;  // -1 when absent.
  int64_t scalar_count() const;
  void zero_grad();
  ParameterStore clone() const;

 private:
  std::vector<std::string> names_;
  std::vector<ag::Var> vars_;
};

struct AttentionBlock {
  int wq = -1, wk = -1, wv = -1, wo = -1;
};
struct LayerNormParams {
  int gamma = -1, beta = -1;
};
struct FeedForward {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};
struct EncoderLayer {
  AttentionBlock attention;
  LayerNormParams norm1;
  FeedForward ffn;
  LayerNormParams norm2;
};
struct DecoderLayer {
  AttentionBlock self_attention;
  LayerNormParams norm1;
  AttentionBlock cross_attention;
  LayerNormParams norm2;
  FeedForward ffn;
  LayerNormParams norm3;
};

// Post-norm transformer encoder-decoder. When the config carries a GNN, its
// output replaces the states between encoder layers gnn_after_layer and
// gnn_after_layer + 1; everything else is unchanged.
class Seq2SeqModel {
 public:
  Seq2SeqModel(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  bool has_gnn() const { return config_.gnn.has_value(); }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  // Indices of the GNN weights (empty for a base model).
  std::vector<int> gnn_parameter_indices() const;
  gnn::GnnParameters<double> gnn_parameters() const;

  // Encoder input: content ids followed by EOS.
  static std::vector<int> encoder_input(const TokenizedInstance& instance);

  // Encoder states for `input_ids`. `graph` is required on augmented models
  // and is padded with isolated nodes up to the input length. `capture`
  // receives the final encoder layer's self-attention.
  ag::Var encode(const std::vector<int>& input_ids, const ExplanationGraph* graph,
                 ag::AttentionCapture* capture = nullptr) const;
  // Next-token logits for every decoder input position.
  ag::Var decode(const ag::Var& encoder_states, const std::vector<int>& decoder_ids) const;

  // Summed cross-entropy of the target (plus EOS) under teacher forcing.
  ag::Var loss(const TokenizedInstance& instance, const ExplanationGraph* graph) const;

  void save(const std::string& path) const;
  static Seq2SeqModel load(const std::string& path);

  // Copies every parameter value present (by name) in `other`.
  void copy_matching_parameters(const Seq2SeqModel& other);

 private:
  Seq2SeqModel() = default;
  void build(uint64_t seed);
  ag::Var attention(const AttentionBlock& block, const ag::Var& queries, const ag::Var& memory,
                    bool causal, ag::AttentionCapture* capture) const;
  ag::Var feed_forward(const FeedForward& ffn, const ag::Var& x) const;
  ag::Var norm(const LayerNormParams& ln, const ag::Var& x) const;
  ag::Var gnn_layer(const ag::Var& states, const ExplanationGraph& graph) const;

  ModelConfig config_;
  ParameterStore params_;
  int token_embedding_ = -1;
  int encoder_positions_ = -1;
  int decoder_positions_ = -1;
  int lm_head_ = -1;
  int gnn_weight_ = -1;
  int gnn_attention_ = -1;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;

  friend Seq2SeqModel insert_gnn_layer(const Seq2SeqModel&, const gnn::InsertionConfig&,
                                       const gnn::GnnParameters<double>&);
};

// Returns a copy of `base` with one GNN layer stacked on top of encoder layer
// config.after_layer, initialised from `params`.
Seq2SeqModel insert_gnn_layer(const Seq2SeqModel& base, const gnn::InsertionConfig& config,
                              const gnn::GnnParameters<double>& params);

// Runs the label-prediction pass and records the final encoder layer's
// self-attention over content tokens together with the sign of the
// predicted-label logit gradient per attended token.
AttentionSnapshot capture_snapshot(Seq2SeqModel& model, const TokenizedInstance& instance,
                                   const ExplanationGraph* graph = nullptr);

}  // namespace graphnle

#endif  // GRAPHNLE_MODEL_H_
