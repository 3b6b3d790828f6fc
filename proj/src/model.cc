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

#include "graphnle/model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "json.hpp"

namespace graphnle {

using ag::Var;
using nlohmann::json;

ModelConfig ModelConfig::toy(int vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  return c;
}

ModelConfig ModelConfig::reference_large() {
  ModelConfig c;
  c.vocab_size = 32128;
  c.hidden = 1024;
  c.ff = 4096;
  c.heads = 16;
  c.encoder_layers = 24;
  c.decoder_layers = 24;
  c.max_positions = 512;
  c.tie_embeddings = true;
  return c;
}

void ModelConfig::validate() const {
  if (vocab_size <= kEosId) throw InvalidInput("vocabulary too small");
  if (hidden < 1 || ff < 1 || heads < 1 || hidden % heads != 0) {
    throw InvalidInput("hidden size must be a positive multiple of the head count");
  }
  if (encoder_layers < 1 || decoder_layers < 1) throw InvalidInput("need at least one layer");
  if (max_positions < 2) throw InvalidInput("max_positions too small");
  if (gnn) {
    gnn::InsertionConfig ins;
    ins.encoder_layers = encoder_layers;
    ins.after_layer = gnn_after_layer;
    ins.validate();
  }
}

int64_t count_parameters(const ModelConfig& c) {
  const int64_t d = c.hidden, v = c.vocab_size, ff = c.ff;
  const int64_t attention = 4 * d * d;
  const int64_t norm = 2 * d;
  const int64_t ffn = d * ff + ff + ff * d + d;
  int64_t total = v * d + 2 * static_cast<int64_t>(c.max_positions) * d;
  if (!c.tie_embeddings) total += d * v;
  total += c.encoder_layers * (attention + 2 * norm + ffn);
  total += c.decoder_layers * (2 * attention + 3 * norm + ffn);
  if (c.gnn) {
    switch (*c.gnn) {
      case gnn::Variant::kGcn:
        total += d * d;
        break;
      case gnn::Variant::kGat:
        total += d * d + 2 * d;
        break;
      case gnn::Variant::kSage:
        total += 2 * d * d;
        break;
    }
  }
  return total;
}

int ParameterStore::add(std::string name, Matrix value) {
  names_.push_back(std::move(name));
  vars_.push_back(ag::leaf(std::move(value)));
  return size() - 1;
}

int ParameterStore::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return -1;
}

int64_t ParameterStore::scalar_count() const {
  int64_t n = 0;
  for (const auto& v : vars_) n += v->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& v : vars_) v->grad.resize(0, 0);
}

ParameterStore ParameterStore::clone() const {
  ParameterStore out;
  for (int i = 0; i < size(); ++i) out.add(names_[i], vars_[i]->value);
  return out;
}

Seq2SeqModel::Seq2SeqModel(const ModelConfig& config, uint64_t seed) : config_(config) {
  config_.validate();
  build(seed);
}

void Seq2SeqModel::build(uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = config_.hidden;
  auto normal = [&rng](int rows, int cols, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    return Matrix(Matrix::NullaryExpr(rows, cols, [&] { return dist(rng); }));
  };
  auto linear = [&](const std::string& name, int in, int out) {
    return params_.add(name, normal(in, out, 1.0 / std::sqrt(static_cast<double>(in))));
  };
  auto attention_block = [&](const std::string& prefix) {
    AttentionBlock b;
    b.wq = linear(prefix + ".wq", d, d);
    b.wk = linear(prefix + ".wk", d, d);
    b.wv = linear(prefix + ".wv", d, d);
    b.wo = linear(prefix + ".wo", d, d);
    return b;
  };
  auto layer_norm = [&](const std::string& prefix) {
    LayerNormParams ln;
    ln.gamma = params_.add(prefix + ".gamma", Matrix::Ones(1, d));
    ln.beta = params_.add(prefix + ".beta", Matrix::Zero(1, d));
    return ln;
  };
  auto feed_forward = [&](const std::string& prefix) {
    FeedForward f;
    f.w1 = linear(prefix + ".w1", d, config_.ff);
    f.b1 = params_.add(prefix + ".b1", Matrix::Zero(1, config_.ff));
    f.w2 = linear(prefix + ".w2", config_.ff, d);
    f.b2 = params_.add(prefix + ".b2", Matrix::Zero(1, d));
    return f;
  };

  token_embedding_ = params_.add("embed.tokens", normal(config_.vocab_size, d, 1.0));
  encoder_positions_ = params_.add("embed.encoder_positions", normal(config_.max_positions, d, 0.1));
  decoder_positions_ = params_.add("embed.decoder_positions", normal(config_.max_positions, d, 0.1));
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    EncoderLayer layer;
    layer.attention = attention_block(p + ".attention");
    layer.norm1 = layer_norm(p + ".norm1");
    layer.ffn = feed_forward(p + ".ffn");
    layer.norm2 = layer_norm(p + ".norm2");
    encoder_.push_back(layer);
  }
  for (int l = 0; l < config_.decoder_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    DecoderLayer layer;
    layer.self_attention = attention_block(p + ".self_attention");
    layer.norm1 = layer_norm(p + ".norm1");
    layer.cross_attention = attention_block(p + ".cross_attention");
    layer.norm2 = layer_norm(p + ".norm2");
    layer.ffn = feed_forward(p + ".ffn");
    layer.norm3 = layer_norm(p + ".norm3");
    decoder_.push_back(layer);
  }
  if (!config_.tie_embeddings) lm_head_ = linear("lm_head", d, config_.vocab_size);
  if (config_.gnn) {
    const auto g = gnn::GnnParameters<double>::initialized(*config_.gnn, d, rng());
    gnn_weight_ = params_.add("gnn.weight", g.weight);
    if (*config_.gnn == gnn::Variant::kGat) {
      gnn_attention_ = params_.add("gnn.attention", g.attention);
    }
  }
}

std::vector<int> Seq2SeqModel::gnn_parameter_indices() const {
  std::vector<int> out;
  if (gnn_weight_ >= 0) out.push_back(gnn_weight_);
  if (gnn_attention_ >= 0) out.push_back(gnn_attention_);
  return out;
}

gnn::GnnParameters<double> Seq2SeqModel::gnn_parameters() const {
  if (!config_.gnn) throw InvalidInput("model has no GNN layer");
  gnn::GnnParameters<double> p;
  p.variant = *config_.gnn;
  p.activation = config_.gnn_activation;
  p.weight = params_[gnn_weight_]->value;
  if (gnn_attention_ >= 0) p.attention = params_[gnn_attention_]->value.col(0);
  return p;
}

std::vector<int> Seq2SeqModel::encoder_input(const TokenizedInstance& instance) {
  std::vector<int> ids = instance.token_ids;
  ids.push_back(kEosId);
  return ids;
}

Var Seq2SeqModel::attention(const AttentionBlock& b, const Var& queries, const Var& memory,
                            bool causal, ag::AttentionCapture* capture) const {
  const Var q = ag::matmul(queries, params_[b.wq]);
  const Var k = ag::matmul(memory, params_[b.wk]);
  const Var v = ag::matmul(memory, params_[b.wv]);
  const Var ctx = ag::multi_head_attention(q, k, v, config_.heads, causal, capture);
  return ag::matmul(ctx, params_[b.wo]);
}

Var Seq2SeqModel::feed_forward(const FeedForward& f, const Var& x) const {
  const Var h = ag::relu(ag::add_row(ag::matmul(x, params_[f.w1]), params_[f.b1]));
  return ag::add_row(ag::matmul(h, params_[f.w2]), params_[f.b2]);
}

Var Seq2SeqModel::norm(const LayerNormParams& ln, const Var& x) const {
  return ag::layer_norm(x, params_[ln.gamma], params_[ln.beta]);
}

Var Seq2SeqModel::gnn_layer(const Var& states, const ExplanationGraph& graph) const {
  const gnn::GnnParameters<double> p = gnn_parameters();
  Matrix out = gnn::gnn_forward<double>(states->value, graph, p);
  const Var w = params_[gnn_weight_];
  std::vector<Var> parents{states, w};
  if (gnn_attention_ >= 0) parents.push_back(params_[gnn_attention_]);
  return ag::make_op(std::move(out), std::move(parents), [graph, p](ag::Node& self) {
    const auto grads = gnn::gnn_backward<double>(self.parents[0]->value, graph, p, self.grad);
    self.parents[0]->accumulate(grads.d_states);
    self.parents[1]->accumulate(grads.d_weight);
    if (self.parents.size() > 2) self.parents[2]->accumulate(grads.d_attention);
  });
}

Var Seq2SeqModel::encode(const std::vector<int>& input_ids, const ExplanationGraph* graph,
                         ag::AttentionCapture* capture) const {
  const int t = static_cast<int>(input_ids.size());
  if (t < 1 || t > config_.max_positions) {
    throw InvalidInput("encoder input length " + std::to_string(t) + " outside [1, " +
                       std::to_string(config_.max_positions) + "]");
  }
  std::optional<ExplanationGraph> padded;
  if (has_gnn()) {
    if (graph == nullptr) throw InvalidInput("graph-augmented model needs an explanation graph");
    if (graph->node_count > t) throw InvalidInput("graph has more nodes than encoder positions");
    padded = graph->padded_to(t);
  }
  std::vector<int> positions(t);
  for (int i = 0; i < t; ++i) positions[i] = i;
  Var x = ag::add(ag::embedding(params_[token_embedding_], input_ids),
                  ag::embedding(params_[encoder_positions_], positions));
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const EncoderLayer& layer = encoder_[l];
    const bool last = l + 1 == config_.encoder_layers;
    const Var h = norm(layer.norm1, ag::add(x, attention(layer.attention, x, x, false,
                                                         last ? capture : nullptr)));
    x = norm(layer.norm2, ag::add(h, feed_forward(layer.ffn, h)));
    if (padded && l + 1 == config_.gnn_after_layer) x = gnn_layer(x, *padded);
  }
  return x;
}

Var Seq2SeqModel::decode(const Var& memory, const std::vector<int>& decoder_ids) const {
  const int t = static_cast<int>(decoder_ids.size());
  if (t < 1 || t > config_.max_positions) throw InvalidInput("decoder input length out of range");
  std::vector<int> positions(t);
  for (int i = 0; i < t; ++i) positions[i] = i;
  Var x = ag::add(ag::embedding(params_[token_embedding_], decoder_ids),
                  ag::embedding(params_[decoder_positions_], positions));
  for (const DecoderLayer& layer : decoder_) {
    const Var h1 = norm(layer.norm1, ag::add(x, attention(layer.self_attention, x, x, true, nullptr)));
    const Var h2 = norm(layer.norm2,
                        ag::add(h1, attention(layer.cross_attention, h1, memory, false, nullptr)));
    x = norm(layer.norm3, ag::add(h2, feed_forward(layer.ffn, h2)));
  }
  if (lm_head_ >= 0) return ag::matmul(x, params_[lm_head_]);
  // Tied head: x E^T scaled by d^-1/2.
  const Var table = params_[token_embedding_];
  const double s = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
  return ag::make_op(x->value * table->value.transpose() * s, {x, table}, [s](ag::Node& self) {
    auto& x = *self.parents[0];
    auto& e = *self.parents[1];
    x.accumulate(self.grad * e.value * s);
    e.accumulate(self.grad.transpose() * x.value * s);
  });
}

Var Seq2SeqModel::loss(const TokenizedInstance& instance, const ExplanationGraph* graph) const {
  const Var memory = encode(encoder_input(instance), graph);
  std::vector<int> decoder_ids{kBosId};
  decoder_ids.insert(decoder_ids.end(), instance.target_ids.begin(), instance.target_ids.end());
  std::vector<int> targets = instance.target_ids;
  targets.push_back(kEosId);
  return ag::cross_entropy_sum(decode(memory, decoder_ids), targets);
}

void Seq2SeqModel::copy_matching_parameters(const Seq2SeqModel& other) {
  for (int i = 0; i < params_.size(); ++i) {
    const int j = other.params_.find(params_.name(i));
    if (j < 0) continue;
    if (other.params_[j]->value.rows() != params_[i]->value.rows() ||
        other.params_[j]->value.cols() != params_[i]->value.cols()) {
      throw InvalidInput("parameter shape mismatch for " + params_.name(i));
    }
    params_[i]->value = other.params_[j]->value;
  }
}

namespace {

constexpr char kCheckpointMagic[8] = {'G', 'N', 'L', 'E', 'C', 'K', 'P', '1'};

json config_to_json(const ModelConfig& c) {
  json j = {{"vocab_size", c.vocab_size},         {"hidden", c.hidden},
            {"ff", c.ff},                         {"heads", c.heads},
            {"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
            {"max_positions", c.max_positions},   {"tie_embeddings", c.tie_embeddings},
            {"gnn_after_layer", c.gnn_after_layer},
            {"gnn_activation", std::string(gnn::to_string(c.gnn_activation))}};
  j["gnn"] = c.gnn ? json(std::string(gnn::to_string(*c.gnn))) : json(nullptr);
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.ff = j.at("ff").get<int>();
  c.heads = j.at("heads").get<int>();
  c.encoder_layers = j.at("encoder_layers").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.tie_embeddings = j.at("tie_embeddings").get<bool>();
  c.gnn_after_layer = j.at("gnn_after_layer").get<int>();
  c.gnn_activation = gnn::parse_activation(j.at("gnn_activation").get<std::string>());
  if (!j.at("gnn").is_null()) c.gnn = gnn::parse_variant(j.at("gnn").get<std::string>());
  return c;
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("checkpoint truncated");
  return value;
}

}  // namespace

void Seq2SeqModel::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::string cfg = config_to_json(config_).dump();
    write_pod<uint64_t>(out, cfg.size());
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(params_.size()));
    for (int i = 0; i < params_.size(); ++i) {
      const std::string& name = params_.name(i);
      const Matrix& m = params_[i]->value;
      write_pod<uint64_t>(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_pod<int64_t>(out, m.rows());
      write_pod<int64_t>(out, m.cols());
      out.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

Seq2SeqModel Seq2SeqModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("checkpoint not found: " + path);
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ParseError(path + ": not a checkpoint");
  }
  const auto cfg_len = read_pod<uint64_t>(in);
  std::string cfg(cfg_len, '\0');
  if (!in.read(cfg.data(), static_cast<std::streamsize>(cfg_len))) throw ParseError("checkpoint truncated");
  ModelConfig config;
  try {
    config = config_from_json(json::parse(cfg));
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad checkpoint config: " + e.what());
  }
  Seq2SeqModel model(config, 0);
  const auto count = read_pod<uint64_t>(in);
  if (count != static_cast<uint64_t>(model.params_.size())) {
    throw ParseError(path + ": parameter count mismatch");
  }
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<uint64_t>(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name_len))) throw ParseError("checkpoint truncated");
    const auto rows = read_pod<int64_t>(in);
    const auto cols = read_pod<int64_t>(in);
    const int idx = model.params_.find(name);
    if (idx < 0 || model.params_[idx]->value.rows() != rows || model.params_[idx]->value.cols() != cols) {
      throw ParseError(path + ": unexpected parameter " + name);
    }
    Matrix& m = model.params_[idx]->value;
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw ParseError("checkpoint truncated");
    }
  }
  return model;
}

Seq2SeqModel insert_gnn_layer(const Seq2SeqModel& base, const gnn::InsertionConfig& insertion,
                              const gnn::GnnParameters<double>& params) {
  insertion.validate();
  if (base.has_gnn()) throw InvalidInput("model already carries a GNN layer");
  if (insertion.encoder_layers != base.config().encoder_layers) {
    throw InvalidInput("insertion config does not match the encoder depth");
  }
  const int d = base.config().hidden;
  const int in = params.variant == gnn::Variant::kSage ? 2 * d : d;
  if (params.weight.rows() != d || params.weight.cols() != in) {
    throw InvalidInput("GNN weight shape does not match hidden size");
  }
  if (params.variant == gnn::Variant::kGat && params.attention.size() != 2 * d) {
    throw InvalidInput("GAT attention vector must have 2*hidden entries");
  }
  Seq2SeqModel out = base;
  out.params_ = base.params_.clone();
  out.config_.gnn = params.variant;
  out.config_.gnn_activation = params.activation;
  out.config_.gnn_after_layer = insertion.after_layer;
  out.gnn_weight_ = out.params_.add("gnn.weight", params.weight);
  if (params.variant == gnn::Variant::kGat) {
    out.gnn_attention_ = out.params_.add("gnn.attention", params.attention);
  }
  out.config_.validate();
  return out;
}

AttentionSnapshot capture_snapshot(Seq2SeqModel& model, const TokenizedInstance& instance,
                                   const ExplanationGraph* graph) {
  const int n = instance.size();
  ag::AttentionCapture capture;
  const Var memory = model.encode(Seq2SeqModel::encoder_input(instance), graph, &capture);
  const Var logits = model.decode(memory, {kBosId});
  Eigen::Index predicted = 0;
  logits->value.row(0).maxCoeff(&predicted);
  ag::backward(ag::element(logits, 0, static_cast<int>(predicted)));
  model.parameters().zero_grad();

  AttentionSnapshot s;
  s.instance_id = instance.id;
  s.boundary_m = instance.boundary_m;
  for (size_t h = 0; h < capture.probs.size(); ++h) {
    Matrix w = capture.probs[h].topLeftCorner(n, n);
    w = w.array().colwise() / w.rowwise().sum().array();
    const RowVector summed = capture.prob_grads[h].topRows(n).colwise().sum();
    Vector signs(n);
    for (int k = 0; k < n; ++k) signs(k) = summed(k) > 0 ? 1.0 : (summed(k) < 0 ? -1.0 : 0.0);
    s.weights.push_back(std::move(w));
    s.contributions.push_back(std::move(signs));
  }
  return s;
}

}  // namespace graphnle
