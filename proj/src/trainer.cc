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

#include "graphnle/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "graphnle/metrics.h"
#include "graphnle/text.h"

namespace graphnle {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
  if (beam < 1) throw InvalidInput("beam width must be at least 1");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) throw InvalidInput("k_percent must lie in (0, 100]");
  if (epochs < 0) throw InvalidInput("epochs must be nonnegative");
  if (batch_size < 1) throw InvalidInput("batch size must be at least 1");
  if (max_decode_tokens < 1) throw InvalidInput("max_decode_tokens must be at least 1");
}

double sequence_loss(const Matrix& step_probs, const std::vector<int>& target,
                     LossReduction reduction) {
  if (static_cast<Eigen::Index>(target.size()) != step_probs.rows()) {
    throw InvalidInput("sequence_loss: " + std::to_string(step_probs.rows()) +
                       " distributions for " + std::to_string(target.size()) + " targets");
  }
  double loss = 0.0;
  int counted = 0;
  for (size_t t = 0; t < target.size(); ++t) {
    if (target[t] < 0) continue;
    if (target[t] >= step_probs.cols()) throw InvalidInput("target id outside the vocabulary");
    loss -= std::log(step_probs(static_cast<Eigen::Index>(t), target[t]));
    ++counted;
  }
  if (reduction == LossReduction::kTokenMean && counted > 0) loss /= counted;
  return loss;
}

double batch_sequence_loss(const std::vector<Matrix>& step_probs,
                           const std::vector<std::vector<int>>& targets) {
  if (step_probs.size() != targets.size() || targets.empty()) {
    throw InvalidInput("batch_sequence_loss: mismatched or empty batch");
  }
  double sum = 0.0;
  for (size_t b = 0; b < targets.size(); ++b) sum += sequence_loss(step_probs[b], targets[b]);
  return sum / static_cast<double>(targets.size());
}

void AdamW::step(ParameterStore& params) {
  if (m_.empty()) {
    for (int i = 0; i < params.size(); ++i) {
      m_.push_back(Matrix::Zero(params[i]->value.rows(), params[i]->value.cols()));
      v_.push_back(m_.back());
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (int i = 0; i < params.size(); ++i) {
    ag::Node& p = *params[i];
    if (!p.has_grad()) continue;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value *= 1.0 - config_.learning_rate * config_.weight_decay;
    p.value.array() -= config_.learning_rate * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + config_.adam_eps);
  }
}

GenerationOutput parse_generation(const std::string& id, const std::string& decoded) {
  GenerationOutput out;
  out.id = id;
  out.text = text::trim(decoded);
  if (out.text.empty()) {
    out.flagged = true;
    return out;
  }
  const size_t delim = out.text.find(". ");
  if (delim != std::string::npos) {
    out.label = text::trim(out.text.substr(0, delim));
    out.nle = text::trim(out.text.substr(delim + 2));
  } else if (out.text.back() == '.') {
    out.label = text::trim(out.text.substr(0, out.text.size() - 1));
  } else {
    out.label = out.text;
    out.flagged = true;
  }
  if (out.label.empty()) out.flagged = true;
  return out;
}

namespace {

struct Hypothesis {
  std::vector<int> tokens;  // Generated ids, without BOS.
  double log_prob = 0.0;
  bool finished = false;

  double normalized() const { return log_prob / std::max<size_t>(1, tokens.size()); }
};

}  // namespace

GenerationOutput generate(const Seq2SeqModel& model, const WordPieceTokenizer& tokenizer,
                          const TokenizedInstance& instance, const ExplanationGraph* graph,
                          const GenerateOptions& options) {
  if (options.beam < 1 || options.max_tokens < 1) throw InvalidInput("invalid generation options");
  const ag::Var memory = model.encode(Seq2SeqModel::encoder_input(instance), graph);
  std::vector<Hypothesis> beams{Hypothesis{}};
  std::vector<Hypothesis> finished;
  for (int step = 0; step < options.max_tokens && !beams.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : beams) {
      std::vector<int> input{kBosId};
      input.insert(input.end(), h.tokens.begin(), h.tokens.end());
      const Matrix logits = model.decode(memory, input)->value.bottomRows(1);
      const RowVector logp = ag::log_softmax_rows(logits).row(0);
      std::vector<int> order(logp.size());
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + options.beam, order.end(),
                        [&logp](int a, int b) { return logp(a) != logp(b) ? logp(a) > logp(b) : a < b; });
      for (int r = 0; r < options.beam; ++r) {
        Hypothesis next = h;
        next.tokens.push_back(order[r]);
        next.log_prob += logp(order[r]);
        next.finished = order[r] == kEosId;
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.log_prob > b.log_prob; });
    beams.clear();
    for (auto& c : candidates) {
      if (static_cast<int>(beams.size()) >= options.beam) break;
      if (c.finished) {
        finished.push_back(std::move(c));
      } else {
        beams.push_back(std::move(c));
      }
    }
    if (static_cast<int>(finished.size()) >= options.beam) break;
  }
  for (auto& b : beams) finished.push_back(std::move(b));
  const auto best = std::max_element(finished.begin(), finished.end(),
                                     [](const Hypothesis& a, const Hypothesis& b) {
                                       return a.normalized() < b.normalized();
                                     });
  return parse_generation(instance.id, tokenizer.decode(best->tokens));
}

namespace {

const ExplanationGraph* graph_for(const Seq2SeqModel& model, const GraphMap& graphs,
                                  const std::string& id) {
  if (!model.has_gnn()) return nullptr;
  auto it = graphs.find(id);
  if (it == graphs.end()) throw InvalidInput("missing explanation graph for instance " + id);
  return &it->second;
}

}  // namespace

CheckpointSeries fit(Seq2SeqModel& model, const WordPieceTokenizer& tokenizer, const FitData& data,
                     const TrainConfig& config,
                     const std::function<void(const Checkpoint&)>& on_epoch) {
  config.validate();
  if (data.dev_references.size() != data.dev.size()) {
    throw InvalidInput("one reference set per dev instance is required");
  }
  for (const auto* split : {&data.train, &data.dev}) {
    for (const auto& inst : *split) graph_for(model, data.graphs, inst.id);
  }
  if (!config.checkpoint_dir.empty()) std::filesystem::create_directories(config.checkpoint_dir);

  CheckpointSeries series;
  AdamW optimizer(config);
  ParameterStore& params = model.parameters();
  const std::vector<int> gnn_indices = model.gnn_parameter_indices();
  std::vector<size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    Checkpoint ckpt;
    ckpt.epoch = epoch;
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (size_t b = start; b < end; ++b) {
        const TokenizedInstance& inst = data.train[order[b]];
        const ag::Var loss = model.loss(inst, graph_for(model, data.graphs, inst.id));
        const double value = loss->value(0, 0);
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                              " on instance " + inst.id);
        }
        loss_sum += value;
        ag::backward(ag::scale(loss, inv_batch));
      }
      for (int idx : gnn_indices) {
        if (params[idx]->has_grad()) {
          ckpt.gnn_grad_norm = std::max(ckpt.gnn_grad_norm, params[idx]->grad.norm());
        }
      }
      optimizer.step(params);
    }
    params.zero_grad();
    ckpt.train_loss = data.train.empty() ? 0.0 : loss_sum / static_cast<double>(data.train.size());

    if (!data.dev.empty()) {
      std::vector<std::string> hyps;
      for (const auto& inst : data.dev) {
        hyps.push_back(generate(model, tokenizer, inst, graph_for(model, data.graphs, inst.id),
                                {config.beam, config.max_decode_tokens})
                           .nle);
      }
      ckpt.dev_bleu = corpus_bleu(hyps, data.dev_references);
    }
    for (int i = 0; i < params.size(); ++i) ckpt.weights.push_back(params[i]->value);
    if (!config.checkpoint_dir.empty()) {
      ckpt.path = (std::filesystem::path(config.checkpoint_dir) /
                   ("epoch-" + std::to_string(epoch) + ".ckpt"))
                      .string();
      model.save(ckpt.path);
    }
    if (on_epoch) on_epoch(ckpt);
    series.push_back(std::move(ckpt));
  }
  return series;
}

const Checkpoint& select_checkpoint(const CheckpointSeries& series) {
  if (series.empty()) throw InvalidInput("cannot select from an empty checkpoint series");
  size_t best = 0;
  for (size_t i = 1; i < series.size(); ++i) {
    if (series[i].dev_bleu > series[best].dev_bleu) best = i;
  }
  return series[best];
}

void restore_checkpoint(Seq2SeqModel& model, const Checkpoint& checkpoint) {
  ParameterStore& params = model.parameters();
  if (!checkpoint.weights.empty()) {
    if (static_cast<int>(checkpoint.weights.size()) != params.size()) {
      throw InvalidInput("checkpoint does not match the model");
    }
    for (int i = 0; i < params.size(); ++i) params[i]->value = checkpoint.weights[i];
    return;
  }
  if (checkpoint.path.empty()) throw InvalidInput("checkpoint has neither weights nor a path");
  model.copy_matching_parameters(Seq2SeqModel::load(checkpoint.path));
}

std::vector<std::string> important_words(const TokenizedInstance& instance,
                                         const ExplanationSelection& selection) {
  if (selection.empty()) throw InvalidInput("prompt baseline needs a nonempty selection");
  std::set<int> word_ids;
  for (int t : selection.token_indices()) {
    const int w = instance.word_of(t);
    if (w < 0) throw InvalidInput("selected token outside the instance");
    word_ids.insert(w);
  }
  std::vector<std::string> words;
  std::set<std::string> seen;
  for (int w : word_ids) {
    if (seen.insert(instance.word_map[w].word).second) words.push_back(instance.word_map[w].word);
  }
  return words;
}

std::string prompt_suffix(const std::vector<std::string>& words) {
  return "The most important tokens are: " + text::join(words, ", ");
}

std::string format_prompt_baseline(const TokenizedInstance& instance,
                                   const ExplanationSelection& selection) {
  const std::vector<std::string> words = important_words(instance, selection);
  std::vector<std::string> input;
  for (const auto& w : instance.word_map) input.push_back(w.word);
  return text::join(input, " ") + " " + prompt_suffix(words);
}

}  // namespace graphnle
