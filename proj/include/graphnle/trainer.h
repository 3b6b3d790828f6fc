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

#ifndef GRAPHNLE_TRAINER_H_
#define GRAPHNLE_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphnle/dataset.h"
#include "graphnle/graph.h"
#include "graphnle/model.h"
#include "graphnle/tokenizer.h"

namespace graphnle {

struct TrainConfig {
  double learning_rate = 3e-4;
  int beam = 3;
  double k_percent = kDefaultTopPercent;
  int epochs = 0;
  int batch_size = 8;
  uint64_t seed = 0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_decode_tokens = 48;
  std::string checkpoint_dir;  // Empty: keep checkpoints in memory only.

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LossReduction { kSum, kTokenMean };

// -sum_t log P(target_t) where row t of `step_probs` is the model's
// distribution at step t. Targets < 0 are padding and skipped. kTokenMean
// divides by the number of non-padding targets.
double sequence_loss(const Matrix& step_probs, const std::vector<int>& target,
                     LossReduction reduction = LossReduction::kSum);

// Mean over the batch of per-sequence summed losses.
double batch_sequence_loss(const std::vector<Matrix>& step_probs,
                           const std::vector<std::vector<int>>& targets);

// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(const TrainConfig& config) : config_(config) {}
  void step(ParameterStore& params);

 private:
  TrainConfig config_;
  int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

using GraphMap = std::unordered_map<std::string, ExplanationGraph>;

struct FitData {
  std::vector<TokenizedInstance> train;
  std::vector<TokenizedInstance> dev;
  std::vector<std::vector<std::string>> dev_references;  // One set per dev instance.
  GraphMap graphs;                                       // Required for GNN models.
};

struct Checkpoint {
  int epoch = 0;  // 1-based.
  double train_loss = 0.0;
  double dev_bleu = 0.0;
  double gnn_grad_norm = 0.0;  // Largest GNN gradient norm seen in the epoch.
  std::string path;            // Set when a checkpoint directory is configured.
  std::vector<Matrix> weights;
};

using CheckpointSeries = std::vector<Checkpoint>;

struct GenerationOutput {
  std::string id;
  std::string label;
  std::string nle;
  std::string text;
  bool flagged = false;  // Empty output or no label delimiter.
};

// Splits "label. explanation" at the first ". " (or a final "."). Without a
// delimiter the whole string becomes the label and the output is flagged.
GenerationOutput parse_generation(const std::string& id, const std::string& decoded);

struct GenerateOptions {
  int beam = 3;
  int max_tokens = 48;
};

// Beam search with length-normalised scores; beam == 1 is greedy.
GenerationOutput generate(const Seq2SeqModel& model, const WordPieceTokenizer& tokenizer,
                          const TokenizedInstance& instance, const ExplanationGraph* graph,
                          const GenerateOptions& options);

// One checkpoint (and dev BLEU) per epoch.
CheckpointSeries fit(Seq2SeqModel& model, const WordPieceTokenizer& tokenizer,
                     const FitData& data, const TrainConfig& config,
                     const std::function<void(const Checkpoint&)>& on_epoch = {});

// Highest dev BLEU, earliest epoch on ties.
const Checkpoint& select_checkpoint(const CheckpointSeries& series);
void restore_checkpoint(Seq2SeqModel& model, const Checkpoint& checkpoint);

// Whole words containing selected tokens, deduplicated, in input order.
std::vector<std::string> important_words(const TokenizedInstance& instance,
                                         const ExplanationSelection& selection);
std::string prompt_suffix(const std::vector<std::string>& words);
// Input words followed by " The most important tokens are: w1, w2, ...".
std::string format_prompt_baseline(const TokenizedInstance& instance,
                                   const ExplanationSelection& selection);

}  // namespace graphnle

#endif  // GRAPHNLE_TRAINER_H_
