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

#ifndef GRAPHNLE_CONFIG_H_
#define GRAPHNLE_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphnle/common.h"
#include "graphnle/dataset.h"
#include "graphnle/gnn.h"
#include "graphnle/trainer.h"

namespace graphnle {

enum class ModelKind { kBase, kPrompt, kGnn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

// Configuration failure carrying every violation found, one per entry.
class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ExperimentConfig {
  Task task = Task::kNli;
  ExplanationType explanation = ExplanationType::kTokenInteraction;
  ModelKind model = ModelKind::kGnn;
  gnn::Variant gnn_variant = gnn::Variant::kSage;
  gnn::Activation gnn_activation = gnn::Activation::kRelu;
  int gnn_after_layer = 0;  // 0: three-quarter depth.

  // Paths are absolute after validation; relative entries resolve against
  // the configuration file's directory.
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string output_dir;
  std::string snapshots_dir;    // Default: <output_dir>/snapshots.
  std::string graphs_dir;       // Default: <output_dir>/graphs.
  std::string checkpoints_dir;  // Default: <output_dir>/checkpoints.
  std::string reports_dir;      // Default: <output_dir>/reports.
  std::string manifest_path;    // Default: <output_dir>/manifest.json.
  std::string base_checkpoint;  // Optional fine-tuned base model.
  std::string adjectives_path;  // Default: shipped adjective list.
  std::string nouns_path;       // Default: shipped noun lexicon.

  double learning_rate = 3e-4;
  int beam = 3;
  double k_percent = kDefaultTopPercent;
  std::optional<int> epochs;      // Required by the train stage.
  std::optional<int> batch_size;  // Required by the train stage.
  double weight_decay = 0.01;
  int max_decode_tokens = 48;
  std::vector<uint64_t> seeds{1};

  int hidden = 32;
  int ff = 128;
  int heads = 4;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int max_input_tokens = 96;
  int max_target_tokens = 48;

  int base_epochs = 5;  // Used when extract has to fine-tune the base model.
  int perturb_positions = 4;
  int perturb_candidates = 4;
  uint64_t perturb_seed = 13;
  int eval_limit = 0;  // 0: every test instance.
  bool semantic = true;

  // Training options for one seed. Throws ConfigError when epochs or
  // batch_size are missing.
  TrainConfig train_config(uint64_t seed) const;
  // Canonical key = value text; stable across runs for hashing.
  std::string canonical() const;
};

// Reads `key = value` lines (`#` starts a comment).
std::map<std::string, std::string> parse_key_values(const std::string& content);

// Parses, fills defaults and validates. Throws ConfigError listing every
// violation.
ExperimentConfig parse_config(const std::string& content, const std::string& base_dir);
ExperimentConfig validate_config(const std::string& path);

}  // namespace graphnle

#endif  // GRAPHNLE_CONFIG_H_
