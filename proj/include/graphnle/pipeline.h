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

#ifndef GRAPHNLE_PIPELINE_H_
#define GRAPHNLE_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "graphnle/config.h"
#include "graphnle/faithfulness.h"
#include "graphnle/model.h"
#include "graphnle/tokenizer.h"

namespace graphnle {

enum class Stage { kExtract, kBuildGraphs, kTrain, kEvaluate, kReport };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

// A stage ran before the artifacts it depends on exist.
class MissingArtifact : public std::runtime_error {
 public:
  MissingArtifact(Stage needed, const std::string& detail);
  Stage needed() const { return needed_; }

 private:
  Stage needed_;
};

// Lowercase hex SHA-1 of "blob <size>\0<content>", as git hashes objects.
std::string git_blob_hash(std::string_view content);

// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

// Record of completed stages: config snapshot, input hash, timing and
// metrics per stage.
class RunManifest {
 public:
  static RunManifest load(const std::string& path);  // Empty when absent.
  void save(const std::string& path) const;

  std::optional<std::string> input_hash(Stage stage) const;
  void record(Stage stage, const std::string& config_text, const std::string& input_hash,
              double seconds, const nlohmann::json& metrics);
  const nlohmann::json& data() const { return data_; }

 private:
  nlohmann::json data_ = nlohmann::json::object();
};

// Explanation sets of `snapshot` reduced to the top `k_percent` of `type`.
ExplanationSelection selection_from_snapshot(const AttentionSnapshot& snapshot,
                                             ExplanationType type, double k_percent);

// Base model -> attention snapshot -> explanation sets -> top-k selection ->
// graph, for one input at a time.
class GraphPipeline {
 public:
  GraphPipeline(Seq2SeqModel& base, ExplanationType type, double k_percent)
      : base_(base), type_(type), k_percent_(k_percent) {}

  ExplanationSelection select(const TokenizedInstance& instance) const;
  ExplanationGraph graph(const TokenizedInstance& instance) const;

 private:
  Seq2SeqModel& base_;
  ExplanationType type_;
  double k_percent_;
};

// Appends the prompt-baseline suffix to part B and re-tokenizes.
TokenizedInstance prompt_instance(const RawRecord& reformulated, const TokenizedInstance& instance,
                                  const ExplanationSelection& selection, Task task,
                                  const WordPieceTokenizer& tokenizer,
                                  const TokenizeOptions& options);

struct RunOptions {
  std::optional<uint64_t> seed;  // Replaces the configured seed list.
  bool force = false;
  bool plots = false;
};

struct StageResult {
  bool skipped = false;
  double seconds = 0.0;
  nlohmann::json metrics = nlohmann::json::object();
};

class Pipeline {
 public:
  Pipeline(ExperimentConfig config, RunOptions options, std::ostream& log);

  const ExperimentConfig& config() const { return config_; }
  StageResult run(Stage stage);
  // Hash over the canonical config, input files and upstream stage hashes.
  std::string stage_input_hash(Stage stage) const;

 private:
  nlohmann::json extract();
  nlohmann::json build_graphs();
  nlohmann::json train();
  nlohmann::json evaluate();
  nlohmann::json report();

  ExperimentConfig config_;
  RunOptions options_;
  std::ostream& log_;
};

// Runs one CLI stage. Returns 0 on success, 1 when the stage fails and 2 for
// usage or configuration errors; diagnostics go to `err`.
int dispatch(std::string_view command, const std::string& config_path,
             const RunOptions& options, std::ostream& out, std::ostream& err);

// Writes a small train/dev/test corpus and a matching configuration file.
void write_toy_experiment(const std::string& dir, int train_size, uint64_t seed);

}  // namespace graphnle

#endif  // GRAPHNLE_PIPELINE_H_
