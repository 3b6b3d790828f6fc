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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "graphnle/pipeline.h"

// Runs one pipeline stage from an experiment configuration file.
int main(int argc, char** argv) {
  CLI::App app{"Graph-guided explanation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  bool force = false;
  bool plots = false;

  const char* stages[][2] = {
      {"extract", "Tokenize, fine-tune the base model if needed, capture attention snapshots"},
      {"build-graphs", "Build explanation graphs from snapshots"},
      {"train", "Fine-tune the configured model for every seed"},
      {"evaluate", "Accuracy, similarity and counterfactual faithfulness"},
      {"report", "Aggregate evaluation results into one report"},
  };
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment configuration file")->required();
    sub->add_option("--seed", seed, "Run a single seed instead of the configured list");
    sub->add_flag("--force", force, "Rerun even when inputs are unchanged");
    if (std::string(name) == "report") sub->add_flag("--plots", plots, "Also write metrics.svg");
  }

  std::string toy_dir;
  int toy_size = 200;
  uint64_t toy_seed = 7;
  CLI::App* toy = app.add_subcommand("generate-toy", "Write a synthetic NLI experiment");
  toy->add_option("--out", toy_dir, "Output directory")->required();
  toy->add_option("--size", toy_size, "Training records")->check(CLI::PositiveNumber);
  toy->add_option("--seed", toy_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == toy) {
    try {
      graphnle::write_toy_experiment(toy_dir, toy_size, toy_seed);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    std::cout << "wrote " << toy_dir << "/experiment.cfg\n";
    return 0;
  }
  graphnle::RunOptions options;
  options.seed = seed;
  options.force = force;
  options.plots = plots;
  return graphnle::dispatch(chosen->get_name(), config_path, options, std::cout, std::cerr);
}
