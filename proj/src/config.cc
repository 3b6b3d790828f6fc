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

#include "graphnle/config.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "graphnle/text.h"

namespace graphnle {

namespace fs = std::filesystem;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBase:
      return "base";
    case ModelKind::kPrompt:
      return "prompt";
    case ModelKind::kGnn:
      return "gnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "base") return ModelKind::kBase;
  if (name == "prompt") return ModelKind::kPrompt;
  if (name == "gnn") return ModelKind::kGnn;
  throw InvalidInput("unknown model '" + std::string(name) + "' (valid: base, prompt, gnn)");
}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : InvalidInput(join_violations(violations)), violations_(std::move(violations)) {}

std::map<std::string, std::string> parse_key_values(const std::string& content) {
  std::map<std::string, std::string> out;
  std::vector<std::string> violations;
  std::istringstream in(content);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      violations.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = text::trim(line.substr(0, eq));
    const std::string value = text::trim(line.substr(eq + 1));
    if (key.empty()) {
      violations.push_back("line " + std::to_string(line_no) + ": empty key");
    } else if (!out.emplace(key, value).second) {
      violations.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  // Applies `fn` to the value of `key` when present; exceptions become
  // violations prefixed with the key.
  void read(const std::string& key, const std::function<void(const std::string&)>& fn) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    used_.push_back(key);
    try {
      fn(it->second);
    } catch (const std::exception& e) {
      violations_.push_back(key + ": " + e.what());
    }
  }

  void integer(const std::string& key, int& out, int min_value) {
    read(key, [&](const std::string& v) {
      out = parse_int(v);
      if (out < min_value) {
        throw InvalidInput("must be >= " + std::to_string(min_value) + ", got " + v);
      }
    });
  }

  void real(const std::string& key, double& out) {
    read(key, [&](const std::string& v) { out = parse_real(v); });
  }

  static int parse_int(const std::string& v) {
    size_t used = 0;
    int out = 0;
    try {
      out = std::stoi(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw InvalidInput("not an integer: '" + v + "'");
    return out;
  }

  static double parse_real(const std::string& v) {
    size_t used = 0;
    double out = 0;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw InvalidInput("not a number: '" + v + "'");
    return out;
  }

  void violation(std::string message) { violations_.push_back(std::move(message)); }

  void finish() {
    for (const auto& [key, value] : values_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        violations_.push_back("unknown key '" + key + "'");
      }
    }
    if (!violations_.empty()) throw ConfigError(violations_);
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> used_;
  std::vector<std::string> violations_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_relative()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

}  // namespace

TrainConfig ExperimentConfig::train_config(uint64_t seed) const {
  std::vector<std::string> missing;
  if (!epochs) missing.push_back("epochs: required by the train stage");
  if (!batch_size) missing.push_back("batch_size: required by the train stage");
  if (!missing.empty()) throw ConfigError(missing);
  TrainConfig c;
  c.learning_rate = learning_rate;
  c.beam = beam;
  c.k_percent = k_percent;
  c.epochs = *epochs;
  c.batch_size = *batch_size;
  c.seed = seed;
  c.weight_decay = weight_decay;
  c.max_decode_tokens = max_decode_tokens;
  return c;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out.precision(12);
  out << "task = " << to_string(task) << '\n'
      << "explanation_type = " << to_string(explanation) << '\n'
      << "model = " << to_string(model) << '\n'
      << "gnn_variant = " << gnn::to_string(gnn_variant) << '\n'
      << "gnn_activation = " << gnn::to_string(gnn_activation) << '\n'
      << "gnn_after_layer = " << gnn_after_layer << '\n'
      << "train_path = " << train_path << '\n'
      << "dev_path = " << dev_path << '\n'
      << "test_path = " << test_path << '\n'
      << "output_dir = " << output_dir << '\n'
      << "snapshots_dir = " << snapshots_dir << '\n'
      << "graphs_dir = " << graphs_dir << '\n'
      << "checkpoints_dir = " << checkpoints_dir << '\n'
      << "reports_dir = " << reports_dir << '\n'
      << "manifest_path = " << manifest_path << '\n'
      << "base_checkpoint = " << base_checkpoint << '\n'
      << "adjectives_path = " << adjectives_path << '\n'
      << "nouns_path = " << nouns_path << '\n'
      << "learning_rate = " << learning_rate << '\n'
      << "beam = " << beam << '\n'
      << "k_percent = " << k_percent << '\n'
      << "epochs = " << (epochs ? std::to_string(*epochs) : "") << '\n'
      << "batch_size = " << (batch_size ? std::to_string(*batch_size) : "") << '\n'
      << "weight_decay = " << weight_decay << '\n'
      << "max_decode_tokens = " << max_decode_tokens << '\n';
  std::vector<std::string> seed_text;
  for (uint64_t s : seeds) seed_text.push_back(std::to_string(s));
  out << "seeds = " << text::join(seed_text, ", ") << '\n'
      << "hidden = " << hidden << '\n'
      << "ff = " << ff << '\n'
      << "heads = " << heads << '\n'
      << "encoder_layers = " << encoder_layers << '\n'
      << "decoder_layers = " << decoder_layers << '\n'
      << "max_input_tokens = " << max_input_tokens << '\n'
      << "max_target_tokens = " << max_target_tokens << '\n'
      << "base_epochs = " << base_epochs << '\n'
      << "perturb_positions = " << perturb_positions << '\n'
      << "perturb_candidates = " << perturb_candidates << '\n'
      << "perturb_seed = " << perturb_seed << '\n'
      << "eval_limit = " << eval_limit << '\n'
      << "semantic = " << (semantic ? "true" : "false") << '\n';
  return out.str();
}

ExperimentConfig parse_config(const std::string& content, const std::string& base_dir) {
  Reader r(parse_key_values(content));
  ExperimentConfig c;

  r.read("task", [&](const std::string& v) { c.task = parse_task(v); });
  r.read("explanation_type",
         [&](const std::string& v) { c.explanation = parse_explanation_type(v); });
  r.read("model", [&](const std::string& v) { c.model = parse_model_kind(v); });
  r.read("gnn_variant", [&](const std::string& v) { c.gnn_variant = gnn::parse_variant(v); });
  r.read("gnn_activation",
         [&](const std::string& v) { c.gnn_activation = gnn::parse_activation(v); });
  r.integer("gnn_after_layer", c.gnn_after_layer, 0);

  const std::pair<const char*, std::string*> paths[] = {
      {"train_path", &c.train_path},         {"dev_path", &c.dev_path},
      {"test_path", &c.test_path},           {"output_dir", &c.output_dir},
      {"snapshots_dir", &c.snapshots_dir},   {"graphs_dir", &c.graphs_dir},
      {"checkpoints_dir", &c.checkpoints_dir}, {"reports_dir", &c.reports_dir},
      {"manifest_path", &c.manifest_path},   {"base_checkpoint", &c.base_checkpoint},
      {"adjectives_path", &c.adjectives_path}, {"nouns_path", &c.nouns_path},
  };
  for (const auto& [key, field] : paths) {
    r.read(key, [&, field = field](const std::string& v) { *field = resolve(base_dir, v); });
  }

  r.real("learning_rate", c.learning_rate);
  r.integer("beam", c.beam, 1);
  r.real("k_percent", c.k_percent);
  r.read("epochs", [&](const std::string& v) { c.epochs = Reader::parse_int(v); });
  r.read("batch_size", [&](const std::string& v) { c.batch_size = Reader::parse_int(v); });
  r.real("weight_decay", c.weight_decay);
  r.integer("max_decode_tokens", c.max_decode_tokens, 1);
  r.read("seeds", [&](const std::string& v) {
    c.seeds.clear();
    for (const auto& part : text::split(v, ',')) {
      const std::string s = text::trim(part);
      size_t used = 0;
      long long value = -1;
      try {
        value = std::stoll(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (s.empty() || used != s.size() || value < 0) {
        throw InvalidInput("seeds must be nonnegative integers, got '" + s + "'");
      }
      c.seeds.push_back(static_cast<uint64_t>(value));
    }
  });
  r.integer("hidden", c.hidden, 1);
  r.integer("ff", c.ff, 1);
  r.integer("heads", c.heads, 1);
  r.integer("encoder_layers", c.encoder_layers, 1);
  r.integer("decoder_layers", c.decoder_layers, 1);
  r.integer("max_input_tokens", c.max_input_tokens, 0);
  r.integer("max_target_tokens", c.max_target_tokens, 0);
  r.integer("base_epochs", c.base_epochs, 1);
  r.integer("perturb_positions", c.perturb_positions, 1);
  r.integer("perturb_candidates", c.perturb_candidates, 1);
  r.read("perturb_seed", [&](const std::string& v) {
    const int s = Reader::parse_int(v);
    if (s < 0) throw InvalidInput("must be >= 0, got " + v);
    c.perturb_seed = static_cast<uint64_t>(s);
  });
  r.integer("eval_limit", c.eval_limit, 0);
  r.read("semantic", [&](const std::string& v) {
    if (v == "true") {
      c.semantic = true;
    } else if (v == "false") {
      c.semantic = false;
    } else {
      throw InvalidInput("expected true or false, got '" + v + "'");
    }
  });

  if (!(c.k_percent > 0.0 && c.k_percent <= 100.0)) {
    r.violation("k_percent: must be in (0, 100], got " + std::to_string(c.k_percent));
  }
  if (!(c.learning_rate > 0.0)) r.violation("learning_rate: must be > 0");
  if (c.weight_decay < 0.0) r.violation("weight_decay: must be >= 0");
  if (c.epochs && *c.epochs < 0) r.violation("epochs: must be >= 0");
  if (c.batch_size && *c.batch_size < 1) r.violation("batch_size: must be >= 1");
  if (c.seeds.empty()) r.violation("seeds: at least one seed is required");
  if (c.hidden % c.heads != 0) r.violation("hidden: must be divisible by heads");
  if (c.gnn_after_layer > c.encoder_layers) {
    r.violation("gnn_after_layer: must be <= encoder_layers");
  }

  if (c.train_path.empty()) r.violation("train_path: required");
  if (c.dev_path.empty()) r.violation("dev_path: required");
  if (c.output_dir.empty()) r.violation("output_dir: required");
  for (const auto& [key, path] : {std::pair<const char*, const std::string*>{"train_path", &c.train_path},
                                  {"dev_path", &c.dev_path},
                                  {"test_path", &c.test_path},
                                  {"base_checkpoint", &c.base_checkpoint},
                                  {"adjectives_path", &c.adjectives_path},
                                  {"nouns_path", &c.nouns_path}}) {
    if (!path->empty() && !fs::exists(*path)) r.violation(std::string(key) + ": no such file " + *path);
  }
  r.finish();

  if (c.test_path.empty()) c.test_path = c.dev_path;
  const fs::path out(c.output_dir);
  if (c.snapshots_dir.empty()) c.snapshots_dir = (out / "snapshots").string();
  if (c.graphs_dir.empty()) c.graphs_dir = (out / "graphs").string();
  if (c.checkpoints_dir.empty()) c.checkpoints_dir = (out / "checkpoints").string();
  if (c.reports_dir.empty()) c.reports_dir = (out / "reports").string();
  if (c.manifest_path.empty()) c.manifest_path = (out / "manifest.json").string();
  if (c.adjectives_path.empty()) c.adjectives_path = GRAPHNLE_DATA_DIR "/adjectives.txt";
  if (c.nouns_path.empty()) c.nouns_path = GRAPHNLE_DATA_DIR "/nouns.txt";
  return c;
}

ExperimentConfig validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read configuration file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  return parse_config(buffer.str(), parent.string());
}

}  // namespace graphnle
