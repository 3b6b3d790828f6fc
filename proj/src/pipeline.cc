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

#include "graphnle/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "graphnle/metrics.h"
#include "graphnle/synthetic.h"
#include "graphnle/text.h"

namespace graphnle {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kExtract:
      return "extract";
    case Stage::kBuildGraphs:
      return "build-graphs";
    case Stage::kTrain:
      return "train";
    case Stage::kEvaluate:
      return "evaluate";
    case Stage::kReport:
      return "report";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::kExtract, Stage::kBuildGraphs, Stage::kTrain, Stage::kEvaluate,
                  Stage::kReport}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidInput("unknown command '" + std::string(name) +
                     "' (valid: extract, build-graphs, train, evaluate, report)");
}

MissingArtifact::MissingArtifact(Stage needed, const std::string& detail)
    : std::runtime_error(detail + "; run '" + std::string(to_string(needed)) + "' first"),
      needed_(needed) {}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, target);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

RunManifest RunManifest::load(const std::string& path) {
  RunManifest m;
  if (!fs::exists(path)) return m;
  try {
    m.data_ = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("corrupt manifest " + path + ": " + e.what());
  }
  return m;
}

void RunManifest::save(const std::string& path) const {
  write_file_atomic(path, data_.dump(2) + "\n");
}

std::optional<std::string> RunManifest::input_hash(Stage stage) const {
  const std::string key(to_string(stage));
  if (!data_.contains("stages") || !data_["stages"].contains(key)) return std::nullopt;
  return data_["stages"][key].value("input_hash", std::string());
}

void RunManifest::record(Stage stage, const std::string& config_text,
                         const std::string& input_hash, double seconds, const json& metrics) {
  data_["config"] = config_text;
  data_["stages"][std::string(to_string(stage))] = {{"input_hash", input_hash},
                                                    {"seconds", seconds},
                                                    {"finished_at", utc_timestamp()},
                                                    {"metrics", metrics}};
}

ExplanationSelection selection_from_snapshot(const AttentionSnapshot& snapshot,
                                             ExplanationType type, double k_percent) {
  return select_explanations(extract_explanations(snapshot), type, k_percent);
}

ExplanationSelection GraphPipeline::select(const TokenizedInstance& instance) const {
  return selection_from_snapshot(capture_snapshot(base_, instance), type_, k_percent_);
}

ExplanationGraph GraphPipeline::graph(const TokenizedInstance& instance) const {
  return build_graph(select(instance), instance);
}

TokenizedInstance prompt_instance(const RawRecord& reformulated, const TokenizedInstance& instance,
                                  const ExplanationSelection& selection, Task task,
                                  const WordPieceTokenizer& tokenizer,
                                  const TokenizeOptions& options) {
  RawRecord r = reformulated;
  r.part_b += " " + prompt_suffix(important_words(instance, selection));
  return tokenize_instance(r, task, tokenizer, options);
}

namespace {

constexpr const char* kSplits[] = {"train", "dev", "test"};

// File-name-safe form of an instance id.
std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

struct Layout {
  const ExperimentConfig& c;

  fs::path vocab() const { return fs::path(c.snapshots_dir) / "vocab.txt"; }
  fs::path instances(const std::string& split) const {
    return fs::path(c.snapshots_dir) / "instances" / (split + ".jsonl");
  }
  fs::path base_dir() const { return fs::path(c.snapshots_dir) / "base"; }
  fs::path base_model() const { return base_dir() / "model.ckpt"; }
  fs::path snapshot(const std::string& split, const std::string& id) const {
    return fs::path(c.snapshots_dir) / split / (file_stem(id) + ".json");
  }
  fs::path graph(const std::string& split, const std::string& id) const {
    return fs::path(c.graphs_dir) / split / (file_stem(id) + ".graph");
  }
  fs::path seed_checkpoints(uint64_t seed) const {
    return fs::path(c.checkpoints_dir) / ("seed-" + std::to_string(seed));
  }
  fs::path best_model(uint64_t seed) const { return seed_checkpoints(seed) / "best.ckpt"; }
  fs::path seed_reports(uint64_t seed) const {
    return fs::path(c.reports_dir) / ("seed-" + std::to_string(seed));
  }
  fs::path metrics(uint64_t seed) const { return seed_reports(seed) / "metrics.json"; }
  fs::path report() const { return fs::path(c.reports_dir) / "report.json"; }
  fs::path plot() const { return fs::path(c.reports_dir) / "plots" / "metrics.svg"; }

  std::string split_path(const std::string& split) const {
    if (split == "train") return c.train_path;
    if (split == "dev") return c.dev_path;
    return c.test_path;
  }
};

std::vector<RawRecord> load_reformulated(const Layout& layout, const std::string& split) {
  std::vector<RawRecord> out;
  for (const auto& r : load_dataset(layout.split_path(split), layout.c.task)) {
    out.push_back(reformulate(r, layout.c.task));
  }
  return out;
}

std::vector<std::vector<std::string>> references_of(const std::vector<RawRecord>& records) {
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : records) refs.push_back(r.gold_nle);
  return refs;
}

TokenizeOptions tokenize_options(const ExperimentConfig& c) {
  TokenizeOptions o;
  o.max_input_tokens = c.max_input_tokens;
  o.max_target_tokens = c.max_target_tokens;
  return o;
}

WordPieceTokenizer load_tokenizer(const Layout& layout) {
  if (!fs::exists(layout.vocab())) {
    throw MissingArtifact(Stage::kExtract, "vocabulary " + layout.vocab().string() + " not found");
  }
  return WordPieceTokenizer(Vocabulary::load(layout.vocab().string()));
}

std::vector<TokenizedInstance> load_split_instances(const Layout& layout, const std::string& split) {
  const fs::path p = layout.instances(split);
  if (!fs::exists(p)) throw MissingArtifact(Stage::kExtract, "instances " + p.string() + " not found");
  return load_instances(p.string());
}

Seq2SeqModel load_base_model(const Layout& layout) {
  if (!fs::exists(layout.base_model())) {
    throw MissingArtifact(Stage::kExtract, "base model " + layout.base_model().string() + " not found");
  }
  return Seq2SeqModel::load(layout.base_model().string());
}

std::vector<std::string> labels_of(const std::vector<RawRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(text::to_lower(r.gold_label));
  return out;
}

json series_json(const CheckpointSeries& series) {
  json out = json::array();
  for (const auto& c : series) {
    out.push_back({{"epoch", c.epoch},
                   {"train_loss", c.train_loss},
                   {"dev_bleu", c.dev_bleu},
                   {"gnn_grad_norm", c.gnn_grad_norm},
                   {"path", c.path}});
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& title) {
  const int width = 80 * static_cast<int>(bars.size()) + 80;
  const int height = 320;
  const int base = 260;
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n"
      << "<line x1=\"50\" y1=\"" << base << "\" x2=\"" << width - 20 << "\" y2=\"" << base
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 25) {
    const double y = base - 2.0 * tick;
    svg << "<text x=\"44\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << tick << "</text>\n"
        << "<line x1=\"50\" y1=\"" << y << "\" x2=\"" << width - 20 << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
  }
  for (size_t i = 0; i < bars.size(); ++i) {
    const double value = std::clamp(bars[i].second, 0.0, 100.0);
    const double x = 70.0 + 80.0 * static_cast<double>(i);
    svg << "<rect x=\"" << x << "\" y=\"" << base - 2.0 * value << "\" width=\"50\" height=\""
        << 2.0 * value << "\" fill=\"#4c72b0\"/>\n"
        << "<text x=\"" << x + 25 << "\" y=\"" << base - 2.0 * value - 4
        << "\" text-anchor=\"middle\">" << bars[i].second << "</text>\n"
        << "<text x=\"" << x + 25 << "\" y=\"" << base + 16 << "\" text-anchor=\"middle\">"
        << bars[i].first << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config, RunOptions options, std::ostream& log)
    : config_(std::move(config)), options_(options), log_(log) {
  if (options_.seed) config_.seeds = {*options_.seed};
}

std::string Pipeline::stage_input_hash(Stage stage) const {
  std::string material = config_.canonical();
  material += "stage = " + std::string(to_string(stage)) + "\n";
  for (const std::string* path : {&config_.train_path, &config_.dev_path, &config_.test_path,
                                  &config_.base_checkpoint, &config_.adjectives_path,
                                  &config_.nouns_path}) {
    if (!path->empty() && fs::exists(*path)) material += git_blob_hash(read_file(*path)) + "\n";
  }
  if (stage == Stage::kReport) material += options_.plots ? "plots\n" : "\n";
  const RunManifest manifest = RunManifest::load(config_.manifest_path);
  std::vector<Stage> upstream;
  switch (stage) {
    case Stage::kExtract:
      break;
    case Stage::kBuildGraphs:
      upstream = {Stage::kExtract};
      break;
    case Stage::kTrain:
      upstream = {Stage::kExtract};
      if (config_.model == ModelKind::kGnn) upstream.push_back(Stage::kBuildGraphs);
      break;
    case Stage::kEvaluate:
      upstream = {Stage::kTrain};
      break;
    case Stage::kReport:
      upstream = {Stage::kEvaluate};
      break;
  }
  for (Stage s : upstream) material += manifest.input_hash(s).value_or("missing") + "\n";
  return git_blob_hash(material);
}

StageResult Pipeline::run(Stage stage) {
  const char* device = std::getenv("GRAPHNLE_DEVICE");
  if (device != nullptr && std::string(device) != "cpu") {
    throw InvalidInput("unsupported device '" + std::string(device) +
                       "' in GRAPHNLE_DEVICE (valid: cpu)");
  }
  const Layout layout{config_};
  const std::string hash = stage_input_hash(stage);
  bool outputs_present = false;
  switch (stage) {
    case Stage::kExtract:
      outputs_present = fs::exists(layout.base_model());
      break;
    case Stage::kBuildGraphs:
      outputs_present = fs::exists(config_.graphs_dir);
      break;
    case Stage::kTrain:
      outputs_present = std::all_of(config_.seeds.begin(), config_.seeds.end(),
                                    [&](uint64_t s) { return fs::exists(layout.best_model(s)); });
      break;
    case Stage::kEvaluate:
      outputs_present = std::all_of(config_.seeds.begin(), config_.seeds.end(),
                                    [&](uint64_t s) { return fs::exists(layout.metrics(s)); });
      break;
    case Stage::kReport:
      outputs_present = fs::exists(layout.report());
      break;
  }
  StageResult result;
  if (!options_.force && outputs_present &&
      RunManifest::load(config_.manifest_path).input_hash(stage) == hash) {
    log_ << to_string(stage) << ": inputs unchanged, nothing to do (use --force to rerun)\n";
    result.skipped = true;
    return result;
  }

  const auto start = std::chrono::steady_clock::now();
  switch (stage) {
    case Stage::kExtract:
      result.metrics = extract();
      break;
    case Stage::kBuildGraphs:
      result.metrics = build_graphs();
      break;
    case Stage::kTrain:
      result.metrics = train();
      break;
    case Stage::kEvaluate:
      result.metrics = evaluate();
      break;
    case Stage::kReport:
      result.metrics = report();
      break;
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunManifest manifest = RunManifest::load(config_.manifest_path);
  manifest.record(stage, config_.canonical(), hash, result.seconds, result.metrics);
  manifest.save(config_.manifest_path);
  log_ << to_string(stage) << ": done in " << std::fixed << std::setprecision(2) << result.seconds
       << " s\n";
  return result;
}

json Pipeline::extract() {
  const Layout layout{config_};
  std::map<std::string, std::vector<RawRecord>> records;
  std::vector<std::string> texts;
  for (const char* split : kSplits) {
    records[split] = load_reformulated(layout, split);
    for (const auto& r : records[split]) {
      texts.push_back(input_text(r));
      texts.push_back(target_text(r, config_.task));
      for (const auto& nle : r.gold_nle) texts.push_back(nle);
    }
  }
  if (records["train"].empty()) throw InvalidInput("training split is empty");
  texts.push_back(text::join(AdjectiveLexicon::load(config_.adjectives_path).words, " "));
  texts.push_back(prompt_suffix({}));

  fs::create_directories(config_.snapshots_dir);
  const Vocabulary vocab = build_vocabulary(texts);
  vocab.save(layout.vocab().string());
  const WordPieceTokenizer tokenizer(vocab);

  std::map<std::string, std::vector<TokenizedInstance>> instances;
  int longest = 0;
  for (const char* split : kSplits) {
    for (const auto& r : records[split]) {
      instances[split].push_back(tokenize_instance(r, config_.task, tokenizer, tokenize_options(config_)));
      longest = std::max(longest, instances[split].back().size());
    }
    fs::create_directories(layout.instances(split).parent_path());
    save_instances(layout.instances(split).string(), instances[split]);
  }

  json metrics = {{"vocab_size", vocab.size()}};
  std::optional<Seq2SeqModel> base;
  if (!config_.base_checkpoint.empty()) {
    base = Seq2SeqModel::load(config_.base_checkpoint);
    if (base->config().vocab_size != vocab.size()) {
      throw InvalidInput("base checkpoint vocabulary size " +
                         std::to_string(base->config().vocab_size) + " does not match " +
                         std::to_string(vocab.size()));
    }
    if (base->has_gnn()) throw InvalidInput("base checkpoint must not contain a GNN layer");
  } else {
    ModelConfig mc = ModelConfig::toy(vocab.size());
    mc.hidden = config_.hidden;
    mc.ff = config_.ff;
    mc.heads = config_.heads;
    mc.encoder_layers = config_.encoder_layers;
    mc.decoder_layers = config_.decoder_layers;
    mc.max_positions = std::max({128, longest + 64, config_.max_target_tokens + 2});
    base.emplace(mc, config_.seeds.front());

    TrainConfig tc;
    tc.learning_rate = config_.learning_rate;
    tc.beam = config_.beam;
    tc.epochs = config_.base_epochs;
    tc.batch_size = config_.batch_size.value_or(8);
    tc.seed = config_.seeds.front();
    tc.weight_decay = config_.weight_decay;
    tc.max_decode_tokens = config_.max_decode_tokens;
    tc.checkpoint_dir = layout.base_dir().string();
    FitData data;
    data.train = instances["train"];
    data.dev = instances["dev"];
    data.dev_references = references_of(records["dev"]);
    log_ << "extract: fine-tuning the base model for " << tc.epochs << " epochs\n";
    const CheckpointSeries series = fit(*base, tokenizer, data, tc, [&](const Checkpoint& c) {
      log_ << "  base epoch " << c.epoch << " loss " << c.train_loss << " dev BLEU " << c.dev_bleu
           << "\n";
    });
    const Checkpoint& best = select_checkpoint(series);
    restore_checkpoint(*base, best);
    metrics["base_series"] = series_json(series);
    metrics["base_best_epoch"] = best.epoch;
  }
  base->save(layout.base_model().string());

  int degenerate = 0;
  for (const char* split : kSplits) {
    fs::create_directories(fs::path(config_.snapshots_dir) / split);
    for (const auto& inst : instances[split]) {
      const AttentionSnapshot snapshot = capture_snapshot(*base, inst);
      if (select_head(snapshot).degenerate) ++degenerate;
      save_snapshot(layout.snapshot(split, inst.id).string(), snapshot);
    }
    metrics["instances"][split] = instances[split].size();
  }
  metrics["degenerate_head_selections"] = degenerate;
  return metrics;
}

json Pipeline::build_graphs() {
  const Layout layout{config_};
  json metrics = json::object();
  for (const char* split : kSplits) {
    const std::vector<TokenizedInstance> instances = load_split_instances(layout, split);
    fs::create_directories(fs::path(config_.graphs_dir) / split);
    double edges = 0.0;
    for (const auto& inst : instances) {
      const fs::path sp = layout.snapshot(split, inst.id);
      if (!fs::exists(sp)) throw MissingArtifact(Stage::kExtract, "snapshot " + sp.string() + " not found");
      const ExplanationSelection selection =
          selection_from_snapshot(load_snapshot(sp.string()), config_.explanation, config_.k_percent);
      const ExplanationGraph graph = build_graph(selection, inst);
      edges += static_cast<double>(graph.edges.size());
      save_graph(layout.graph(split, inst.id).string(), graph);
    }
    metrics[split] = {{"graphs", instances.size()},
                      {"mean_edges", instances.empty() ? 0.0 : edges / instances.size()}};
  }
  return metrics;
}

json Pipeline::train() {
  const Layout layout{config_};
  const WordPieceTokenizer tokenizer = load_tokenizer(layout);
  const Seq2SeqModel base = load_base_model(layout);
  ModelConfig template_config = base.config();
  template_config.gnn.reset();

  FitData data;
  const std::vector<RawRecord> dev_records = load_reformulated(layout, "dev");
  data.train = load_split_instances(layout, "train");
  data.dev = load_split_instances(layout, "dev");
  data.dev_references = references_of(dev_records);

  if (config_.model == ModelKind::kGnn) {
    for (const char* split : {"train", "dev"}) {
      const std::vector<TokenizedInstance>& insts = std::string(split) == "train" ? data.train : data.dev;
      for (const auto& inst : insts) {
        const fs::path gp = layout.graph(split, inst.id);
        if (!fs::exists(gp)) {
          throw MissingArtifact(Stage::kBuildGraphs, "graph " + gp.string() + " not found");
        }
        ExplanationGraph g = load_graph(gp.string());
        if (g.type != config_.explanation) {
          throw MissingArtifact(Stage::kBuildGraphs,
                                "graph " + gp.string() + " has explanation type " +
                                    std::string(to_string(g.type)));
        }
        data.graphs[inst.id] = std::move(g);
      }
    }
  } else if (config_.model == ModelKind::kPrompt) {
    const std::vector<RawRecord> train_records = load_reformulated(layout, "train");
    for (auto [split, insts, recs] :
         {std::tuple{"train", &data.train, &train_records}, std::tuple{"dev", &data.dev, &dev_records}}) {
      for (size_t i = 0; i < insts->size(); ++i) {
        const fs::path sp = layout.snapshot(split, (*insts)[i].id);
        if (!fs::exists(sp)) throw MissingArtifact(Stage::kExtract, "snapshot " + sp.string() + " not found");
        const ExplanationSelection sel =
            selection_from_snapshot(load_snapshot(sp.string()), config_.explanation, config_.k_percent);
        (*insts)[i] = prompt_instance((*recs)[i], (*insts)[i], sel, config_.task, tokenizer,
                                      tokenize_options(config_));
      }
    }
  }

  json metrics = json::object();
  for (uint64_t seed : config_.seeds) {
    TrainConfig tc = config_.train_config(seed);
    tc.checkpoint_dir = layout.seed_checkpoints(seed).string();
    Seq2SeqModel fresh(template_config, seed);
    Seq2SeqModel model = fresh;
    if (config_.model == ModelKind::kGnn) {
      const gnn::InsertionConfig ins =
          config_.gnn_after_layer > 0
              ? gnn::InsertionConfig{template_config.encoder_layers, config_.gnn_after_layer, 1}
              : gnn::InsertionConfig::three_quarter_depth(template_config.encoder_layers);
      gnn::GnnParameters<double> params =
          gnn::GnnParameters<double>::initialized(config_.gnn_variant, template_config.hidden, seed);
      params.activation = config_.gnn_activation;
      model = insert_gnn_layer(fresh, ins, params);
    }
    log_ << "train: seed " << seed << ", " << to_string(config_.model) << " model, "
         << count_parameters(model.config()) << " parameters\n";
    const CheckpointSeries series = fit(model, tokenizer, data, tc, [&](const Checkpoint& c) {
      log_ << "  epoch " << c.epoch << " loss " << c.train_loss << " dev BLEU " << c.dev_bleu
           << "\n";
    });
    json entry = {{"series", series_json(series)}, {"parameters", count_parameters(model.config())}};
    if (!series.empty()) {
      const Checkpoint& best = select_checkpoint(series);
      restore_checkpoint(model, best);
      entry["best_epoch"] = best.epoch;
      entry["best_dev_bleu"] = best.dev_bleu;
    }
    fs::create_directories(layout.seed_checkpoints(seed));
    model.save(layout.best_model(seed).string());
    write_file_atomic((layout.seed_checkpoints(seed) / "series.json").string(), entry.dump(2) + "\n");
    metrics[std::to_string(seed)] = entry;
  }
  return metrics;
}

json Pipeline::evaluate() {
  const Layout layout{config_};
  const WordPieceTokenizer tokenizer = load_tokenizer(layout);
  Seq2SeqModel base = load_base_model(layout);
  const GraphPipeline graphs(base, config_.explanation, config_.k_percent);
  const TokenizeOptions topt = tokenize_options(config_);

  std::vector<RawRecord> raw = load_dataset(config_.test_path, config_.task);
  if (config_.eval_limit > 0 && static_cast<int>(raw.size()) > config_.eval_limit) {
    raw.resize(config_.eval_limit);
  }
  if (raw.empty()) throw InvalidInput("test split is empty");
  std::vector<RawRecord> reformulated;
  for (const auto& r : raw) reformulated.push_back(reformulate(r, config_.task));

  const LexiconTagger tagger = LexiconTagger::load(config_.nouns_path);
  const AdjectiveLexicon lexicon = AdjectiveLexicon::load(config_.adjectives_path);
  PerturbationConfig pconf;
  pconf.positions = config_.perturb_positions;
  pconf.candidates_per_position = config_.perturb_candidates;
  pconf.seed = config_.perturb_seed;
  const HashedTrigramEmbedder embedder;

  json metrics = json::object();
  for (uint64_t seed : config_.seeds) {
    const fs::path ckpt = layout.best_model(seed);
    if (!fs::exists(ckpt)) throw MissingArtifact(Stage::kTrain, "checkpoint " + ckpt.string() + " not found");
    const Seq2SeqModel model = Seq2SeqModel::load(ckpt.string());
    const GenerateOptions gen{config_.beam, config_.max_decode_tokens};

    // Graphs and prompts are rebuilt from the base model for every input,
    // perturbed ones included.
    auto predict = [&](const RawRecord& reformed) {
      const TokenizedInstance inst = tokenize_instance(reformed, config_.task, tokenizer, topt);
      switch (config_.model) {
        case ModelKind::kGnn: {
          const ExplanationGraph g = graphs.graph(inst);
          return generate(model, tokenizer, inst, &g, gen);
        }
        case ModelKind::kPrompt: {
          const TokenizedInstance p =
              prompt_instance(reformed, inst, graphs.select(inst), config_.task, tokenizer, topt);
          return generate(model, tokenizer, p, nullptr, gen);
        }
        case ModelKind::kBase:
          break;
      }
      return generate(model, tokenizer, inst, nullptr, gen);
    };

    std::vector<std::string> labels, nles;
    int flagged = 0;
    std::ostringstream generations;
    for (const auto& r : reformulated) {
      const GenerationOutput out = predict(r);
      labels.push_back(text::to_lower(out.label));
      nles.push_back(out.nle);
      flagged += out.flagged ? 1 : 0;
      generations << json{{"id", r.id}, {"label", out.label}, {"nle", out.nle}, {"text", out.text},
                          {"flagged", out.flagged}}
                         .dump()
                  << "\n";
    }
    const std::vector<std::vector<std::string>> refs = references_of(reformulated);
    const LexicalScores lexical = lexical_similarity(nles, refs);
    const std::optional<SemanticScore> semantic =
        semantic_similarity(nles, refs, config_.semantic ? &embedder : nullptr);

    const Predictor predictor = [&](const RawRecord& record) {
      Prediction p;
      try {
        const GenerationOutput out = predict(reformulate(record, config_.task));
        p.label = text::to_lower(out.label);
        p.nle = out.nle;
        p.failed = out.text.empty();
      } catch (const InvalidInput&) {
        p.failed = true;
      }
      return p;
    };
    const CounterfactualRun run = run_counterfactual_test(predictor, raw, tagger, lexicon, pconf);
    const FaithfulnessReport faith = compute_unfaithfulness(run.records);
    int skipped = 0;
    for (const auto& r : run.records) skipped += r.skipped ? 1 : 0;

    json m = {{"seed", seed},
              {"instances", raw.size()},
              {"accuracy", label_accuracy(labels, labels_of(raw))},
              {"bleu", lexical.bleu},
              {"rouge1", lexical.rouge1},
              {"rougeL", lexical.rougeL},
              {"flagged_generations", flagged},
              {"counter_unfaith", faith.counter_unfaith},
              {"total_unfaith", faith.total_unfaith},
              {"n_total", faith.n_total},
              {"n_changed", faith.n_changed},
              {"n_unfaithful", faith.n_unfaithful},
              {"degenerate", faith.degenerate},
              {"skipped_instances", skipped},
              {"failed_perturbations", run.failed_perturbations},
              {"perturbations", run.log.size()}};
    if (semantic) {
      m["semantic"] = semantic->score;
      m["empty_hypotheses"] = semantic->empty_hypotheses;
    }
    fs::create_directories(layout.seed_reports(seed));
    save_prediction_log((layout.seed_reports(seed) / "prediction_log.jsonl").string(), run.log);
    write_file_atomic((layout.seed_reports(seed) / "generations.jsonl").string(), generations.str());
    write_file_atomic(layout.metrics(seed).string(), m.dump(2) + "\n");
    log_ << "evaluate: seed " << seed << " accuracy " << m["accuracy"].get<double>() << " BLEU "
         << lexical.bleu << " counter " << faith.counter_unfaith << " total " << faith.total_unfaith
         << "\n";
    metrics[std::to_string(seed)] = m;
  }
  return metrics;
}

json Pipeline::report() {
  const Layout layout{config_};
  const char* fields[] = {"counter_unfaith", "total_unfaith", "accuracy", "bleu",
                          "rouge1",          "rougeL",        "semantic"};
  json per_seed = json::array();
  std::map<std::string, std::vector<double>> values;
  for (uint64_t seed : config_.seeds) {
    const fs::path p = layout.metrics(seed);
    if (!fs::exists(p)) throw MissingArtifact(Stage::kEvaluate, "metrics " + p.string() + " not found");
    const json m = json::parse(read_file(p.string()));
    per_seed.push_back(m);
    for (const char* f : fields) {
      if (m.contains(f)) values[f].push_back(m[f].get<double>());
    }
  }
  json summary = json::object();
  for (const auto& [field, v] : values) summary[field] = {{"mean", mean(v)}, {"std", stddev(v)}};
  bool ordered = true;
  for (const auto& m : per_seed) {
    ordered = ordered && m["total_unfaith"].get<double>() <= m["counter_unfaith"].get<double>() + 1e-12;
  }
  const json report = {{"task", to_string(config_.task)},
                       {"model", to_string(config_.model)},
                       {"gnn_variant", gnn::to_string(config_.gnn_variant)},
                       {"explanation_type", to_string(config_.explanation)},
                       {"k_percent", config_.k_percent},
                       {"seeds", config_.seeds},
                       {"summary", summary},
                       {"per_seed", per_seed},
                       {"total_le_counter", ordered}};
  write_file_atomic(layout.report().string(), report.dump(2) + "\n");
  json metrics = {{"report", layout.report().string()}};
  if (options_.plots) {
    std::vector<std::pair<std::string, double>> bars;
    for (const char* f : fields) {
      if (!summary.contains(f)) continue;
      const double scale = (std::string(f) == "rouge1" || std::string(f) == "rougeL" ||
                            std::string(f) == "semantic")
                               ? 100.0
                               : 1.0;
      bars.emplace_back(f, scale * summary[f]["mean"].get<double>());
    }
    write_file_atomic(layout.plot().string(),
                      bar_chart_svg(bars, std::string(to_string(config_.task)) + " / " +
                                              std::string(to_string(config_.model))));
    metrics["plot"] = layout.plot().string();
  }
  log_ << "report: wrote " << layout.report().string() << "\n";
  return metrics;
}

int dispatch(std::string_view command, const std::string& config_path, const RunOptions& options,
             std::ostream& out, std::ostream& err) {
  Stage stage;
  try {
    stage = parse_stage(command);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::optional<ExperimentConfig> config;
  try {
    config = validate_config(config_path);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    Pipeline pipeline(std::move(*config), options, out);
    pipeline.run(stage);
  } catch (const MissingArtifact& e) {
    err << "error: missing upstream artifact for '" << command << "': " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << command << " failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

void write_toy_experiment(const std::string& dir, int train_size, uint64_t seed) {
  if (train_size < 4) throw InvalidInput("toy experiment needs at least 4 training records");
  const int held_out = std::max(2, train_size / 4);
  std::vector<RawRecord> all = make_toy_nli(train_size + 2 * held_out, seed);
  fs::create_directories(dir);
  const auto slice = [&](int begin, int end) {
    return std::vector<RawRecord>(all.begin() + begin, all.begin() + end);
  };
  save_dataset((fs::path(dir) / "train.jsonl").string(), slice(0, train_size));
  save_dataset((fs::path(dir) / "dev.jsonl").string(), slice(train_size, train_size + held_out));
  save_dataset((fs::path(dir) / "test.jsonl").string(),
               slice(train_size + held_out, train_size + 2 * held_out));
  const std::string config =
      "# Toy NLI experiment.\n"
      "task = nli\n"
      "model = gnn\n"
      "gnn_variant = sage\n"
      "explanation_type = token_interaction\n"
      "train_path = train.jsonl\n"
      "dev_path = dev.jsonl\n"
      "test_path = test.jsonl\n"
      "output_dir = out\n"
      "epochs = 10\n"
      "base_epochs = 10\n"
      "batch_size = 8\n"
      "seeds = " + std::to_string(seed) + "\n";
  write_file_atomic((fs::path(dir) / "experiment.cfg").string(), config);
}

}  // namespace graphnle
