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

// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graphnle/faithfulness.h"
#include "graphnle/gnn.h"
#include "graphnle/graph.h"
#include "graphnle/louvain.h"
#include "graphnle/metrics.h"
#include "graphnle/model.h"
#include "graphnle/pipeline.h"
#include "graphnle/synthetic.h"
#include "graphnle/text.h"
#include "graphnle/trainer.h"
#include "oracles/faithfulness_fixtures.h"
#include "oracles/fixtures.h"
#include "oracles/oracles.h"

namespace graphnle {
namespace {

using Mat = gnn::NodeStates<double>;
using Edges = std::vector<std::pair<int, int>>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string format(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

ExplanationGraph graph_of(int n, Edges edges) {
  ExplanationGraph g;
  g.instance_id = "g";
  g.node_count = n;
  g.edges = std::move(edges);
  return g;
}

oracle::Rows rows(const Mat& m) {
  oracle::Rows r(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  }
  return r;
}

Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Mat::NullaryExpr(r, c, [&] { return u(rng); });
}

gnn::GnnParameters<double> with(gnn::Variant v, Mat w, gnn::Activation a, Eigen::VectorXd att = {}) {
  gnn::GnnParameters<double> p;
  p.variant = v;
  p.activation = a;
  p.weight = std::move(w);
  p.attention = std::move(att);
  return p;
}

Outcome gnn_oracle_equivalence() {
  std::mt19937_64 rng(17);
  const int d = 3;
  const Mat w = random_matrix(d, d, rng), w2 = random_matrix(d, 2 * d, rng);
  const Eigen::VectorXd a = random_matrix(2 * d, 1, rng);
  const std::vector<double> a_self(a.data(), a.data() + d), a_nb(a.data() + d, a.data() + 2 * d);
  double worst = 0.0;
  int graphs = 0;
  for (int n = 1; n <= 5; ++n) {
    Edges all;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) all.push_back({u, v});
    }
    const Mat h = random_matrix(n, d, rng);
    for (unsigned mask = 0; mask < (1u << all.size()); ++mask) {
      Edges edges;
      for (size_t e = 0; e < all.size(); ++e) {
        if (mask >> e & 1u) edges.push_back(all[e]);
      }
      const ExplanationGraph g = graph_of(n, edges);
      ++graphs;
      for (auto act : {gnn::Activation::kIdentity, gnn::Activation::kRelu}) {
        const bool relu = act == gnn::Activation::kRelu;
        const auto diff = [&](const Mat& got, const oracle::Rows& want) {
          for (int v = 0; v < n; ++v) {
            for (int c = 0; c < d; ++c) worst = std::max(worst, std::abs(got(v, c) - want[v][c]));
          }
        };
        diff(gnn::gcn_forward(h, g, with(gnn::Variant::kGcn, w, act)),
             oracle::gcn(rows(h), edges, rows(w), relu));
        diff(gnn::gat_forward(h, g, with(gnn::Variant::kGat, w, act, a)),
             oracle::gat(rows(h), edges, rows(w), a_self, a_nb, 0.2, relu));
        diff(gnn::sage_forward(h, g, with(gnn::Variant::kSage, w2, act)),
             oracle::sage(rows(h), edges, rows(w2), relu));
      }
    }
  }
  return {worst <= 1e-6, std::to_string(graphs) + " graphs x 3 variants x 2 activations, max |diff| " +
                             format("%.2e", worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(29);
  const int n = 5, d = 3;
  const ExplanationGraph g = graph_of(n, {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
  const Mat h = random_matrix(n, d, rng), c = random_matrix(n, d, rng);
  const double step = 1e-5;
  double worst = 0.0;
  for (auto variant : {gnn::Variant::kGcn, gnn::Variant::kGat, gnn::Variant::kSage}) {
    auto p = gnn::GnnParameters<double>::initialized(variant, d, 3);
    const auto loss = [&](const gnn::GnnParameters<double>& q) {
      return (gnn::gnn_forward(h, g, q).array() * c.array()).sum();
    };
    const auto grads = gnn::gnn_backward(h, g, p, c);
    const auto check = [&](double analytic, double numeric) {
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
    };
    for (Eigen::Index i = 0; i < p.weight.size(); ++i) {
      auto plus = p, minus = p;
      plus.weight.data()[i] += step;
      minus.weight.data()[i] -= step;
      check(grads.d_weight.data()[i], (loss(plus) - loss(minus)) / (2 * step));
    }
    for (Eigen::Index i = 0; i < p.attention.size(); ++i) {
      auto plus = p, minus = p;
      plus.attention[i] += step;
      minus.attention[i] -= step;
      check(grads.d_attention[i], (loss(plus) - loss(minus)) / (2 * step));
    }
  }
  return {worst <= 1e-4, "gcn/gat/sage, max relative error " + format("%.2e", worst)};
}

Outcome identity_configuration() {
  const ModelConfig c = ModelConfig::toy(20);
  const Seq2SeqModel base(c, 7);
  const TokenizedInstance inst = fixture::ten_token_instance();
  const auto ids = Seq2SeqModel::encoder_input(inst);
  ExplanationGraph empty;
  empty.instance_id = inst.id;
  empty.node_count = inst.size();
  const Matrix reference = base.encode(ids, nullptr)->value;
  std::string detail;
  bool pass = true;
  for (auto v : {gnn::Variant::kGcn, gnn::Variant::kGat, gnn::Variant::kSage}) {
    auto p = gnn::GnnParameters<double>::initialized(v, c.hidden, 3);
    if (v == gnn::Variant::kSage) {
      p.weight.setZero();
      p.weight.leftCols(c.hidden).setIdentity();
      p.activation = gnn::Activation::kIdentity;
    }
    const Seq2SeqModel aug =
        insert_gnn_layer(base, gnn::InsertionConfig::three_quarter_depth(c.encoder_layers), p);
    const bool same = (aug.encode(ids, &empty)->value.array() == reference.array()).all();
    pass = pass && same;
    detail += std::string(gnn::to_string(v)) + (same ? " exact " : " differs ");
  }
  return {pass, detail + "(2+2 layer toy, empty edge set)"};
}

oracle::Rows dense(const WeightedGraph& g) {
  oracle::Rows a(g.node_count(), std::vector<double>(g.node_count(), 0.0));
  for (int u = 0; u < g.node_count(); ++u) {
    for (auto [v, w] : g.neighbors(u)) a[u][v] = w;
  }
  return a;
}

bool connected(const WeightedGraph& g) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (auto [v, w] : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == g.node_count();
}

Outcome louvain_oracle() {
  WeightedGraph cliques(6);
  for (auto [u, v] : {std::pair{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}}) {
    cliques.add_edge(u, v, 1.0);
  }
  const auto groups = louvain_partition(cliques).groups();
  const bool recovered = groups == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}};

  // Fixture set: random connected weighted graphs of 3 to 8 nodes.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int graphs = 0, beyond = 0;
  double worst_gap = 0.0;
  while (graphs < 60) {
    const int n = 3 + graphs % 6;
    WeightedGraph g(n);
    const double density = 0.3 + 0.5 * u(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (u(rng) < density) g.add_edge(i, j, 0.1 + u(rng));
      }
    }
    if (!connected(g)) continue;
    ++graphs;
    const double optimum = oracle::exhaustive_modularity(dense(g)).modularity;
    const double gap = optimum - modularity(g, louvain_partition(g));
    worst_gap = std::max(worst_gap, gap);
    beyond += gap > 0.05;
  }
  return {recovered && worst_gap <= 0.05,
          std::string(recovered ? "two-clique fixture recovered" : "two-clique fixture NOT recovered") +
              "; " + std::to_string(beyond) + " of " + std::to_string(graphs) +
              " connected graphs more than 0.05 below the optimum, worst gap " +
              format("%.4f", worst_gap)};
}

Outcome graph_goldens() {
  const TokenizedInstance inst = fixture::ten_token_instance();
  const auto ht = select_top_fraction(fixture::ten_token_highlights(), 30.0);
  const auto ti = select_top_fraction(fixture::ten_token_interactions(), 30.0);
  const auto si = select_top_fraction(fixture::ten_token_spans(), 30.0);
  const bool counts = ht.tokens.size() == 3 && ti.pairs.size() == 8 &&
                      top_fraction_count(10, 30) == 3 && top_fraction_count(25, 30) == 8;
  const bool h = fixture::edges_of(build_graph(ht, inst)) == fixture::expected_highlight_edges();
  const bool t = fixture::edges_of(build_graph(ti, inst)) == fixture::expected_interaction_edges();
  const bool s = fixture::edges_of(build_graph(si, inst)) == fixture::expected_span_edges();
  return {counts && h && t && s, std::string("selection counts ") + (counts ? "ok" : "WRONG") +
                                     ", highlight " + (h ? "ok" : "WRONG") + ", interaction " +
                                     (t ? "ok" : "WRONG") + ", span " + (s ? "ok" : "WRONG")};
}

Outcome faithfulness_oracle() {
  const auto fixed = compute_unfaithfulness(fixture::ten_instance_records());
  const bool hand = fixed.counter_unfaith == 75.0 && fixed.total_unfaith == 30.0;
  std::mt19937_64 rng(99);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = fixture::random_log(rng, trial);
    const auto want = oracle::rescan(r.rows, r.ids);
    const auto got = compute_unfaithfulness(fixture::records_of(r));
    agree += got.counter_unfaith == want.counter && got.total_unfaith == want.total &&
             got.n_total == want.n_total && got.n_changed == want.n_changed &&
             got.n_unfaithful == want.n_unfaithful;
  }
  return {hand && agree == 100, "fixture counter " + format("%.1f", fixed.counter_unfaith) +
                                    " total " + format("%.1f", fixed.total_unfaith) + "; " +
                                    std::to_string(agree) + "/100 random logs match the rescan"};
}

Outcome perturbation_contract() {
  const auto tagger = LexiconTagger::load(GRAPHNLE_DATA_DIR "/nouns.txt");
  const auto lexicon = AdjectiveLexicon::load(GRAPHNLE_DATA_DIR "/adjectives.txt");
  std::vector<RawRecord> records = make_toy_nli(100, 5);
  const std::vector<std::pair<std::string, std::string>> hand = {
      {"A man throws a ball to a dog in the park.", "The dog catches the ball."},
      {"A woman reads a book at the kitchen table.", "A woman is reading."},
      {"A girl rides a bike down the hill by the river.", "A child is outside."},
      {"Two boys build a castle of sand on the beach.", "Children play near the water."},
      {"A man in a red hat opens the door of the car.", "Someone is near a car."},
      {"The street in the city is wet.", "A road is dry."}};
  for (size_t i = 0; i < hand.size(); ++i) {
    records.push_back({"hand-" + std::to_string(i), hand[i].first, hand[i].second, "neutral", {"x"}});
  }
  const PerturbationConfig config{4, 4, 13};
  int eligible = 0, bad = 0;
  for (const auto& r : records) {
    auto words = text::split_whitespace(r.part_a);
    const auto b = text::split_whitespace(r.part_b);
    words.insert(words.end(), b.begin(), b.end());
    const auto mask = tagger.noun_mask(words);
    const int nouns = static_cast<int>(std::count(mask.begin(), mask.end(), true));
    const auto set = perturb_instance(r, tagger, lexicon, config);
    const auto again = perturb_instance(r, tagger, lexicon, config);
    const size_t expected = 4 * std::min(nouns, 4);
    bool ok = set.items.size() == expected && set.items.size() == again.items.size();
    if (nouns >= 4) ++eligible;
    for (size_t i = 0; ok && i < set.items.size(); ++i) {
      const auto& p = set.items[i];
      auto pw = text::split_whitespace(p.record.part_a);
      const auto pb = text::split_whitespace(p.record.part_b);
      pw.insert(pw.end(), pb.begin(), pb.end());
      ok = pw.size() == words.size() + 1 && pw[p.position] == p.adjective &&
           p.record == again.items[i].record;
      if (ok) {
        pw.erase(pw.begin() + p.position);
        ok = pw == words;
      }
    }
    bad += !ok;
  }
  return {bad == 0 && eligible > 0,
          std::to_string(eligible) + " instances with >=4 nouns, " + std::to_string(bad) +
              " contract violations over " + std::to_string(records.size()) + " instances"};
}

Outcome toy_end_to_end() {
  std::vector<RawRecord> raw = make_toy_nli(220, 1);
  std::vector<std::string> texts;
  for (auto& r : raw) {
    r = reformulate(r, Task::kNli);
    texts.push_back(input_text(r));
    texts.push_back(target_text(r, Task::kNli));
  }
  const WordPieceTokenizer tokenizer(build_vocabulary(texts));
  const ModelConfig base_config = ModelConfig::toy(tokenizer.vocab().size());
  Seq2SeqModel base(base_config, 1);
  const GraphPipeline pipeline(base, ExplanationType::kTokenInteraction, 30.0);
  FitData data;
  std::vector<RawRecord> dev_raw;
  for (size_t i = 0; i < raw.size(); ++i) {
    TokenizedInstance inst = tokenize_instance(raw[i], Task::kNli, tokenizer, {96, 48});
    data.graphs[inst.id] = pipeline.graph(inst);
    if (i < 200) {
      data.train.push_back(std::move(inst));
    } else {
      data.dev.push_back(std::move(inst));
      data.dev_references.push_back(raw[i].gold_nle);
    }
  }
  gnn::InsertionConfig insertion = gnn::InsertionConfig::three_quarter_depth(base_config.encoder_layers);
  Seq2SeqModel model = insert_gnn_layer(
      Seq2SeqModel(base_config, 2), insertion,
      gnn::GnnParameters<double>::initialized(gnn::Variant::kSage, base_config.hidden, 3));
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 8;
  config.seed = 1;
  const CheckpointSeries series = fit(model, tokenizer, data, config);
  const double drop = 1.0 - series.back().train_loss / series.front().train_loss;
  double min_gnn_grad = series.front().gnn_grad_norm;
  for (const auto& c : series) min_gnn_grad = std::min(min_gnn_grad, c.gnn_grad_norm);
  restore_checkpoint(model, select_checkpoint(series));
  int unlabeled = 0;
  for (const auto& inst : data.dev) {
    const auto out = generate(model, tokenizer, inst, &data.graphs.at(inst.id),
                              {config.beam, config.max_decode_tokens});
    unlabeled += out.label.empty();
  }
  return {insertion.after_layer == 1 && series.size() == 5 && drop >= 0.5 && min_gnn_grad > 0.0 &&
              unlabeled == 0,
          "loss " + format("%.2f -> %.2f (%.1f%% drop)", series.front().train_loss,
                           series.back().train_loss, 100 * drop) +
              ", min GNN grad norm " + format("%.3g", min_gnn_grad) + ", " +
              std::to_string(unlabeled) + "/" + std::to_string(data.dev.size()) +
              " generations without a label"};
}

Outcome parameter_overhead() {
  std::ostringstream detail;
  bool pass = true;
  const auto report = [&](const std::string& name, ModelConfig c, gnn::Variant v) {
    const int64_t base = count_parameters(c);
    c.gnn = v;
    c.gnn_after_layer = gnn::InsertionConfig::three_quarter_depth(c.encoder_layers).after_layer;
    const double pct = 100.0 * (count_parameters(c) - base) / base;
    pass = pass && pct < 0.3;
    detail << name << "+" << gnn::to_string(v) << " " << format("%.3f%%", pct) << "; ";
  };
  // The toy profile uses the vocabulary size of the end-to-end run.
  for (auto v : {gnn::Variant::kGcn, gnn::Variant::kGat, gnn::Variant::kSage}) {
    report("toy", ModelConfig::toy(200), v);
  }
  for (auto v : {gnn::Variant::kGcn, gnn::Variant::kGat, gnn::Variant::kSage}) {
    report("reference", ModelConfig::reference_large(), v);
  }
  // Cross-check the formula against an allocated augmented model.
  const ModelConfig toy = ModelConfig::toy(200);
  const Seq2SeqModel aug = insert_gnn_layer(
      Seq2SeqModel(toy, 1), gnn::InsertionConfig::three_quarter_depth(toy.encoder_layers),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kSage, toy.hidden, 1));
  const bool counted = aug.parameters().scalar_count() == count_parameters(aug.config());
  detail << "allocation " << (counted ? "matches" : "DIFFERS FROM") << " formula";
  return {pass && counted, detail.str()};
}

Outcome metric_sanity() {
  const std::vector<std::string> gen = {"the cat sat on the mat .", "a dog barks at night"};
  const auto same = lexical_similarity(gen, {{gen[0]}, {gen[1]}});
  const auto disjoint = lexical_similarity({"alpha beta gamma"}, {{"one two three"}});
  const bool identity = std::abs(same.bleu - 100.0) < 1e-9 && std::abs(same.rouge1 - 1.0) < 1e-12 &&
                        std::abs(same.rougeL - 1.0) < 1e-12;
  const bool zero = disjoint.bleu == 0.0 && disjoint.rouge1 == 0.0 && disjoint.rougeL == 0.0;
  std::mt19937_64 rng(7);
  int reports = 0, violations = 0;
  const auto check = [&](const FaithfulnessReport& r) {
    ++reports;
    violations += r.total_unfaith > r.counter_unfaith;
  };
  check(compute_unfaithfulness(fixture::ten_instance_records()));
  for (int trial = 0; trial < 200; ++trial) {
    check(compute_unfaithfulness(fixture::records_of(fixture::random_log(rng, trial))));
  }
  return {identity && zero && violations == 0,
          "identity BLEU " + format("%.1f", same.bleu) + " ROUGE " + format("%.3f", same.rouge1) +
              ", disjoint BLEU " + format("%.1f", disjoint.bleu) + ", total<=counter on " +
              std::to_string(reports - violations) + "/" + std::to_string(reports) + " reports"};
}

}  // namespace
}  // namespace graphnle

int main() {
  using namespace graphnle;
  const std::vector<Criterion> criteria = {
      {1, "GNN oracle equivalence", 1, gnn_oracle_equivalence},
      {2, "gradient check", 10, gradient_check},
      {3, "identity configuration", 5, identity_configuration},
      {4, "Louvain oracle", 30, louvain_oracle},
      {5, "graph-construction goldens", 1, graph_goldens},
      {6, "faithfulness-metric oracle", 5, faithfulness_oracle},
      {7, "perturbation contract", 5, perturbation_contract},
      {8, "toy end-to-end", 300, toy_end_to_end},
      {9, "parameter overhead", 60, parameter_overhead},
      {10, "metric sanity", 1, metric_sanity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = outcome.pass && in_time;
    failures += !pass;
    std::printf("%s [%d] %s (%.2f s, limit %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.number,
                c.name.c_str(), seconds, c.limit_seconds, in_time ? "" : ", exceeded",
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
