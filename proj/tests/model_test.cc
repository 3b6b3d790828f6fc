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

#include <cstdio>
#include <filesystem>
#include <random>

#include "gtest/gtest.h"
#include "graphnle/model.h"
#include "oracles/fixtures.h"

namespace graphnle {
namespace {

ModelConfig small_config() {
  ModelConfig c = ModelConfig::toy(20);
  c.hidden = 8;
  c.ff = 16;
  c.heads = 2;
  c.max_positions = 32;
  return c;
}

ExplanationGraph empty_graph(const TokenizedInstance& inst) {
  ExplanationGraph g;
  g.instance_id = inst.id;
  g.node_count = inst.size();
  return g;
}

gnn::InsertionConfig insertion_for(const ModelConfig& c) {
  return gnn::InsertionConfig::three_quarter_depth(c.encoder_layers);
}

TEST(ModelConfigTest, ParameterCountsMatchAllocation) {
  for (ModelConfig c : {ModelConfig::toy(62), small_config()}) {
    EXPECT_EQ(Seq2SeqModel(c, 1).parameters().scalar_count(), count_parameters(c));
    for (gnn::Variant v : {gnn::Variant::kGcn, gnn::Variant::kGat, gnn::Variant::kSage}) {
      const Seq2SeqModel aug = insert_gnn_layer(
          Seq2SeqModel(c, 1), insertion_for(c), gnn::GnnParameters<double>::initialized(v, c.hidden, 2));
      EXPECT_EQ(aug.parameters().scalar_count(), count_parameters(aug.config()));
    }
  }
}

TEST(ModelConfigTest, ReferenceOverheadBelowThreshold) {
  ModelConfig c = ModelConfig::reference_large();
  const int64_t base = count_parameters(c);
  EXPECT_GT(base, 700'000'000);
  EXPECT_LT(base, 800'000'000);
  c.gnn = gnn::Variant::kSage;
  c.gnn_after_layer = 18;
  const double overhead = static_cast<double>(count_parameters(c) - base) / base;
  EXPECT_LT(overhead, 0.003);
  EXPECT_EQ(count_parameters(c) - base, 2 * 1024 * 1024);
}

TEST(ModelConfigTest, Validation) {
  ModelConfig c = small_config();
  c.heads = 3;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = small_config();
  c.gnn = gnn::Variant::kGcn;
  c.gnn_after_layer = 5;
  EXPECT_THROW(c.validate(), InvalidInput);
}

class IdentityConfigurationTest : public ::testing::TestWithParam<gnn::Variant> {};

TEST_P(IdentityConfigurationTest, EmptyGraphLeavesEncoderUnchanged) {
  const ModelConfig c = ModelConfig::toy(20);
  const Seq2SeqModel base(c, 7);
  auto p = gnn::GnnParameters<double>::initialized(GetParam(), c.hidden, 3);
  if (GetParam() == gnn::Variant::kSage) {
    p.weight.setZero();
    p.weight.leftCols(c.hidden).setIdentity();
    p.activation = gnn::Activation::kIdentity;
  }
  const Seq2SeqModel aug = insert_gnn_layer(base, insertion_for(c), p);
  const TokenizedInstance inst = fixture::ten_token_instance();
  const auto ids = Seq2SeqModel::encoder_input(inst);
  const ExplanationGraph g = empty_graph(inst);
  const Matrix before = base.encode(ids, nullptr)->value;
  const Matrix after = aug.encode(ids, &g)->value;
  ASSERT_EQ(before.rows(), after.rows());
  EXPECT_TRUE((before.array() == after.array()).all());
}

INSTANTIATE_TEST_SUITE_P(AllVariants, IdentityConfigurationTest,
                         ::testing::Values(gnn::Variant::kGcn, gnn::Variant::kGat,
                                           gnn::Variant::kSage));

TEST(ModelTest, GraphChangesEncoderOutput) {
  const ModelConfig c = ModelConfig::toy(20);
  const Seq2SeqModel aug = insert_gnn_layer(
      Seq2SeqModel(c, 7), insertion_for(c),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kSage, c.hidden, 3));
  const TokenizedInstance inst = fixture::ten_token_instance();
  ExplanationGraph g = empty_graph(inst);
  g.edges = {{1, 6}, {2, 7}};
  const auto ids = Seq2SeqModel::encoder_input(inst);
  const ExplanationGraph none = empty_graph(inst);
  EXPECT_FALSE(aug.encode(ids, &g)->value.isApprox(aug.encode(ids, &none)->value));
}

TEST(ModelTest, AugmentedModelNeedsGraph) {
  const ModelConfig c = small_config();
  const Seq2SeqModel aug = insert_gnn_layer(
      Seq2SeqModel(c, 7), insertion_for(c),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kGcn, c.hidden, 3));
  EXPECT_THROW(aug.loss(fixture::ten_token_instance(), nullptr), InvalidInput);
}

TEST(ModelTest, InsertionRejectsBadShapes) {
  const ModelConfig c = small_config();
  const Seq2SeqModel base(c, 7);
  EXPECT_THROW(insert_gnn_layer(base, gnn::InsertionConfig{c.encoder_layers, 0, 1},
                                gnn::GnnParameters<double>::initialized(gnn::Variant::kGcn, c.hidden, 3)),
               InvalidInput);
  EXPECT_THROW(insert_gnn_layer(base, insertion_for(c),
                                gnn::GnnParameters<double>::initialized(gnn::Variant::kGcn, 4, 3)),
               InvalidInput);
}

TEST(ModelTest, GnnReceivesGradient) {
  const ModelConfig c = ModelConfig::toy(20);
  Seq2SeqModel aug = insert_gnn_layer(
      Seq2SeqModel(c, 7), insertion_for(c),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kSage, c.hidden, 3));
  const TokenizedInstance inst = fixture::ten_token_instance();
  ExplanationGraph g = empty_graph(inst);
  g.edges = {{1, 6}, {2, 7}, {4, 9}};
  ag::backward(aug.loss(inst, &g));
  const auto gnn_ids = aug.gnn_parameter_indices();
  ASSERT_EQ(gnn_ids.size(), 1u);
  const auto& w = aug.parameters()[gnn_ids[0]];
  ASSERT_TRUE(w->has_grad());
  EXPECT_GT(w->grad.norm(), 0.0);
}

// Central differences on a handful of parameter entries of the full loss.
TEST(ModelTest, LossGradientMatchesFiniteDifferences) {
  const ModelConfig c = small_config();
  Seq2SeqModel model = insert_gnn_layer(
      Seq2SeqModel(c, 11), insertion_for(c),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kGat, c.hidden, 3));
  TokenizedInstance inst = fixture::ten_token_instance();
  inst.target_ids = {4, 9, 10};
  ExplanationGraph g = empty_graph(inst);
  g.edges = {{1, 6}, {2, 7}, {6, 7}};
  ag::backward(model.loss(inst, &g));
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int pi = 0; pi < model.parameters().size(); ++pi) {
    const auto& var = model.parameters()[pi];
    if (!var->has_grad()) continue;
    std::uniform_int_distribution<Eigen::Index> pick(0, var->value.size() - 1);
    for (int trial = 0; trial < 2; ++trial) {
      const Eigen::Index k = pick(rng);
      const double analytic = var->grad.data()[k];
      const double saved = var->value.data()[k];
      const double step = 1e-5;
      var->value.data()[k] = saved + step;
      const double plus = model.loss(inst, &g)->value(0, 0);
      var->value.data()[k] = saved - step;
      const double minus = model.loss(inst, &g)->value(0, 0);
      var->value.data()[k] = saved;
      const double numeric = (plus - minus) / (2 * step);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-4) << model.parameters().name(pi);
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(ModelTest, SaveLoadRoundTrip) {
  const ModelConfig c = small_config();
  const Seq2SeqModel aug = insert_gnn_layer(
      Seq2SeqModel(c, 5), insertion_for(c),
      gnn::GnnParameters<double>::initialized(gnn::Variant::kGat, c.hidden, 3));
  const std::string path =
      (std::filesystem::temp_directory_path() / "graphnle_model_test.ckpt").string();
  aug.save(path);
  const Seq2SeqModel loaded = Seq2SeqModel::load(path);
  std::remove(path.c_str());
  ASSERT_EQ(loaded.parameters().size(), aug.parameters().size());
  for (int i = 0; i < aug.parameters().size(); ++i) {
    EXPECT_EQ(loaded.parameters().name(i), aug.parameters().name(i));
    EXPECT_TRUE((loaded.parameters()[i]->value.array() == aug.parameters()[i]->value.array()).all());
  }
  EXPECT_EQ(loaded.config().gnn, aug.config().gnn);
  const TokenizedInstance inst = fixture::ten_token_instance();
  const ExplanationGraph g = empty_graph(inst);
  EXPECT_EQ(loaded.loss(inst, &g)->value(0, 0), aug.loss(inst, &g)->value(0, 0));
}

TEST(ModelTest, LoadRejectsGarbage) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "graphnle_garbage.ckpt").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a checkpoint", f);
    std::fclose(f);
  }
  EXPECT_ANY_THROW(Seq2SeqModel::load(path));
  std::remove(path.c_str());
}

TEST(ModelTest, SnapshotRowsAreDistributions) {
  Seq2SeqModel model(ModelConfig::toy(20), 3);
  const TokenizedInstance inst = fixture::ten_token_instance();
  const AttentionSnapshot s = capture_snapshot(model, inst);
  EXPECT_EQ(s.head_count(), 4);
  EXPECT_EQ(s.token_count(), inst.size());
  EXPECT_NO_THROW(s.validate());
  for (const auto& w : s.weights) {
    EXPECT_GE(w.minCoeff(), 0.0);
    for (Eigen::Index r = 0; r < w.rows(); ++r) EXPECT_NEAR(w.row(r).sum(), 1.0, 1e-9);
  }
  for (int i = 0; i < model.parameters().size(); ++i) {
    EXPECT_TRUE(!model.parameters()[i]->has_grad() || model.parameters()[i]->grad.isZero(0.0));
  }
}

TEST(ModelTest, SeedDeterminism) {
  const Seq2SeqModel a(small_config(), 9), b(small_config(), 9), c(small_config(), 10);
  const TokenizedInstance inst = fixture::ten_token_instance();
  EXPECT_EQ(a.loss(inst, nullptr)->value(0, 0), b.loss(inst, nullptr)->value(0, 0));
  EXPECT_NE(a.loss(inst, nullptr)->value(0, 0), c.loss(inst, nullptr)->value(0, 0));
}

}  // namespace
}  // namespace graphnle
