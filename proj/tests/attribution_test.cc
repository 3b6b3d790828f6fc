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

#include <random>

#include "gtest/gtest.h"
#include "graphnle/attribution.h"

namespace graphnle {
namespace {

AttentionSnapshot snapshot_of(std::vector<Matrix> weights, std::vector<Vector> contributions,
                              int boundary_m) {
  AttentionSnapshot s;
  s.instance_id = "x";
  s.boundary_m = boundary_m;
  s.weights = std::move(weights);
  s.contributions = std::move(contributions);
  return s;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

AttentionSnapshot random_snapshot(std::mt19937_64& rng, int n, int heads, int m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Matrix> w;
  std::vector<Vector> c;
  for (int h = 0; h < heads; ++h) {
    Matrix a = Matrix::NullaryExpr(n, n, [&] { return std::exp(3.0 * u(rng)); });
    a = a.array().colwise() / a.rowwise().sum().array();
    w.push_back(a);
    c.push_back(Vector::NullaryExpr(n, [&] { return u(rng) < 0.5 ? -1.0 : 1.0; }));
  }
  return snapshot_of(w, c, m);
}

TEST(SelectHeadTest, TieGoesToLowestHead) {
  const Matrix uniform = Matrix::Constant(2, 2, 0.5);
  const auto sel = select_head(snapshot_of({uniform, uniform}, {Vector::Ones(2), Vector::Ones(2)}, 1));
  EXPECT_EQ(sel.head, 0);
  EXPECT_FALSE(sel.degenerate);
}

TEST(SelectHeadTest, SumsMeanAttentionOverPositiveTokens) {
  const Matrix h0 = rows({{0.9, 0.1}, {0.9, 0.1}});
  const Matrix h1 = rows({{0.6, 0.4}, {0.6, 0.4}});
  Vector c1(2);
  c1 << 1.0, -1.0;
  const auto sel = select_head(snapshot_of({h0, h1}, {Vector::Ones(2), c1}, 1));
  EXPECT_EQ(sel.head, 0);
  EXPECT_NEAR(sel.head_scores[0], 1.0, 1e-12);
  EXPECT_NEAR(sel.head_scores[1], 0.6, 1e-12);
}

TEST(SelectHeadTest, AllNegativeIsDegenerate) {
  const Matrix uniform = Matrix::Constant(2, 2, 0.5);
  const auto sel =
      select_head(snapshot_of({uniform, uniform}, {-Vector::Ones(2), -Vector::Ones(2)}, 1));
  EXPECT_EQ(sel.head, 0);
  EXPECT_TRUE(sel.degenerate);
}

TEST(TokenImportanceTest, UniformAttention) {
  const auto set = token_importance(snapshot_of({Matrix::Constant(3, 3, 1.0 / 3)}, {Vector::Ones(3)}, 1), 0);
  ASSERT_EQ(set.entries.size(), 3u);
  for (const auto& e : set.entries) EXPECT_NEAR(e.score, 1.0 / 3, 1e-12);
}

TEST(TokenImportanceTest, MeanOverOtherRows) {
  const Matrix w = rows({{.2, .5, .3}, {.1, .6, .3}, {.7, .2, .1}});
  const auto set = token_importance(snapshot_of({w}, {Vector::Ones(3)}, 1), 0);
  EXPECT_NEAR(set.entries[0].score, 0.4, 1e-12);
  EXPECT_NEAR(set.entries[1].score, 0.35, 1e-12);
  EXPECT_NEAR(set.entries[2].score, 0.3, 1e-12);
}

TEST(TokenImportanceTest, SingleTokenIsAnError) {
  EXPECT_THROW(token_importance(snapshot_of({Matrix::Ones(1, 1)}, {Vector::Ones(1)}, 1), 0), InvalidInput);
}

TEST(TokenInteractionsTest, MeanOfBothDirections) {
  const Matrix w = rows({{0.8, 0.2}, {0.4, 0.6}});
  const auto set = token_interactions(snapshot_of({w}, {Vector::Ones(2)}, 1), 0);
  ASSERT_EQ(set.entries.size(), 1u);
  EXPECT_EQ(set.entries[0].i, 0);
  EXPECT_EQ(set.entries[0].j, 1);
  EXPECT_NEAR(set.entries[0].score, 0.3, 1e-12);
}

TEST(TokenInteractionsTest, SymmetricMatrixGivesRawWeights) {
  const Matrix w = rows({{.5, .3, .2}, {.3, .4, .3}, {.2, .3, .5}});
  const auto set = token_interactions(snapshot_of({w}, {Vector::Ones(3)}, 1), 0);
  ASSERT_EQ(set.entries.size(), 2u);
  for (const auto& e : set.entries) EXPECT_NEAR(e.score, w(e.i, e.j), 1e-12);
}

TEST(TokenInteractionsTest, EmptyPartBIsAnError) {
  EXPECT_THROW(token_interactions(snapshot_of({Matrix::Constant(2, 2, .5)}, {Vector::Ones(2)}, 2), 0),
               InvalidInput);
}

TokenInteractionSet interactions(int m, std::vector<ScoredPair> pairs) {
  TokenInteractionSet s;
  s.boundary_m = m;
  s.entries = std::move(pairs);
  return s;
}

TEST(SpanInteractionsTest, OneCommunityGivesOneSpanPair) {
  const auto set = span_interactions(
      interactions(2, {{0, 2, 0.2}, {0, 3, 0.4}, {1, 2, 0.1}, {1, 3, 0.3}}), 2);
  ASSERT_EQ(set.entries.size(), 1u);
  EXPECT_EQ(set.entries[0].span_a, (IndexRange{0, 2}));
  EXPECT_EQ(set.entries[0].span_b, (IndexRange{2, 4}));
  EXPECT_NEAR(set.entries[0].score, 0.25, 1e-12);
}

TEST(SpanInteractionsTest, SinglePartCommunityContributesNothing) {
  // Token 1 has no interaction weight and stays alone inside part A.
  const auto set = span_interactions(interactions(2, {{0, 2, 0.7}, {1, 2, 0.0}}), 2);
  for (const auto& e : set.entries) EXPECT_FALSE(e.span_a.contains(1));
}

TEST(SpanInteractionsTest, NonAdjacentTokensFormSeparateSpans) {
  const auto set = span_interactions(interactions(3, {{0, 3, 1.0}, {1, 3, 0.0}, {2, 3, 1.0}}), 3);
  ASSERT_EQ(set.entries.size(), 2u);
  std::vector<IndexRange> a;
  for (const auto& e : set.entries) {
    EXPECT_EQ(e.span_b, (IndexRange{3, 4}));
    EXPECT_NEAR(e.score, 1.0, 1e-12);
    a.push_back(e.span_a);
  }
  std::sort(a.begin(), a.end());
  EXPECT_EQ(a[0], (IndexRange{0, 1}));
  EXPECT_EQ(a[1], (IndexRange{2, 3}));
}

TEST(AttributionPropertyTest, RandomSnapshots) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 9;
    const int m = 1 + trial % (n - 1);
    const AttentionSnapshot s = random_snapshot(rng, n, 1 + trial % 4, m);
    const ExplanationSets a = extract_explanations(s);
    const ExplanationSets b = extract_explanations(s);
    ASSERT_EQ(a.highlight_tokens.entries.size(), static_cast<size_t>(n));
    for (const auto& e : a.highlight_tokens.entries) {
      EXPECT_GE(e.score, 0.0);
      EXPECT_LE(e.score, 1.0);
    }
    EXPECT_EQ(a.token_interactions.entries.size(), static_cast<size_t>(m * (n - m)));
    for (const auto& e : a.token_interactions.entries) {
      EXPECT_LT(e.i, m);
      EXPECT_GE(e.j, m);
      EXPECT_GE(e.score, 0.0);
      EXPECT_LE(e.score, 1.0);
    }
    for (const auto& e : a.span_interactions.entries) {
      EXPECT_GE(e.span_a.begin, 0);
      EXPECT_LE(e.span_a.end, m);
      EXPECT_GE(e.span_b.begin, m);
      EXPECT_LE(e.span_b.end, n);
    }
    EXPECT_EQ(a.span_interactions.entries, b.span_interactions.entries);
    EXPECT_EQ(a.token_interactions.entries, b.token_interactions.entries);
  }
}

TEST(SnapshotTest, SerializationRoundTrip) {
  std::mt19937_64 rng(9);
  const AttentionSnapshot s = random_snapshot(rng, 5, 3, 2);
  const AttentionSnapshot t = parse_snapshot(serialize_snapshot(s));
  EXPECT_EQ(t.instance_id, s.instance_id);
  EXPECT_EQ(t.boundary_m, s.boundary_m);
  ASSERT_EQ(t.head_count(), 3);
  for (int h = 0; h < 3; ++h) {
    EXPECT_EQ(t.weights[h], s.weights[h]);
    EXPECT_EQ(t.contributions[h], s.contributions[h]);
  }
}

TEST(SnapshotTest, ValidateRejectsBadRows) {
  AttentionSnapshot s = snapshot_of({rows({{0.5, 0.4}, {0.5, 0.5}})}, {Vector::Ones(2)}, 1);
  EXPECT_THROW(s.validate(), InvalidInput);
  EXPECT_THROW(parse_snapshot("{\"truncated\":"), ParseError);
}

}  // namespace
}  // namespace graphnle
