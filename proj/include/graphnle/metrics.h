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

#ifndef GRAPHNLE_METRICS_H_
#define GRAPHNLE_METRICS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphnle/common.h"

namespace graphnle {

// Lowercased tokens with punctuation split off, shared by all lexical metrics.
std::vector<std::string> metric_tokenize(std::string_view text);

// Corpus BLEU on a 0-100 scale: clipped 1-4 gram precisions pooled over the
// corpus, geometric mean without smoothing, brevity penalty against the
// closest reference length.
double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::vector<std::string>>& references);

double rouge_n_f1(std::string_view hypothesis, std::string_view reference, int n = 1);
double rouge_l_f1(std::string_view hypothesis, std::string_view reference);

struct LexicalScores {
  double bleu = 0.0;    // 0-100
  double rouge1 = 0.0;  // 0-1, mean of best-reference F1
  double rougeL = 0.0;  // 0-1, mean of best-reference F1
};

LexicalScores lexical_similarity(const std::vector<std::string>& generated,
                                 const std::vector<std::vector<std::string>>& references);

// Produces one embedding row per token.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual Matrix embed(const std::vector<std::string>& tokens) const = 0;
};

// Deterministic contextual embedding: hashed character trigrams of each token
// (FNV-1a, `dim` buckets), mixed with half of each neighbor's vector, then
// L2-normalised. All entries are nonnegative, so cosines lie in [0, 1].
class HashedTrigramEmbedder : public TokenEmbedder {
 public:
  explicit HashedTrigramEmbedder(int dim = 256) : dim_(dim) {}
  Matrix embed(const std::vector<std::string>& tokens) const override;

 private:
  int dim_;
};

struct SemanticScore {
  double score = 0.0;        // Mean best-reference greedy-matching F1.
  int empty_hypotheses = 0;  // Scored 0 and counted here.
};

// Greedy token-embedding matching F-score (BERTScore-style). Returns nullopt
// when no embedder is available.
std::optional<SemanticScore> semantic_similarity(
    const std::vector<std::string>& generated,
    const std::vector<std::vector<std::string>>& references, const TokenEmbedder* embedder);

// Pairwise greedy-matching F1 between two strings.
double greedy_match_f1(std::string_view hypothesis, std::string_view reference,
                       const TokenEmbedder& embedder);

// Exact-match rate x100.
double label_accuracy(const std::vector<std::string>& predictions,
                      const std::vector<std::string>& golds);

}  // namespace graphnle

#endif  // GRAPHNLE_METRICS_H_
