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

#include "graphnle/metrics.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "graphnle/text.h"

namespace graphnle {

std::vector<std::string> metric_tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& chunk : text::split_whitespace(text::to_lower(s))) {
    std::string cur;
    for (char c : chunk) {
      const bool punct = std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
      if (punct) {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
        out.emplace_back(1, c);
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const std::vector<std::string>& toks, int n) {
  NgramCounts counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  }
  return counts;
}

double f1(double overlap, double hyp_total, double ref_total) {
  if (overlap <= 0.0 || hyp_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = overlap / hyp_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

void check_lengths(size_t hyps, size_t refs) {
  if (hyps == 0) throw InvalidInput("empty hypothesis list");
  if (hyps != refs) throw InvalidInput("hypothesis and reference counts differ");
}

}  // namespace

double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::vector<std::string>>& references) {
  check_lengths(hypotheses.size(), references.size());
  constexpr int kMaxN = 4;
  std::array<double, kMaxN> correct{}, total{};
  double hyp_len = 0.0, ref_len = 0.0;
  for (size_t s = 0; s < hypotheses.size(); ++s) {
    if (references[s].empty()) throw InvalidInput("reference set is empty");
    const auto hyp = metric_tokenize(hypotheses[s]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[s]) refs.push_back(metric_tokenize(r));
    hyp_len += hyp.size();
    // Closest reference length, shorter wins ties.
    size_t best = refs[0].size();
    for (const auto& r : refs) {
      const auto diff = [&](size_t len) {
        return std::abs(static_cast<long>(len) - static_cast<long>(hyp.size()));
      };
      if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
        best = r.size();
      }
    }
    ref_len += best;
    for (int n = 1; n <= kMaxN; ++n) {
      const NgramCounts h = ngrams(hyp, n);
      NgramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
      }
      for (const auto& [g, c] : h) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) correct[n - 1] += std::min(c, it->second);
        total[n - 1] += c;
      }
    }
  }
  double log_precision = 0.0;
  for (int n = 0; n < kMaxN; ++n) {
    if (correct[n] <= 0.0 || total[n] <= 0.0) return 0.0;
    log_precision += std::log(correct[n] / total[n]) / kMaxN;
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_precision);
}

double rouge_n_f1(std::string_view hypothesis, std::string_view reference, int n) {
  const auto h = ngrams(metric_tokenize(hypothesis), n);
  const auto r = ngrams(metric_tokenize(reference), n);
  double overlap = 0.0, ht = 0.0, rt = 0.0;
  for (const auto& [g, c] : h) {
    ht += c;
    auto it = r.find(g);
    if (it != r.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [g, c] : r) rt += c;
  return f1(overlap, ht, rt);
}

double rouge_l_f1(std::string_view hypothesis, std::string_view reference) {
  const auto h = metric_tokenize(hypothesis);
  const auto r = metric_tokenize(reference);
  std::vector<std::vector<int>> lcs(h.size() + 1, std::vector<int>(r.size() + 1, 0));
  for (size_t i = 1; i <= h.size(); ++i) {
    for (size_t j = 1; j <= r.size(); ++j) {
      lcs[i][j] = h[i - 1] == r[j - 1] ? lcs[i - 1][j - 1] + 1
                                       : std::max(lcs[i - 1][j], lcs[i][j - 1]);
    }
  }
  return f1(lcs[h.size()][r.size()], static_cast<double>(h.size()), static_cast<double>(r.size()));
}

LexicalScores lexical_similarity(const std::vector<std::string>& generated,
                                 const std::vector<std::vector<std::string>>& references) {
  check_lengths(generated.size(), references.size());
  LexicalScores s;
  s.bleu = corpus_bleu(generated, references);
  for (size_t i = 0; i < generated.size(); ++i) {
    double r1 = 0.0, rl = 0.0;
    for (const auto& ref : references[i]) {
      r1 = std::max(r1, rouge_n_f1(generated[i], ref, 1));
      rl = std::max(rl, rouge_l_f1(generated[i], ref));
    }
    s.rouge1 += r1;
    s.rougeL += rl;
  }
  s.rouge1 /= static_cast<double>(generated.size());
  s.rougeL /= static_cast<double>(generated.size());
  return s;
}

Matrix HashedTrigramEmbedder::embed(const std::vector<std::string>& tokens) const {
  const Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
  Matrix base = Matrix::Zero(n, dim_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string padded = "#" + tokens[i] + "#";
    for (size_t c = 0; c + 3 <= padded.size(); ++c) {
      base(i, text::fnv1a32(std::string_view(padded).substr(c, 3)) % dim_) += 1.0;
    }
    if (padded.size() < 3) base(i, text::fnv1a32(padded) % dim_) += 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = base.row(i).norm();
    if (norm > 0) base.row(i) /= norm;
  }
  Matrix out = base;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) out.row(i) += 0.5 * base.row(i - 1);
    if (i + 1 < n) out.row(i) += 0.5 * base.row(i + 1);
    const double norm = out.row(i).norm();
    if (norm > 0) out.row(i) /= norm;
  }
  return out;
}

double greedy_match_f1(std::string_view hypothesis, std::string_view reference,
                       const TokenEmbedder& embedder) {
  const auto h = metric_tokenize(hypothesis);
  const auto r = metric_tokenize(reference);
  if (h.empty() || r.empty()) return 0.0;
  const Matrix eh = embedder.embed(h);
  const Matrix er = embedder.embed(r);
  const Matrix sim = eh * er.transpose();
  const double precision = sim.rowwise().maxCoeff().mean();
  const double recall = sim.colwise().maxCoeff().mean();
  if (precision + recall <= 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

std::optional<SemanticScore> semantic_similarity(
    const std::vector<std::string>& generated,
    const std::vector<std::vector<std::string>>& references, const TokenEmbedder* embedder) {
  if (embedder == nullptr) return std::nullopt;
  check_lengths(generated.size(), references.size());
  SemanticScore s;
  for (size_t i = 0; i < generated.size(); ++i) {
    if (metric_tokenize(generated[i]).empty()) {
      ++s.empty_hypotheses;
      continue;
    }
    double best = 0.0;
    for (const auto& ref : references[i]) best = std::max(best, greedy_match_f1(generated[i], ref, *embedder));
    s.score += best;
  }
  s.score /= static_cast<double>(generated.size());
  return s;
}

double label_accuracy(const std::vector<std::string>& predictions,
                      const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size()) {
    throw InvalidInput("prediction and gold label counts differ");
  }
  if (golds.empty()) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < golds.size(); ++i) correct += predictions[i] == golds[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(golds.size());
}

}  // namespace graphnle
