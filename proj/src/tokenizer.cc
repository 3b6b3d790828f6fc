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

#include "graphnle/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "graphnle/common.h"
#include "graphnle/text.h"

namespace graphnle {

Vocabulary::Vocabulary() {
  for (const char* t : {"[PAD]", "[UNK]", "[BOS]", "[EOS]"}) add(t);
}

int Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const int id = size();
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  Vocabulary v;
  if (lines.size() < 4 || lines[0] != "[PAD]" || lines[3] != "[EOS]") {
    throw ParseError(path + ": vocabulary must start with the special tokens");
  }
  for (size_t i = 4; i < lines.size(); ++i) v.add(lines[i]);
  return v;
}

std::vector<std::string> WordPieceTokenizer::pre_tokenize(std::string_view s) {
  std::vector<std::string> words;
  for (const auto& chunk : text::split_whitespace(text::to_lower(s))) {
    std::string cur;
    for (char c : chunk) {
      if (std::ispunct(static_cast<unsigned char>(c))) {
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
        words.emplace_back(1, c);
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
  }
  return words;
}

std::vector<std::string> WordPieceTokenizer::segment_word(
    const std::string& word) const {
  std::vector<std::string> pieces;
  size_t start = 0;
  while (start < word.size()) {
    size_t end = word.size();
    std::string found;
    while (end > start) {
      std::string candidate = word.substr(start, end - start);
      if (start > 0) candidate = std::string(kContinuationPrefix) + candidate;
      if (vocab_.contains(candidate)) {
        found = std::move(candidate);
        break;
      }
      --end;
    }
    if (found.empty()) return {vocab_.token(kUnkId)};
    pieces.push_back(std::move(found));
    start = end;
  }
  return pieces;
}

std::vector<WordPieces> WordPieceTokenizer::segment(std::string_view s) const {
  std::vector<WordPieces> out;
  for (auto& w : pre_tokenize(s)) {
    WordPieces wp;
    wp.pieces = segment_word(w);
    wp.word = std::move(w);
    out.push_back(std::move(wp));
  }
  return out;
}

std::vector<std::string> WordPieceTokenizer::tokenize(std::string_view s) const {
  std::vector<std::string> out;
  for (auto& wp : segment(s)) {
    for (auto& p : wp.pieces) out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> WordPieceTokenizer::to_ids(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab_.id(t));
  return ids;
}

std::vector<int> WordPieceTokenizer::encode(std::string_view s) const {
  return to_ids(tokenize(s));
}

std::string WordPieceTokenizer::decode(const std::vector<int>& ids) const {
  std::vector<std::string> words;
  for (int id : ids) {
    if (id < 0 || id >= vocab_.size() || Vocabulary::is_special(id)) continue;
    const std::string& tok = vocab_.token(id);
    if (text::starts_with(tok, kContinuationPrefix) && !words.empty()) {
      words.back() += tok.substr(kContinuationPrefix.size());
    } else {
      words.push_back(tok);
    }
  }
  std::string out;
  for (const auto& w : words) {
    const bool attach = w.size() == 1 && std::string_view(".,!?;:").find(w[0]) !=
                                             std::string_view::npos;
    if (!out.empty() && !attach) out += ' ';
    out += w;
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int max_piece_len) {
  std::set<std::string> words;
  for (const auto& t : texts) {
    for (auto& w : WordPieceTokenizer::pre_tokenize(t)) words.insert(std::move(w));
  }
  std::set<std::string> pieces;
  const size_t whole_limit = static_cast<size_t>(max_piece_len) * 2;
  for (const auto& w : words) {
    if (w.size() <= whole_limit) {
      pieces.insert(w);
      continue;
    }
    for (size_t i = 0; i < w.size(); i += max_piece_len) {
      std::string p = w.substr(i, max_piece_len);
      pieces.insert(i == 0 ? p : std::string(kContinuationPrefix) + p);
    }
  }
  Vocabulary v;
  for (const auto& p : pieces) v.add(p);
  return v;
}

}  // namespace graphnle
