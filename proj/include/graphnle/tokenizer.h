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

#ifndef GRAPHNLE_TOKENIZER_H_
#define GRAPHNLE_TOKENIZER_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graphnle {

// Fixed ids of the special tokens; every vocabulary starts with them.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr std::string_view kContinuationPrefix = "##";

class Vocabulary {
 public:
  Vocabulary();

  int add(const std::string& token);
  int id(std::string_view token) const;  // kUnkId when absent.
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  static bool is_special(int id) { return id >= 0 && id <= kEosId; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// A whole word and the subtokens it was segmented into.
struct WordPieces {
  std::string word;
  std::vector<std::string> pieces;
};

// Greedy longest-match-first subword segmenter. Input is lowercased and
// punctuation characters become standalone words. Deterministic for a fixed
// vocabulary and safe to share between threads (all methods are const).
class WordPieceTokenizer {
 public:
  explicit WordPieceTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  static std::vector<std::string> pre_tokenize(std::string_view text);

  std::vector<WordPieces> segment(std::string_view text) const;
  std::vector<std::string> tokenize(std::string_view text) const;
  std::vector<int> encode(std::string_view text) const;
  std::vector<int> to_ids(const std::vector<std::string>& tokens) const;

  // Skips special tokens, merges continuation pieces and attaches trailing
  // punctuation to the previous word.
  std::string decode(const std::vector<int>& ids) const;

  const Vocabulary& vocab() const { return vocab_; }

 private:
  std::vector<std::string> segment_word(const std::string& word) const;

  Vocabulary vocab_;
};

// Builds a vocabulary over `texts`. Words up to `max_piece_len` * 2 characters
// are kept whole; longer words are stored as pieces of `max_piece_len`
// characters so that they segment into several subtokens.
Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int max_piece_len = 4);

}  // namespace graphnle

#endif  // GRAPHNLE_TOKENIZER_H_
