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

#include "graphnle/text.h"

#include <algorithm>
#include <cctype>

#include "graphnle/common.h"

namespace graphnle {

std::string_view to_string(ExplanationType type) {
  switch (type) {
    case ExplanationType::kHighlightToken:
      return "highlight_token";
    case ExplanationType::kTokenInteraction:
      return "token_interaction";
    case ExplanationType::kSpanInteraction:
      return "span_interaction";
  }
  return "unknown";
}

ExplanationType parse_explanation_type(std::string_view name) {
  if (name == "highlight_token") return ExplanationType::kHighlightToken;
  if (name == "token_interaction") return ExplanationType::kTokenInteraction;
  if (name == "span_interaction") return ExplanationType::kSpanInteraction;
  throw InvalidInput("unknown explanation type '" + std::string(name) +
                     "' (valid: highlight_token, token_interaction, "
                     "span_interaction)");
}

namespace text {

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string normalize_word(std::string_view word) {
  size_t b = 0, e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  return to_lower(word.substr(b, e - b));
}

bool contains_word(std::string_view haystack, std::string_view word) {
  const std::string needle = normalize_word(word);
  if (needle.empty()) return false;
  for (const auto& w : split_whitespace(haystack)) {
    if (normalize_word(w) == needle) return true;
  }
  return false;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint32_t fnv1a32(std::string_view s) {
  uint32_t h = 2166136261U;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619U;
  }
  return h;
}

}  // namespace text
}  // namespace graphnle
