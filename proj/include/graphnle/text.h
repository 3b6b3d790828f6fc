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

#ifndef GRAPHNLE_TEXT_H_
#define GRAPHNLE_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace graphnle::text {

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Lowercases and removes leading/trailing ASCII punctuation.
std::string normalize_word(std::string_view word);

// Case-insensitive whole-word search after punctuation stripping.
bool contains_word(std::string_view text, std::string_view word);

uint64_t fnv1a64(std::string_view s);
uint32_t fnv1a32(std::string_view s);

}  // namespace graphnle::text

#endif  // GRAPHNLE_TEXT_H_
