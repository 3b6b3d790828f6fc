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

#ifndef GRAPHNLE_COMMON_H_
#define GRAPHNLE_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace graphnle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Thrown for violated preconditions on caller-supplied data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a persisted artifact (record file, snapshot, graph, checkpoint)
// cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open range [begin, end) of token indices.
struct IndexRange {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool contains(int i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
  friend auto operator<=>(const IndexRange&, const IndexRange&) = default;
};

enum class ExplanationType { kHighlightToken, kTokenInteraction, kSpanInteraction };

std::string_view to_string(ExplanationType type);
ExplanationType parse_explanation_type(std::string_view name);

}  // namespace graphnle

#endif  // GRAPHNLE_COMMON_H_
