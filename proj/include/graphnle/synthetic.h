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

#ifndef GRAPHNLE_SYNTHETIC_H_
#define GRAPHNLE_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "graphnle/dataset.h"

namespace graphnle {

// Small NLI-style corpus with templated explanations. The label is a
// deterministic function of the two parts, so a tiny model can learn it.
// Records are in raw (pre-reformulation) form for Task::kNli.
std::vector<RawRecord> make_toy_nli(int count, uint64_t seed);

}  // namespace graphnle

#endif  // GRAPHNLE_SYNTHETIC_H_
