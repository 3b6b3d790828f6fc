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

#include "graphnle/synthetic.h"

#include <array>
#include <random>
#include <string>
#include <utility>

namespace graphnle {

namespace {

constexpr std::array<const char*, 10> kNouns = {
    "cat",    "dog",     "woman",     "farmer",    "child",
    "horse",  "teacher", "porcupine", "astronaut", "musician"};
constexpr std::array<std::pair<const char*, const char*>, 6> kAntonyms = {{
    {"awake", "asleep"},
    {"happy", "sad"},
    {"tall", "short"},
    {"wet", "dry"},
    {"quiet", "noisy"},
    {"hungry", "satisfied"},
}};
constexpr std::array<const char*, 4> kPlaces = {"home", "school", "park", "beach"};

}  // namespace

std::vector<RawRecord> make_toy_nli(int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](size_t n) {
    return static_cast<size_t>(std::uniform_int_distribution<size_t>(0, n - 1)(rng));
  };
  std::vector<RawRecord> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::string noun = kNouns[pick(kNouns.size())];
    const auto& pair = kAntonyms[pick(kAntonyms.size())];
    const bool flip = pick(2) == 1;
    const std::string adj = flip ? pair.second : pair.first;
    const std::string opposite = flip ? pair.first : pair.second;
    const std::string place = kPlaces[pick(kPlaces.size())];

    RawRecord r;
    r.id = "toy-" + std::to_string(i);
    r.part_a = "The " + noun + " is " + adj + " at the " + place + ".";
    switch (i % 3) {
      case 0:
        r.gold_label = "entailment";
        r.part_b = "The " + noun + " is " + adj + ".";
        r.gold_nle = {"the " + noun + " is " + adj + " at the " + place + ".",
                      "if the " + noun + " is " + adj + " at the " + place +
                          " then the " + noun + " is " + adj + "."};
        break;
      case 1:
        r.gold_label = "contradiction";
        r.part_b = "The " + noun + " is " + opposite + ".";
        r.gold_nle = {"the " + noun + " cannot be " + adj + " and " + opposite +
                      " at the same time."};
        break;
      default: {
        std::string other = noun;
        while (other == noun) other = kNouns[pick(kNouns.size())];
        r.gold_label = "neutral";
        r.part_b = "The " + other + " is " + adj + ".";
        r.gold_nle = {"the " + other + " is not mentioned with the " + noun + "."};
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace graphnle
