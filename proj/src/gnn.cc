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

#include "graphnle/gnn.h"

namespace graphnle::gnn {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kGcn:
      return "gcn";
    case Variant::kGat:
      return "gat";
    case Variant::kSage:
      return "sage";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "gcn") return Variant::kGcn;
  if (name == "gat") return Variant::kGat;
  if (name == "sage") return Variant::kSage;
  throw InvalidInput("unknown GNN variant '" + std::string(name) + "' (valid: gcn, gat, sage)");
}

std::string_view to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidInput("unknown activation '" + std::string(name) + "' (valid: relu, identity)");
}

}  // namespace graphnle::gnn
