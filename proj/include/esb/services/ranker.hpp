// Copyright 2026 The esbench Authors
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

#pragma once

#include <atomic>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "esb/preference_net.hpp"
#include "esb/services/searcher.hpp"

namespace esb {

struct RankerOptions {
  /// Route weights⊙features through a small MLP instead of summing them.
  bool score_net = false;
  std::uint32_t score_net_hidden = 16;
  std::uint64_t score_net_seed = 11;
};

/// Plain dot-product score of one product.
double dot_score(std::span<const double> weights, const RankVector& features);

/// Sorts by score descending, ties by product id ascending.
void sort_ranked(std::vector<RankedProduct>& ranked);

class Ranker : public IndexHolder {
 public:
  explicit Ranker(RankerOptions options = {});

  /// Throws ShapeError for a weight vector of the wrong length and
  /// LookupError for ids missing from the rank forward index.
  RankResponse handle(std::span<const ProductId> product_ids,
                      std::span<const double> preference_weights) const;
  nlohmann::json stats() const;

 private:
  double score(std::span<const double> weights, const RankVector& features) const;

  RankerOptions options_;
  std::optional<PreferenceNet> score_net_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

}  // namespace esb
