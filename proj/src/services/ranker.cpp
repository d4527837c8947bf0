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

#include "esb/services/ranker.hpp"

#include <algorithm>

#include "esb/kernels.hpp"

namespace esb {

double dot_score(std::span<const double> weights, const RankVector& features) {
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) s += weights[i] * features[i];
  return s;
}

void sort_ranked(std::vector<RankedProduct>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedProduct& a, const RankedProduct& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.product_id < b.product_id;
  });
}

Ranker::Ranker(RankerOptions options) : options_(options) {
  if (options_.score_net) {
    if (options_.score_net_hidden == 0) throw ConfigError("ranker.score_net_hidden", "must be positive");
    score_net_ = PreferenceNet::initialized(
        {static_cast<std::uint32_t>(kRankFeatureDim), options_.score_net_hidden, 1},
        options_.score_net_seed);
  }
}

double Ranker::score(std::span<const double> weights, const RankVector& features) const {
  if (!score_net_) return dot_score(weights, features);
  std::array<float, kRankFeatureDim> x{};
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(weights[i] * features[i]);
  return score_net_->forward(x)[0];
}

RankResponse Ranker::handle(std::span<const ProductId> product_ids,
                            std::span<const double> preference_weights) const {
  const std::int64_t start = monotonic_us();
  if (preference_weights.size() != kRankFeatureDim)
    throw ShapeError("preference weights have length " + std::to_string(preference_weights.size()) +
                     ", expected " + std::to_string(kRankFeatureDim));
  const auto indexes = require_indexes("ranker");
  ++requests_;

  RankResponse response;
  response.ranked.reserve(product_ids.size());
  for (ProductId id : product_ids)
    response.ranked.push_back({id, score(preference_weights, indexes->rank.at(id))});
  sort_ranked(response.ranked);
  response.timings.push_back({"ranker", start, monotonic_us() - start});
  return response;
}

nlohmann::json Ranker::stats() const {
  const auto indexes = this->indexes();
  return {{"service", "ranker"},
          {"requests", requests_.load()},
          {"score_net", options_.score_net},
          {"docs", indexes ? indexes->rank.size() : 0},
          {"index_checksum", index_checksum()}};
}

}  // namespace esb
