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

#include "esb/services/searcher.hpp"

#include <algorithm>

namespace esb {

void IndexHolder::install_indexes(std::shared_ptr<const IndexSet> indexes) {
  const std::uint64_t checksum = indexes->checksum();
  indexes_.store(std::move(indexes));
  checksum_.store(checksum);
}

std::shared_ptr<const IndexSet> IndexHolder::require_indexes(const char* service) const {
  auto indexes = indexes_.load();
  if (!indexes) throw PreconditionError(std::string(service) + " has no indexes installed");
  return indexes;
}

void prioritize_category(std::vector<ProductId>& ids, const IndexSet& indexes,
                         std::span<const double> category_probs) {
  if (category_probs.empty()) return;
  const auto top = static_cast<CategoryId>(
      std::max_element(category_probs.begin(), category_probs.end()) - category_probs.begin());
  std::stable_partition(ids.begin(), ids.end(),
                        [&](ProductId id) { return indexes.doc(id).category_id == top; });
}

QueryResponse Searcher::handle(const std::vector<std::string>& tokens,
                               std::span<const double> category_probs, std::size_t limit) const {
  const auto indexes = require_indexes("searcher");
  ++requests_;

  TierSearchTrace trace;
  const std::int64_t begin = monotonic_us();
  QueryResponse response;
  response.product_ids = tier_search(*indexes, tokens, limit, &trace);
  const std::int64_t searched = monotonic_us();
  prioritize_category(response.product_ids, *indexes, category_probs);
  const std::int64_t resort_us = monotonic_us() - searched;

  // Tiers that were skipped still report a zero-length stage so every
  // response carries the full stage list. The re-sort is charged to the
  // last tier that ran.
  static constexpr const char* kStage[3] = {"searcher.high", "searcher.medium", "searcher.low"};
  std::int64_t cursor = begin;
  int last_probed = -1;
  for (int t = 0; t < 3; ++t)
    if (trace.probed[t]) last_probed = t;
  for (int t = 0; t < 3; ++t) {
    response.probed[t] = trace.probed[t];
    if (trace.probed[t]) {
      ++probes_[t];
      std::int64_t duration = trace.duration_us[t];
      if (t == last_probed) duration += resort_us;
      response.timings.push_back({kStage[t], trace.start_us[t], duration});
      cursor = trace.start_us[t] + duration;
    } else {
      response.timings.push_back({kStage[t], cursor, 0});
    }
  }
  return response;
}

nlohmann::json Searcher::stats() const {
  nlohmann::json doc_counts = nullptr;
  if (auto indexes = this->indexes()) {
    doc_counts = {{"high", indexes->tier(Tier::High).doc_count()},
                  {"medium", indexes->tier(Tier::Medium).doc_count()},
                  {"low", indexes->tier(Tier::Low).doc_count()}};
  }
  return {{"service", "searcher"},
          {"requests", requests_.load()},
          {"probes", {{"high", probes_[0].load()}, {"medium", probes_[1].load()}, {"low", probes_[2].load()}}},
          {"doc_counts", doc_counts},
          {"index_checksum", index_checksum()}};
}

}  // namespace esb
