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
#include <memory>

#include <json.hpp>

#include "esb/services/clients.hpp"
#include "esb/services/searcher.hpp"

namespace esb {

/// Entry point of the online server. Runs recommender, searcher, ranker
/// and the product summary fetch in that order and returns either a full
/// response or a StageFailure, never a partial product list.
///
/// The `planer` stage is the planer's own work: its handler time minus
/// the wall time of the three downstream calls and the product_db stage.
class Planer : public IndexHolder {
 public:
  Planer(std::unique_ptr<RecommenderClient> recommender, std::unique_ptr<SearcherClient> searcher,
         std::unique_ptr<RankerClient> ranker);

  SearchResponse handle(const SearchRequest& request) const;
  nlohmann::json stats() const;

 private:
  std::unique_ptr<RecommenderClient> recommender_;
  std::unique_ptr<SearcherClient> searcher_;
  std::unique_ptr<RankerClient> ranker_;
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> failures_{0};
};

}  // namespace esb
