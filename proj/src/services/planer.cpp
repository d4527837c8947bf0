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

#include "esb/services/planer.hpp"

#include "esb/text.hpp"

namespace esb {
namespace {

template <typename F>
auto call_stage(const char* service, std::int64_t& elapsed_us, F&& body) -> decltype(body()) {
  const std::int64_t start = monotonic_us();
  try {
    auto result = body();
    elapsed_us += monotonic_us() - start;
    return result;
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(service, e.code(), e.what());
  } catch (const std::exception& e) {
    throw StageFailure(service, "internal", e.what());
  }
}

}  // namespace

Planer::Planer(std::unique_ptr<RecommenderClient> recommender,
               std::unique_ptr<SearcherClient> searcher, std::unique_ptr<RankerClient> ranker)
    : recommender_(std::move(recommender)),
      searcher_(std::move(searcher)),
      ranker_(std::move(ranker)) {}

SearchResponse Planer::handle(const SearchRequest& request) const {
  const std::int64_t start = monotonic_us();
  ++requests_;
  try {
    if (request.limit == 0) throw StageFailure("planer", "precondition", "limit must be at least 1");
    const auto tokens = tokenize(normalize_query(request.query_text));
    std::int64_t downstream_us = 0;

    const RecommendResponse recommended = call_stage("recommender", downstream_us, [&] {
      return recommender_->recommend(request.user_id, request.query_text);
    });
    const QueryResponse found = call_stage("searcher", downstream_us, [&] {
      return searcher_->query(tokens, recommended.category_probs, request.limit);
    });
    const RankResponse ranked = call_stage("ranker", downstream_us, [&] {
      return ranker_->rank(found.product_ids, recommended.preference_weights);
    });

    SearchResponse response;
    const std::int64_t db_start = monotonic_us();
    try {
      const auto indexes = require_indexes("planer");
      response.products.reserve(ranked.ranked.size());
      response.scores.reserve(ranked.ranked.size());
      for (const RankedProduct& r : ranked.ranked) {
        response.products.push_back({r.product_id, indexes->summary.at(r.product_id)});
        response.scores.push_back(r.score);
      }
    } catch (const Error& e) {
      throw StageFailure("product_db", e.code(), e.what());
    }
    const std::int64_t db_us = monotonic_us() - db_start;

    response.request_id = request.request_id;
    response.model_version = recommended.model_version;
    response.timings.reserve(stage_names().size());
    response.timings.push_back({"planer", start, 0});
    for (const auto* part : {&recommended.timings, &found.timings, &ranked.timings})
      response.timings.insert(response.timings.end(), part->begin(), part->end());
    response.timings.push_back({"product_db", db_start, db_us});

    const std::int64_t end = monotonic_us();
    response.planer_elapsed_us = end - start;
    response.timings.front().duration_us =
        std::max<std::int64_t>(0, response.planer_elapsed_us - downstream_us - db_us);
    return response;
  } catch (...) {
    ++failures_;
    throw;
  }
}

nlohmann::json Planer::stats() const {
  const auto indexes = this->indexes();
  return {{"service", "planer"},
          {"requests", requests_.load()},
          {"failures", failures_.load()},
          {"products", indexes ? indexes->summary.size() : 0},
          {"index_checksum", index_checksum()}};
}

}  // namespace esb
