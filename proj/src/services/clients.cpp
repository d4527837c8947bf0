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

#include "esb/services/clients.hpp"

#include "esb/services/planer.hpp"
#include "esb/services/ranker.hpp"
#include "esb/services/recommender.hpp"
#include "esb/services/searcher.hpp"

namespace esb {
namespace {

class LocalRecommender final : public RecommenderClient {
 public:
  explicit LocalRecommender(const Recommender& r) : r_(r) {}
  RecommendResponse recommend(UserId user_id, const std::string& query_text) override {
    return r_.handle(user_id, query_text);
  }

 private:
  const Recommender& r_;
};

class LocalSearcher final : public SearcherClient {
 public:
  explicit LocalSearcher(const Searcher& s) : s_(s) {}
  QueryResponse query(const std::vector<std::string>& tokens, std::span<const double> category_probs,
                      std::size_t limit) override {
    return s_.handle(tokens, category_probs, limit);
  }

 private:
  const Searcher& s_;
};

class LocalRanker final : public RankerClient {
 public:
  explicit LocalRanker(const Ranker& r) : r_(r) {}
  RankResponse rank(std::span<const ProductId> product_ids,
                    std::span<const double> preference_weights) override {
    return r_.handle(product_ids, preference_weights);
  }

 private:
  const Ranker& r_;
};

class LocalPlaner final : public PlanerClient {
 public:
  explicit LocalPlaner(const Planer& p) : p_(p) {}
  SearchResponse search(const SearchRequest& request) override { return p_.handle(request); }

 private:
  const Planer& p_;
};

}  // namespace

std::unique_ptr<RecommenderClient> local_client(const Recommender& r) {
  return std::make_unique<LocalRecommender>(r);
}
std::unique_ptr<SearcherClient> local_client(const Searcher& s) { return std::make_unique<LocalSearcher>(s); }
std::unique_ptr<RankerClient> local_client(const Ranker& r) { return std::make_unique<LocalRanker>(r); }
std::unique_ptr<PlanerClient> local_client(const Planer& p) { return std::make_unique<LocalPlaner>(p); }

}  // namespace esb
