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

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "esb/index.hpp"
#include "esb/services/types.hpp"

namespace esb {

class Recommender;
class Searcher;
class Ranker;

// The planer talks to its three downstream services through these
// interfaces. Local implementations call the handlers directly; Http
// implementations go over the wire. Both raise StageFailure on error.

class RecommenderClient {
 public:
  virtual ~RecommenderClient() = default;
  virtual RecommendResponse recommend(UserId user_id, const std::string& query_text) = 0;
};

class SearcherClient {
 public:
  virtual ~SearcherClient() = default;
  virtual QueryResponse query(const std::vector<std::string>& tokens,
                              std::span<const double> category_probs, std::size_t limit) = 0;
};

class RankerClient {
 public:
  virtual ~RankerClient() = default;
  virtual RankResponse rank(std::span<const ProductId> product_ids,
                            std::span<const double> preference_weights) = 0;
};

std::unique_ptr<RecommenderClient> local_client(const Recommender& recommender);
std::unique_ptr<SearcherClient> local_client(const Searcher& searcher);
std::unique_ptr<RankerClient> local_client(const Ranker& ranker);

/// host:port plus per-call timeout.
struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
  std::chrono::milliseconds timeout{2000};

  std::string url() const { return "http://" + host + ":" + std::to_string(port); }
};

std::unique_ptr<RecommenderClient> http_recommender_client(const Endpoint& endpoint);
std::unique_ptr<SearcherClient> http_searcher_client(const Endpoint& endpoint);
std::unique_ptr<RankerClient> http_ranker_client(const Endpoint& endpoint);

/// Client-side view of the planer, used by the load generator.
class PlanerClient {
 public:
  virtual ~PlanerClient() = default;
  virtual SearchResponse search(const SearchRequest& request) = 0;
};

class Planer;
std::unique_ptr<PlanerClient> local_client(const Planer& planer);
std::unique_ptr<PlanerClient> http_planer_client(const Endpoint& endpoint);

// Control-plane calls used by the trainer, the indexer and the CLI.

/// POST /reload. Rethrows StaleModelError and CorruptionError from the
/// service; transport problems surface as StageFailure.
ReloadAck http_reload(const Endpoint& endpoint, std::span<const std::uint8_t> artifact);

/// POST /indexes with an ESBIDX1 snapshot. Returns the installed checksum.
std::uint64_t http_install_indexes(const Endpoint& endpoint, std::span<const std::uint8_t> snapshot);

/// GET /health; false on any failure.
bool http_health(const Endpoint& endpoint);

/// GET /stats.
nlohmann::json http_stats(const Endpoint& endpoint);

}  // namespace esb
