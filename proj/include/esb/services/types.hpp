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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "esb/common.hpp"
#include "esb/datagen.hpp"
#include "esb/metrics.hpp"

namespace esb {

/// A failure attributed to one serving stage. Planer responses that carry
/// this error never include products.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, std::string code, const std::string& what)
      : Error(std::move(code), what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class StaleModelError : public Error {
 public:
  explicit StaleModelError(const std::string& what) : Error("stale", what) {}
};

struct SearchRequest {
  std::string request_id;
  UserId user_id = 0;
  std::string query_text;
  std::size_t limit = 100;
};

struct ModelVersions {
  std::uint64_t classifier = 0;
  std::uint64_t preference = 0;

  bool operator==(const ModelVersions&) const = default;
};

struct RecommendResponse {
  std::vector<double> category_probs;
  std::vector<double> preference_weights;
  std::vector<StageTiming> timings;
  ModelVersions model_version;
};

struct QueryResponse {
  std::vector<ProductId> product_ids;
  std::vector<StageTiming> timings;
  std::array<bool, 3> probed{};
};

struct RankedProduct {
  ProductId product_id = 0;
  double score = 0;

  bool operator==(const RankedProduct&) const = default;
};

struct RankResponse {
  std::vector<RankedProduct> ranked;
  std::vector<StageTiming> timings;
};

struct ProductSummary {
  ProductId product_id = 0;
  FieldList fields;

  bool operator==(const ProductSummary&) const = default;
};

struct SearchResponse {
  std::string request_id;
  std::vector<ProductSummary> products;
  std::vector<double> scores;
  std::vector<StageTiming> timings;
  ModelVersions model_version;
  // Planer handler wall time; the parent of every stage in `timings`.
  std::int64_t planer_elapsed_us = 0;
};

struct ReloadAck {
  std::string kind;
  std::uint64_t version = 0;
};

// JSON codecs. Field names match the type definitions above.
void to_json(nlohmann::json& j, const StageTiming& t);
void from_json(const nlohmann::json& j, StageTiming& t);
void to_json(nlohmann::json& j, const SearchRequest& r);
void from_json(const nlohmann::json& j, SearchRequest& r);
void to_json(nlohmann::json& j, const ModelVersions& v);
void from_json(const nlohmann::json& j, ModelVersions& v);
void to_json(nlohmann::json& j, const RecommendResponse& r);
void from_json(const nlohmann::json& j, RecommendResponse& r);
void to_json(nlohmann::json& j, const QueryResponse& r);
void from_json(const nlohmann::json& j, QueryResponse& r);
void to_json(nlohmann::json& j, const RankResponse& r);
void from_json(const nlohmann::json& j, RankResponse& r);
void to_json(nlohmann::json& j, const SearchResponse& r);
void from_json(const nlohmann::json& j, SearchResponse& r);
void to_json(nlohmann::json& j, const ReloadAck& a);
void from_json(const nlohmann::json& j, ReloadAck& a);

/// {"error": {"code", "stage", "message"}}
nlohmann::json error_body(const std::string& code, const std::string& stage,
                          const std::string& message);

/// SearchResponse without timings, for comparing result bodies.
nlohmann::json result_body(const SearchResponse& response);

}  // namespace esb
