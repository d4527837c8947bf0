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

#include "esb/services/types.hpp"

namespace esb {

using nlohmann::json;

void to_json(json& j, const StageTiming& t) {
  j = json{{"stage", t.stage}, {"start_us", t.start_us}, {"duration_us", t.duration_us}};
}

void from_json(const json& j, StageTiming& t) {
  t.stage = j.at("stage").get<std::string>();
  t.start_us = j.at("start_us").get<std::int64_t>();
  t.duration_us = j.at("duration_us").get<std::int64_t>();
}

void to_json(json& j, const SearchRequest& r) {
  j = json{{"request_id", r.request_id},
           {"user_id", r.user_id},
           {"query_text", r.query_text},
           {"limit", r.limit}};
}

void from_json(const json& j, SearchRequest& r) {
  r.request_id = j.at("request_id").get<std::string>();
  r.user_id = j.at("user_id").get<UserId>();
  r.query_text = j.at("query_text").get<std::string>();
  r.limit = j.value("limit", std::size_t{100});
}

void to_json(json& j, const ModelVersions& v) {
  j = json{{"classifier", v.classifier}, {"preference", v.preference}};
}

void from_json(const json& j, ModelVersions& v) {
  v.classifier = j.at("classifier").get<std::uint64_t>();
  v.preference = j.at("preference").get<std::uint64_t>();
}

void to_json(json& j, const RecommendResponse& r) {
  j = json{{"category_probs", r.category_probs},
           {"preference_weights", r.preference_weights},
           {"timings", r.timings},
           {"model_version", r.model_version}};
}

void from_json(const json& j, RecommendResponse& r) {
  r.category_probs = j.at("category_probs").get<std::vector<double>>();
  r.preference_weights = j.at("preference_weights").get<std::vector<double>>();
  r.timings = j.at("timings").get<std::vector<StageTiming>>();
  r.model_version = j.at("model_version").get<ModelVersions>();
}

void to_json(json& j, const QueryResponse& r) {
  j = json{{"product_ids", r.product_ids},
           {"timings", r.timings},
           {"probed", {{"high", r.probed[0]}, {"medium", r.probed[1]}, {"low", r.probed[2]}}}};
}

void from_json(const json& j, QueryResponse& r) {
  r.product_ids = j.at("product_ids").get<std::vector<ProductId>>();
  r.timings = j.at("timings").get<std::vector<StageTiming>>();
  const auto& p = j.at("probed");
  r.probed = {p.at("high").get<bool>(), p.at("medium").get<bool>(), p.at("low").get<bool>()};
}

void to_json(json& j, const RankResponse& r) {
  json ranked = json::array();
  for (const auto& p : r.ranked) ranked.push_back({{"product_id", p.product_id}, {"score", p.score}});
  j = json{{"ranked", std::move(ranked)}, {"timings", r.timings}};
}

void from_json(const json& j, RankResponse& r) {
  r.ranked.clear();
  for (const auto& p : j.at("ranked"))
    r.ranked.push_back({p.at("product_id").get<ProductId>(), p.at("score").get<double>()});
  r.timings = j.at("timings").get<std::vector<StageTiming>>();
}

void to_json(json& j, const SearchResponse& r) {
  json products = json::array();
  for (const auto& p : r.products) {
    json fields = json::object();
    for (const auto& [k, v] : p.fields) fields[k] = v;
    products.push_back(std::move(fields));
  }
  j = json{{"request_id", r.request_id},
           {"products", std::move(products)},
           {"scores", r.scores},
           {"timings", r.timings},
           {"model_version", r.model_version},
           {"planer_elapsed_us", r.planer_elapsed_us}};
}

void from_json(const json& j, SearchResponse& r) {
  r.request_id = j.at("request_id").get<std::string>();
  r.products.clear();
  for (const auto& p : j.at("products")) {
    ProductSummary s;
    for (auto it = p.begin(); it != p.end(); ++it) s.fields.emplace_back(it.key(), it.value().get<std::string>());
    s.product_id = std::stoll(p.at("product_id").get<std::string>());
    r.products.push_back(std::move(s));
  }
  r.scores = j.at("scores").get<std::vector<double>>();
  r.timings = j.at("timings").get<std::vector<StageTiming>>();
  r.model_version = j.at("model_version").get<ModelVersions>();
  r.planer_elapsed_us = j.value("planer_elapsed_us", std::int64_t{0});
}

void to_json(json& j, const ReloadAck& a) { j = json{{"kind", a.kind}, {"version", a.version}}; }

void from_json(const json& j, ReloadAck& a) {
  a.kind = j.at("kind").get<std::string>();
  a.version = j.at("version").get<std::uint64_t>();
}

json error_body(const std::string& code, const std::string& stage, const std::string& message) {
  return json{{"error", {{"code", code}, {"stage", stage}, {"message", message}}}};
}

json result_body(const SearchResponse& response) {
  json j = response;
  j.erase("timings");
  j.erase("planer_elapsed_us");
  return j;
}

}  // namespace esb
