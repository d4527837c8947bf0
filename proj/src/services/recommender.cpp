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

#include "esb/services/recommender.hpp"

#include "esb/text.hpp"

namespace esb {

UserStore::UserStore(const std::vector<UserRecord>& users) {
  for (const auto& u : users) features_.emplace(u.user_id, u.feature_vector());
}

const std::vector<float>* UserStore::find(UserId id) const {
  auto it = features_.find(id);
  return it == features_.end() ? nullptr : &it->second;
}

Recommender::Recommender(std::shared_ptr<const UserStore> users, TextClassifier classifier,
                         std::uint64_t classifier_version, PreferenceNet preference,
                         std::uint64_t preference_version, RecommenderOptions options)
    : users_(std::move(users)),
      classifier_(std::make_shared<const Versioned<TextClassifier>>(
          Versioned<TextClassifier>{std::move(classifier), classifier_version})),
      preference_(std::make_shared<const Versioned<PreferenceNet>>(
          Versioned<PreferenceNet>{std::move(preference), preference_version})),
      serving_(options.serving_threads) {}

RecommendResponse Recommender::handle(UserId user_id, std::string_view query_text) const {
  ++requests_;
  RecommendResponse response;
  auto timed = [&](const char* stage, auto&& body) {
    const std::int64_t start = monotonic_us();
    body();
    response.timings.push_back({stage, start, monotonic_us() - start});
  };

  std::string normalized;
  std::vector<std::string> tokens;
  timed("recommender.query_parse", [&] {
    normalized = normalize_query(query_text);
    // Spelling correction and query rewrite are identity here.
    tokens = tokenize(normalized);
  });

  const std::vector<float>* user = nullptr;
  timed("recommender.user_db", [&] { user = users_->find(user_id); });
  if (!user)
    throw StageFailure("recommender.user_db", "not_found",
                       "unknown user " + std::to_string(user_id));

  const auto classifier = classifier_.load();
  const auto preference = preference_.load();
  response.model_version = {classifier->version, preference->version};

  timed("recommender.classify", [&] {
    const auto probs = classifier->model.classify(normalized);
    response.category_probs.assign(probs.begin(), probs.end());
  });

  timed("recommender.serving", [&] {
    const auto query_vector = encode_query(tokens);
    const auto weights = serving_.run(
        [&] { return predict_weights(preference->model, *user, query_vector); });
    response.preference_weights.assign(weights.begin(), weights.end());
  });
  return response;
}

ReloadAck Recommender::reload(std::span<const std::uint8_t> artifact) {
  ModelArtifact header;
  try {
    header = inspect_artifact(artifact);
  } catch (const CorruptionError&) {
    ++reloads_rejected_;
    throw;
  }
  std::lock_guard lock(reload_mu_);
  const std::uint64_t current = header.kind == ModelKind::Classifier
                                    ? classifier_.load()->version
                                    : preference_.load()->version;
  if (header.version <= current) {
    ++reloads_rejected_;
    throw StaleModelError(std::string(model_kind_name(header.kind)) + " version " +
                          std::to_string(header.version) + " is not newer than " +
                          std::to_string(current));
  }
  if (header.kind == ModelKind::Classifier) {
    auto model = deserialize_classifier(artifact);
    classifier_.store(std::make_shared<const Versioned<TextClassifier>>(
        Versioned<TextClassifier>{std::move(model), header.version}));
  } else {
    auto model = deserialize_preference(artifact);
    if (model.input_size() != kPreferenceInputDim || model.output_size() != kRankFeatureDim) {
      ++reloads_rejected_;
      throw CorruptionError("preference artifact has incompatible input/output sizes");
    }
    preference_.store(std::make_shared<const Versioned<PreferenceNet>>(
        Versioned<PreferenceNet>{std::move(model), header.version}));
  }
  ++reloads_accepted_;
  return {model_kind_name(header.kind), header.version};
}

ModelVersions Recommender::versions() const {
  return {classifier_.load()->version, preference_.load()->version};
}

nlohmann::json Recommender::stats() const {
  const auto v = versions();
  return {{"service", "recommender"},
          {"requests", requests_.load()},
          {"model_version", v},
          {"users", users_->size()},
          {"serving_threads", serving_.worker_count()},
          {"reloads_accepted", reloads_accepted_.load()},
          {"reloads_rejected", reloads_rejected_.load()}};
}

}  // namespace esb
