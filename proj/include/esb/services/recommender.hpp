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
#include <mutex>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "esb/artifact.hpp"
#include "esb/services/inference_queue.hpp"
#include "esb/services/snapshot.hpp"
#include "esb/services/types.hpp"

namespace esb {

/// In-memory keyed user database: user id -> feature vector.
class UserStore {
 public:
  explicit UserStore(const std::vector<UserRecord>& users);

  /// nullptr for unknown users.
  const std::vector<float>* find(UserId id) const;
  std::size_t size() const { return features_.size(); }

 private:
  std::unordered_map<UserId, std::vector<float>> features_;
};

template <typename Model>
struct Versioned {
  Model model;
  std::uint64_t version = 0;
};

struct RecommenderOptions {
  std::size_t serving_threads = 1;
};

/// Query parsing, user lookup, category prediction and preference
/// inference. Each model is swapped atomically and independently; one
/// request reads each model pointer exactly once.
class Recommender {
 public:
  Recommender(std::shared_ptr<const UserStore> users, TextClassifier classifier,
              std::uint64_t classifier_version, PreferenceNet preference,
              std::uint64_t preference_version, RecommenderOptions options = {});

  /// Throws StageFailure(recommender.user_db, not_found) for unknown users.
  RecommendResponse handle(UserId user_id, std::string_view query_text) const;

  /// Installs a newer artifact. Throws StaleModelError when the version is
  /// not above the current one and CorruptionError on a bad artifact.
  ReloadAck reload(std::span<const std::uint8_t> artifact);

  ModelVersions versions() const;
  std::shared_ptr<const Versioned<TextClassifier>> classifier() const { return classifier_.load(); }
  std::shared_ptr<const Versioned<PreferenceNet>> preference() const { return preference_.load(); }
  nlohmann::json stats() const;

 private:
  std::shared_ptr<const UserStore> users_;
  Snapshot<Versioned<TextClassifier>> classifier_;
  Snapshot<Versioned<PreferenceNet>> preference_;
  std::mutex reload_mu_;
  mutable InferenceQueue serving_;
  mutable std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> reloads_accepted_{0};
  std::atomic<std::uint64_t> reloads_rejected_{0};
};

}  // namespace esb
