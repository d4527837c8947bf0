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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>

#include "esb/datagen.hpp"
#include "esb/index.hpp"
#include "esb/services/stack.hpp"

namespace esb::testing {

/// Small catalog that builds and trains in well under a second.
inline CatalogConfig small_catalog(std::int64_t products = 200, int categories = 5) {
  CatalogConfig c;
  c.product_count = products;
  c.attribute_field_count = 8;
  c.user_count = 12;
  c.category_count = categories;
  c.vocabulary_size = 300;
  c.brand_count = 8;
  c.seed = 5;
  return c;
}

inline QueryLogConfig small_logs(std::int64_t count = 600) {
  QueryLogConfig q;
  q.count = count;
  q.seed = 9;
  return q;
}

struct World {
  CatalogConfig config;
  std::vector<ProductRecord> catalog;
  std::vector<UserRecord> users;
  std::vector<QueryLogEntry> logs;
  TierAssignment tiers;
  std::shared_ptr<const IndexSet> indexes;

  explicit World(CatalogConfig c = small_catalog(), QueryLogConfig q = small_logs())
      : config(c),
        catalog(generate_catalog(c)),
        users(generate_users(c)),
        logs(generate_query_logs(catalog, users, q)),
        tiers(assign_tiers(catalog)),
        indexes(std::make_shared<const IndexSet>(build_indexes(catalog, tiers))) {}

  ClassifierShape classifier_shape() const {
    ClassifierShape s;
    s.buckets = 1u << 12;
    s.dim = 8;
    s.categories = static_cast<std::uint32_t>(config.category_count);
    return s;
  }

  /// Untrained but deterministic models of a small size.
  ServingModels models(std::uint32_t hidden = 16) const {
    ServingModels m;
    m.classifier = TextClassifier::initialized(classifier_shape(), 1);
    m.preference = PreferenceNet::initialized(
        {static_cast<std::uint32_t>(kPreferenceInputDim), hidden, static_cast<std::uint32_t>(kRankFeatureDim)}, 2);
    return m;
  }

  std::shared_ptr<const UserStore> user_store() const { return std::make_shared<const UserStore>(users); }
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("esb-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Sentinel models: their outputs encode the version they were built for, so
// a response can be checked against the version it claims to come from.

inline constexpr std::uint32_t kSentinelCategories = 7;

inline TextClassifier sentinel_classifier(std::uint64_t version) {
  auto model = TextClassifier(ClassifierShape{64, 1, kSentinelCategories, 2});
  for (float& e : model.embeddings()) e = 1.0f;
  model.output_weights()[version % kSentinelCategories] = 20.0f;
  return model;
}

inline std::uint64_t sentinel_category(std::span<const double> probs) {
  return static_cast<std::uint64_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

inline PreferenceNet sentinel_preference(std::uint64_t version) {
  PreferenceNet net({static_cast<std::uint32_t>(kPreferenceInputDim), 1,
                     static_cast<std::uint32_t>(kRankFeatureDim)});
  const double code = static_cast<double>(version % 97 + 1) / 100.0;
  for (float& b : net.biases(1)) b = static_cast<float>(std::log(code / (1.0 - code)));
  return net;
}

/// Inverse of sentinel_preference, modulo 97.
inline std::uint64_t sentinel_code(std::span<const double> weights) {
  return static_cast<std::uint64_t>(std::lround(weights.front() * 100.0)) - 1;
}

}  // namespace esb::testing
