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
#include <filesystem>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "esb/common.hpp"

namespace esb {

using FieldList = std::vector<std::pair<std::string, std::string>>;

/// Knobs for the synthetic catalog and user population.
struct CatalogConfig {
  std::int64_t product_count = 10000;
  int attribute_field_count = 32;
  std::int64_t user_count = 100;
  int category_count = 20;
  int vocabulary_size = 5000;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 42;

  int title_length = 6;
  int brand_count = 64;
  // Probability that a title token is drawn from the cross-category pool
  // instead of the product's own category vocabulary. 0 gives disjoint
  // per-category vocabularies.
  double shared_token_rate = 0.2;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

struct QueryLogConfig {
  std::int64_t count = 20000;
  double noise_rate = 0.1;
  int min_query_tokens = 2;
  int max_query_tokens = 4;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Number of fields in the six always-present product attributes
/// (id, title, category, brand, color, price).
inline constexpr int kNamedProductFields = 6;

/// Dimensionality of the numeric user feature vector stored in the
/// `embedding` profile field.
inline constexpr std::size_t kUserFeatureDim = 16;

struct ProductRecord {
  ProductId product_id = 0;
  std::vector<std::string> title;
  CategoryId category_id = 0;
  std::string brand;
  std::string color;
  double price = 0.0;
  double popularity = 0.0;
  FieldList extra_fields;

  int field_count() const {
    return kNamedProductFields + static_cast<int>(extra_fields.size());
  }
  /// Lowercased whitespace tokens of title, brand and color.
  std::vector<std::string> index_tokens() const;
};

struct UserRecord {
  UserId user_id = 0;
  FieldList profile_fields;
  std::vector<double> latent_preference;

  /// Parses the `embedding` profile field. Throws LookupError if absent.
  std::vector<float> feature_vector() const;
};

struct QueryLogEntry {
  UserId user_id = 0;
  std::vector<std::string> query_text;
  ProductId clicked_product_id = 0;
  CategoryId clicked_category_id = 0;

  std::string joined_query() const;
};

enum class Tier : std::uint8_t { High = 0, Medium = 1, Low = 2 };

const char* tier_name(Tier tier);
Tier parse_tier(const std::string& name);

/// Popularity tiers. Medium and Low partition the catalog; High is the
/// top slice of Medium. Each list is in descending popularity order.
struct TierAssignment {
  std::vector<ProductId> high;
  std::vector<ProductId> medium;
  std::vector<ProductId> low;

  std::size_t size() const { return medium.size() + low.size(); }
  /// Members of the given search tier (High returns the High subset).
  const std::vector<ProductId>& members(Tier tier) const;
};

std::vector<ProductRecord> generate_catalog(const CatalogConfig& config);
std::vector<UserRecord> generate_users(const CatalogConfig& config);
std::vector<QueryLogEntry> generate_query_logs(const std::vector<ProductRecord>& catalog,
                                               const std::vector<UserRecord>& users,
                                               const QueryLogConfig& config);
TierAssignment assign_tiers(const std::vector<ProductRecord>& catalog);

/// Numeric rank features: [price / max_price, popularity, brand one-hot (4),
/// color one-hot (4)]; the one-hot slots are chosen by hashing.
std::array<float, kRankFeatureDim> rank_feature_vector(const ProductRecord& product,
                                                       double max_price);
std::vector<std::array<float, kRankFeatureDim>> rank_feature_matrix(
    const std::vector<ProductRecord>& catalog);

/// Deterministic pronounceable token for a vocabulary index.
std::string vocabulary_word(int index);

// ---- ndjson / csv files ------------------------------------------------

std::string to_ndjson_line(const ProductRecord& p);
std::string to_ndjson_line(const UserRecord& u);
std::string to_ndjson_line(const QueryLogEntry& e);

void write_catalog(const std::filesystem::path& path, const std::vector<ProductRecord>& catalog);
void write_users(const std::filesystem::path& path, const std::vector<UserRecord>& users);
void write_logs(const std::filesystem::path& path, const std::vector<QueryLogEntry>& logs);
void write_tiers(const std::filesystem::path& path, const TierAssignment& tiers);

std::vector<ProductRecord> read_catalog(const std::filesystem::path& path);
std::vector<UserRecord> read_users(const std::filesystem::path& path);
std::vector<QueryLogEntry> read_logs(const std::filesystem::path& path);
TierAssignment read_tiers(const std::filesystem::path& path);

QueryLogEntry parse_log_line(const std::string& line);

}  // namespace esb
