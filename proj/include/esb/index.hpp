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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "esb/common.hpp"
#include "esb/datagen.hpp"

namespace esb {

struct Posting {
  ProductId product_id = 0;
  std::uint32_t term_frequency = 0;

  bool operator==(const Posting&) const = default;
};

/// Per-product facts every index consults when ordering results.
struct DocInfo {
  CategoryId category_id = 0;
  double popularity = 0.0;
};

/// Token -> postings for one popularity tier. Postings are ordered by
/// descending popularity, then ascending product id.
class InvertedIndex {
 public:
  InvertedIndex() = default;
  explicit InvertedIndex(Tier tier) : tier_(tier) {}

  Tier tier() const { return tier_; }
  std::size_t doc_count() const { return members_.size(); }
  const std::vector<ProductId>& members() const { return members_; }
  std::size_t token_count() const { return lists_.size(); }

  /// Empty span for absent tokens.
  std::span<const Posting> postings(std::string_view token) const;

  /// Tokens in sorted order; for snapshots and tests.
  std::vector<std::string> sorted_tokens() const;

 private:
  friend class IndexBuilder;
  friend struct IndexSnapshotCodec;

  Tier tier_ = Tier::High;
  std::vector<ProductId> members_;
  std::unordered_map<std::string, std::vector<Posting>> lists_;
};

using RankVector = std::array<float, kRankFeatureDim>;

/// Slim forward index: product id -> numeric rank features.
class RankForwardIndex {
 public:
  const RankVector& at(ProductId id) const;
  bool contains(ProductId id) const { return rows_.count(id) != 0; }
  std::size_t size() const { return rows_.size(); }

 private:
  friend class IndexBuilder;
  friend struct IndexSnapshotCodec;
  std::unordered_map<ProductId, RankVector> rows_;
};

/// Full forward index: product id -> every attribute field as text.
class SummaryForwardIndex {
 public:
  const FieldList& at(ProductId id) const;
  bool contains(ProductId id) const { return rows_.count(id) != 0; }
  std::size_t size() const { return rows_.size(); }

 private:
  friend class IndexBuilder;
  friend struct IndexSnapshotCodec;
  std::unordered_map<ProductId, FieldList> rows_;
};

/// The indexer's three products, built together and published as a unit.
struct IndexSet {
  std::array<InvertedIndex, 3> inverted{InvertedIndex(Tier::High), InvertedIndex(Tier::Medium),
                                        InvertedIndex(Tier::Low)};
  RankForwardIndex rank;
  SummaryForwardIndex summary;
  std::unordered_map<ProductId, DocInfo> docs;

  const InvertedIndex& tier(Tier t) const { return inverted[static_cast<int>(t)]; }
  const DocInfo& doc(ProductId id) const;

  /// ESBIDX1 snapshot bytes. Deterministic for a given catalog and tiers.
  std::vector<std::uint8_t> serialize() const;
  static IndexSet deserialize(std::span<const std::uint8_t> bytes);
  /// FNV-1a 64 of the snapshot bytes.
  std::uint64_t checksum() const;
};

inline constexpr std::string_view kIndexMagic{"ESBIDX1\0", 8};

/// Summary field list for a product: the six named fields then the extras.
FieldList summary_fields(const ProductRecord& product);

/// Throws BuildError when the tiers do not describe the catalog.
IndexSet build_indexes(const std::vector<ProductRecord>& catalog, const TierAssignment& tiers);

struct TierSearchTrace {
  std::array<bool, 3> probed{};
  std::array<std::int64_t, 3> start_us{};
  std::array<std::int64_t, 3> duration_us{};
  std::array<std::size_t, 3> matches{};
};

inline constexpr std::size_t kDefaultSearchLimit = 100;

/// Searches High, Medium and Low in turn, skipping ids already found, and
/// stops after the first tier that brings the total to `limit`. Within a
/// tier, candidates match any query token and are ordered by
/// (distinct matched tokens desc, popularity desc, id asc).
std::vector<ProductId> tier_search(const IndexSet& indexes, const std::vector<std::string>& tokens,
                                   std::size_t limit, TierSearchTrace* trace = nullptr);

/// Rank vectors in request order. Throws LookupError naming an unknown id.
std::vector<RankVector> rank_features(const RankForwardIndex& index,
                                      std::span<const ProductId> product_ids);

}  // namespace esb
