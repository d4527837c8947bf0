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

#include "esb/index.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "esb/binary_io.hpp"
#include "esb/hash.hpp"
#include "esb/text.hpp"

namespace esb {

namespace {

std::string format_price(double price) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << price;
  return os.str();
}

void sort_postings(std::vector<Posting>& postings,
                   const std::unordered_map<ProductId, DocInfo>& docs) {
  std::sort(postings.begin(), postings.end(), [&](const Posting& a, const Posting& b) {
    const double pa = docs.at(a.product_id).popularity;
    const double pb = docs.at(b.product_id).popularity;
    if (pa != pb) return pa > pb;
    return a.product_id < b.product_id;
  });
}

}  // namespace

std::span<const Posting> InvertedIndex::postings(std::string_view token) const {
  auto it = lists_.find(std::string(token));
  if (it == lists_.end()) return {};
  return it->second;
}

std::vector<std::string> InvertedIndex::sorted_tokens() const {
  std::vector<std::string> tokens;
  tokens.reserve(lists_.size());
  for (const auto& [token, _] : lists_) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

const RankVector& RankForwardIndex::at(ProductId id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw LookupError("unknown product id " + std::to_string(id));
  return it->second;
}

const FieldList& SummaryForwardIndex::at(ProductId id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw LookupError("unknown product id " + std::to_string(id));
  return it->second;
}

const DocInfo& IndexSet::doc(ProductId id) const {
  auto it = docs.find(id);
  if (it == docs.end()) throw LookupError("unknown product id " + std::to_string(id));
  return it->second;
}

FieldList summary_fields(const ProductRecord& product) {
  FieldList fields = {
      {"product_id", std::to_string(product.product_id)},
      {"title", join_tokens(product.title)},
      {"category_id", std::to_string(product.category_id)},
      {"brand", product.brand},
      {"color", product.color},
      {"price", format_price(product.price)},
  };
  fields.insert(fields.end(), product.extra_fields.begin(), product.extra_fields.end());
  return fields;
}

class IndexBuilder {
 public:
  static IndexSet build(const std::vector<ProductRecord>& catalog, const TierAssignment& tiers) {
    IndexSet set;
    std::unordered_map<ProductId, const ProductRecord*> by_id;
    for (const auto& p : catalog) {
      if (!by_id.emplace(p.product_id, &p).second)
        throw BuildError("duplicate product id " + std::to_string(p.product_id));
      set.docs.emplace(p.product_id, DocInfo{p.category_id, p.popularity});
    }
    check_tiers(by_id, tiers);

    for (Tier tier : {Tier::High, Tier::Medium, Tier::Low}) {
      InvertedIndex& index = set.inverted[static_cast<int>(tier)];
      index.members_ = tiers.members(tier);
      for (ProductId id : index.members_) {
        std::unordered_map<std::string, std::uint32_t> tf;
        for (auto& token : by_id.at(id)->index_tokens()) ++tf[token];
        for (auto& [token, count] : tf) index.lists_[token].push_back({id, count});
      }
      for (auto& [_, postings] : index.lists_) sort_postings(postings, set.docs);
    }

    double max_price = 0.0;
    for (const auto& p : catalog) max_price = std::max(max_price, p.price);
    for (const auto& p : catalog) {
      set.rank.rows_.emplace(p.product_id, rank_feature_vector(p, max_price));
      set.summary.rows_.emplace(p.product_id, summary_fields(p));
    }
    return set;
  }

 private:
  static void check_tiers(const std::unordered_map<ProductId, const ProductRecord*>& by_id,
                          const TierAssignment& tiers) {
    if (tiers.size() != by_id.size())
      throw BuildError("tier assignment covers " + std::to_string(tiers.size()) +
                       " products, catalog has " + std::to_string(by_id.size()));
    std::unordered_set<ProductId> seen;
    for (const auto* list : {&tiers.medium, &tiers.low}) {
      for (ProductId id : *list) {
        if (!by_id.count(id))
          throw BuildError("tier assignment names unknown product " + std::to_string(id));
        if (!seen.insert(id).second)
          throw BuildError("product " + std::to_string(id) + " assigned to two tiers");
      }
    }
    const std::unordered_set<ProductId> medium(tiers.medium.begin(), tiers.medium.end());
    for (ProductId id : tiers.high) {
      if (!medium.count(id))
        throw BuildError("high-tier product " + std::to_string(id) + " is not in the medium tier");
    }
  }
};

IndexSet build_indexes(const std::vector<ProductRecord>& catalog, const TierAssignment& tiers) {
  return IndexBuilder::build(catalog, tiers);
}

// ---- snapshot --------------------------------------------------------------

struct IndexSnapshotCodec {
  static constexpr std::uint32_t kFormatVersion = 1;

  static std::vector<std::uint8_t> encode(const IndexSet& set) {
    ByteWriter w;
    w.put_raw({reinterpret_cast<const std::uint8_t*>(kIndexMagic.data()), kIndexMagic.size()});
    w.put<std::uint32_t>(kFormatVersion);

    std::vector<ProductId> ids;
    ids.reserve(set.docs.size());
    for (const auto& [id, _] : set.docs) ids.push_back(id);
    std::sort(ids.begin(), ids.end());

    w.put<std::uint64_t>(ids.size());
    for (ProductId id : ids) {
      const DocInfo& doc = set.docs.at(id);
      w.put<std::int64_t>(id);
      w.put<std::int32_t>(doc.category_id);
      w.put<double>(doc.popularity);
      w.put_floats(set.rank.at(id));
      const FieldList& fields = set.summary.at(id);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(fields.size()));
      for (const auto& [k, v] : fields) {
        w.put_string(k);
        w.put_string(v);
      }
    }

    for (const InvertedIndex& index : set.inverted) {
      w.put<std::uint8_t>(static_cast<std::uint8_t>(index.tier()));
      w.put<std::uint64_t>(index.members_.size());
      for (ProductId id : index.members_) w.put<std::int64_t>(id);
      const auto tokens = index.sorted_tokens();
      w.put<std::uint64_t>(tokens.size());
      for (const auto& token : tokens) {
        const auto& postings = index.lists_.at(token);
        w.put_string(token);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(postings.size()));
        for (const Posting& p : postings) {
          w.put<std::int64_t>(p.product_id);
          w.put<std::uint32_t>(p.term_frequency);
        }
      }
    }
    const std::uint64_t sum = fnv1a64(std::span<const std::uint8_t>(w.bytes()));
    w.put<std::uint64_t>(sum);
    return w.take();
  }

  static IndexSet decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kIndexMagic.size() + sizeof(std::uint64_t))
      throw CorruptionError("index snapshot too short");
    const auto body = bytes.first(bytes.size() - sizeof(std::uint64_t));
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
    if (fnv1a64(body) != stored) throw CorruptionError("index snapshot checksum mismatch");

    ByteReader r(body);
    const auto magic = r.get_raw(kIndexMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kIndexMagic.begin(),
                    [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); }))
      throw CorruptionError("not an ESBIDX1 snapshot");
    if (r.get<std::uint32_t>() != kFormatVersion)
      throw CorruptionError("unsupported index snapshot version");

    IndexSet set;
    const auto doc_count = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < doc_count; ++i) {
      const auto id = r.get<std::int64_t>();
      DocInfo doc;
      doc.category_id = r.get<std::int32_t>();
      doc.popularity = r.get<double>();
      set.docs.emplace(id, doc);
      RankVector v;
      r.get_floats(v);
      set.rank.rows_.emplace(id, v);
      FieldList fields(r.get<std::uint32_t>());
      for (auto& [k, val] : fields) {
        k = r.get_string();
        val = r.get_string();
      }
      set.summary.rows_.emplace(id, std::move(fields));
    }

    for (InvertedIndex& index : set.inverted) {
      const auto tier = r.get<std::uint8_t>();
      if (tier > 2) throw CorruptionError("bad tier tag in index snapshot");
      index.tier_ = static_cast<Tier>(tier);
      index.members_.resize(r.get<std::uint64_t>());
      for (ProductId& id : index.members_) id = r.get<std::int64_t>();
      const auto token_count = r.get<std::uint64_t>();
      for (std::uint64_t t = 0; t < token_count; ++t) {
        std::string token = r.get_string();
        std::vector<Posting> postings(r.get<std::uint32_t>());
        for (Posting& p : postings) {
          p.product_id = r.get<std::int64_t>();
          p.term_frequency = r.get<std::uint32_t>();
        }
        index.lists_.emplace(std::move(token), std::move(postings));
      }
    }
    if (r.remaining() != 0) throw CorruptionError("trailing bytes in index snapshot");
    return set;
  }
};

std::vector<std::uint8_t> IndexSet::serialize() const { return IndexSnapshotCodec::encode(*this); }

IndexSet IndexSet::deserialize(std::span<const std::uint8_t> bytes) {
  return IndexSnapshotCodec::decode(bytes);
}

std::uint64_t IndexSet::checksum() const {
  const auto bytes = serialize();
  return fnv1a64(std::span<const std::uint8_t>(bytes));
}

// ---- search ---------------------------------------------------------------

std::vector<ProductId> tier_search(const IndexSet& indexes, const std::vector<std::string>& tokens,
                                   std::size_t limit, TierSearchTrace* trace) {
  if (limit == 0) throw PreconditionError("tier_search limit must be at least 1");
  std::vector<ProductId> results;
  if (tokens.empty()) return results;

  std::vector<std::string> distinct = tokens;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::unordered_set<ProductId> found;
  struct Candidate {
    ProductId id;
    std::uint32_t matches;
    double popularity;
  };

  for (Tier tier : {Tier::High, Tier::Medium, Tier::Low}) {
    const int t = static_cast<int>(tier);
    const std::int64_t start = monotonic_us();
    const InvertedIndex& index = indexes.tier(tier);

    std::unordered_map<ProductId, std::uint32_t> match_count;
    for (const auto& token : distinct) {
      for (const Posting& p : index.postings(token)) {
        if (!found.count(p.product_id)) ++match_count[p.product_id];
      }
    }
    std::vector<Candidate> candidates;
    candidates.reserve(match_count.size());
    for (const auto& [id, count] : match_count)
      candidates.push_back({id, count, indexes.docs.at(id).popularity});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.matches != b.matches) return a.matches > b.matches;
      if (a.popularity != b.popularity) return a.popularity > b.popularity;
      return a.id < b.id;
    });
    for (const Candidate& c : candidates) {
      results.push_back(c.id);
      found.insert(c.id);
    }

    if (trace) {
      trace->probed[t] = true;
      trace->start_us[t] = start;
      trace->duration_us[t] = monotonic_us() - start;
      trace->matches[t] = candidates.size();
    }
    if (results.size() >= limit) break;
  }
  if (results.size() > limit) results.resize(limit);
  return results;
}

std::vector<RankVector> rank_features(const RankForwardIndex& index,
                                      std::span<const ProductId> product_ids) {
  std::vector<RankVector> out;
  out.reserve(product_ids.size());
  for (ProductId id : product_ids) out.push_back(index.at(id));
  return out;
}

}  // namespace esb
