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

#include "esb/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "esb/hash.hpp"
#include "esb/random.hpp"
#include "esb/text.hpp"

namespace esb {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<const char*, 16> kColors = {
    "black", "white", "red",    "blue",  "green", "yellow", "pink",  "purple",
    "orange", "brown", "grey",  "silver", "gold", "beige",  "navy",  "teal"};

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

/// Inverse-CDF sampler over ranks 0..n-1 with weight (rank+1)^-s.
class ZipfTable {
 public:
  ZipfTable(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += std::pow(static_cast<double>(r + 1), -exponent);
      cdf_[r] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

/// Vocabulary layout: slot 0 is the shared pool, slots 1..C belong to one
/// category each. Every slot has the same size.
struct VocabularyLayout {
  int slot_size;

  VocabularyLayout(int vocabulary_size, int category_count)
      : slot_size(std::max(1, vocabulary_size / (category_count + 1))) {}

  int token(int slot, std::size_t rank) const {
    return slot * slot_size + static_cast<int>(rank);
  }
};

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

void CatalogConfig::validate() const {
  if (product_count <= 0) throw ConfigError("product_count", "must be positive");
  if (attribute_field_count < kNamedProductFields)
    throw ConfigError("attribute_field_count", "must be at least 6");
  if (user_count < 0) throw ConfigError("user_count", "must not be negative");
  if (category_count <= 0) throw ConfigError("category_count", "must be positive");
  if (category_count > product_count)
    throw ConfigError("category_count", "must not exceed product_count");
  if (vocabulary_size <= category_count)
    throw ConfigError("vocabulary_size", "must exceed category_count");
  if (!(zipf_exponent > 0.0)) throw ConfigError("zipf_exponent", "must be > 0");
  if (title_length <= 0) throw ConfigError("title_length", "must be positive");
  if (brand_count <= 0) throw ConfigError("brand_count", "must be positive");
  if (shared_token_rate < 0.0 || shared_token_rate > 1.0)
    throw ConfigError("shared_token_rate", "must be in [0, 1]");
}

void QueryLogConfig::validate() const {
  if (count < 0) throw ConfigError("logs.count", "must not be negative");
  if (noise_rate < 0.0 || noise_rate > 1.0)
    throw ConfigError("logs.noise_rate", "must be in [0, 1]");
  if (min_query_tokens <= 0 || max_query_tokens < min_query_tokens)
    throw ConfigError("logs.min_query_tokens", "need 0 < min <= max");
}

std::vector<std::string> ProductRecord::index_tokens() const {
  std::vector<std::string> tokens;
  for (const auto& t : title) {
    for (auto& piece : tokenize(t)) tokens.push_back(std::move(piece));
  }
  for (auto& piece : tokenize(brand)) tokens.push_back(std::move(piece));
  for (auto& piece : tokenize(color)) tokens.push_back(std::move(piece));
  return tokens;
}

std::vector<float> UserRecord::feature_vector() const {
  for (const auto& [key, value] : profile_fields) {
    if (key != "embedding") continue;
    std::vector<float> out;
    std::istringstream is(value);
    float x;
    while (is >> x) out.push_back(x);
    return out;
  }
  throw LookupError("user " + std::to_string(user_id) + " has no embedding field");
}

std::string QueryLogEntry::joined_query() const { return join_tokens(query_text); }

const char* tier_name(Tier tier) {
  switch (tier) {
    case Tier::High: return "high";
    case Tier::Medium: return "medium";
    case Tier::Low: return "low";
  }
  return "?";
}

Tier parse_tier(const std::string& name) {
  if (name == "high") return Tier::High;
  if (name == "medium") return Tier::Medium;
  if (name == "low") return Tier::Low;
  throw IoError("unknown tier label '" + name + "'");
}

const std::vector<ProductId>& TierAssignment::members(Tier tier) const {
  switch (tier) {
    case Tier::High: return high;
    case Tier::Medium: return medium;
    case Tier::Low: return low;
  }
  return low;
}

std::string vocabulary_word(int index) {
  const int base = static_cast<int>(kConsonants.size() * kVowels.size());
  std::string word;
  int rest = index;
  int syllables = 0;
  do {
    const int digit = rest % base;
    word += kConsonants[digit / kVowels.size()];
    word += kVowels[digit % kVowels.size()];
    rest /= base;
    ++syllables;
  } while (rest > 0 || syllables < 2);
  return word;
}

std::vector<ProductRecord> generate_catalog(const CatalogConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto n = static_cast<std::size_t>(config.product_count);
  const VocabularyLayout vocab(config.vocabulary_size, config.category_count);
  const ZipfTable token_zipf(static_cast<std::size_t>(vocab.slot_size), 1.0);

  // Popularity rank is a seeded permutation; rank r gets weight r^-s, which
  // is already 1.0 at the top so the values are normalized to (0, 1].
  std::vector<std::size_t> rank_of(n);
  std::iota(rank_of.begin(), rank_of.end(), 0);
  shuffle(rank_of, rng);

  std::vector<ProductRecord> catalog(n);
  for (std::size_t i = 0; i < n; ++i) {
    ProductRecord& p = catalog[i];
    p.product_id = static_cast<ProductId>(i);
    p.category_id = static_cast<CategoryId>(rng.below(config.category_count));
    p.title.reserve(config.title_length);
    for (int t = 0; t < config.title_length; ++t) {
      const int slot = rng.bernoulli(config.shared_token_rate) ? 0 : p.category_id + 1;
      p.title.push_back(vocabulary_word(vocab.token(slot, token_zipf.sample(rng))));
    }
    p.brand = "brand" + vocabulary_word(static_cast<int>(rng.below(config.brand_count)));
    p.color = kColors[rng.below(kColors.size())];
    const double u = rng.uniform();
    p.price = std::round((1.0 + 999.0 * u * u * u) * 100.0) / 100.0;
    p.popularity = std::pow(static_cast<double>(rank_of[i] + 1), -config.zipf_exponent);
    for (int f = kNamedProductFields; f < config.attribute_field_count; ++f) {
      char key[16];
      std::snprintf(key, sizeof key, "attr_%02d", f);
      p.extra_fields.emplace_back(key, vocabulary_word(static_cast<int>(rng.below(4096))));
    }
  }
  return catalog;
}

std::vector<UserRecord> generate_users(const CatalogConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.seed, 0x75736572));

  // Fixed projection from the latent preference to the observable feature
  // vector, so the preference model has something to learn from.
  std::array<std::array<double, kRankFeatureDim>, kUserFeatureDim> projection{};
  for (auto& row : projection)
    for (double& w : row) w = rng.uniform(-1.0, 1.0);

  std::vector<UserRecord> users(static_cast<std::size_t>(config.user_count));
  for (std::size_t i = 0; i < users.size(); ++i) {
    UserRecord& u = users[i];
    u.user_id = static_cast<UserId>(i);
    u.latent_preference.resize(kRankFeatureDim);
    for (double& w : u.latent_preference) w = rng.uniform();

    std::string embedding;
    for (std::size_t j = 0; j < kUserFeatureDim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kRankFeatureDim; ++k)
        acc += projection[j][k] * (u.latent_preference[k] - 0.5);
      acc = acc / std::sqrt(static_cast<double>(kRankFeatureDim)) + rng.uniform(-0.02, 0.02);
      if (j) embedding += ' ';
      embedding += format_fixed(acc, 6);
    }

    static constexpr const char* kGenders[] = {"f", "m", "x"};
    u.profile_fields = {
        {"age", std::to_string(18 + rng.below(53))},
        {"gender", kGenders[rng.below(3)]},
        {"city", "city" + std::to_string(rng.below(200))},
        {"member_level", std::to_string(1 + rng.below(5))},
        {"embedding", std::move(embedding)},
    };
  }
  return users;
}

std::vector<QueryLogEntry> generate_query_logs(const std::vector<ProductRecord>& catalog,
                                               const std::vector<UserRecord>& users,
                                               const QueryLogConfig& config) {
  config.validate();
  if (catalog.empty()) throw PreconditionError("query log generation needs a non-empty catalog");
  if (users.empty()) throw PreconditionError("query log generation needs non-empty users");

  Rng rng(config.seed);
  std::vector<double> cumulative(catalog.size());
  double total = 0.0;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    total += catalog[i].popularity;
    cumulative[i] = total;
  }

  // Noise tokens come from the catalog's own vocabulary.
  std::vector<std::string> vocabulary;
  {
    std::unordered_set<std::string> seen;
    for (const auto& p : catalog)
      for (const auto& t : p.title)
        if (seen.insert(t).second) vocabulary.push_back(t);
  }

  std::vector<QueryLogEntry> logs(static_cast<std::size_t>(config.count));
  for (auto& entry : logs) {
    entry.user_id = users[rng.below(users.size())].user_id;
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const ProductRecord& p = catalog[static_cast<std::size_t>(it - cumulative.begin())];
    entry.clicked_product_id = p.product_id;
    entry.clicked_category_id = p.category_id;

    const int span = config.max_query_tokens - config.min_query_tokens + 1;
    const std::size_t k = std::min<std::size_t>(
        p.title.size(), static_cast<std::size_t>(config.min_query_tokens + rng.below(span)));
    // Choose k title positions, then keep them in title order.
    std::vector<std::size_t> positions(p.title.size());
    std::iota(positions.begin(), positions.end(), 0);
    for (std::size_t j = 0; j < k; ++j)
      std::swap(positions[j], positions[j + rng.below(positions.size() - j)]);
    positions.resize(k);
    std::sort(positions.begin(), positions.end());

    for (std::size_t pos : positions) {
      if (config.noise_rate > 0.0 && rng.bernoulli(config.noise_rate)) {
        entry.query_text.push_back(vocabulary[rng.below(vocabulary.size())]);
      } else {
        entry.query_text.push_back(p.title[pos]);
      }
    }
  }
  return logs;
}

TierAssignment assign_tiers(const std::vector<ProductRecord>& catalog) {
  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (catalog[a].popularity != catalog[b].popularity)
      return catalog[a].popularity > catalog[b].popularity;
    return catalog[a].product_id < catalog[b].product_id;
  });

  const std::size_t n = catalog.size();
  const std::size_t high_count = n * 15 / 100;
  const std::size_t medium_count = n / 2;

  TierAssignment tiers;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const ProductId id = catalog[order[rank]].product_id;
    if (rank < high_count) tiers.high.push_back(id);
    if (rank < medium_count) {
      tiers.medium.push_back(id);
    } else {
      tiers.low.push_back(id);
    }
  }
  return tiers;
}

std::array<float, kRankFeatureDim> rank_feature_vector(const ProductRecord& product,
                                                       double max_price) {
  std::array<float, kRankFeatureDim> f{};
  f[0] = max_price > 0.0 ? static_cast<float>(product.price / max_price) : 0.0f;
  f[1] = static_cast<float>(product.popularity);
  f[2 + fnv1a64(product.brand) % 4] = 1.0f;
  f[6 + fnv1a64(product.color) % 4] = 1.0f;
  return f;
}

std::vector<std::array<float, kRankFeatureDim>> rank_feature_matrix(
    const std::vector<ProductRecord>& catalog) {
  double max_price = 0.0;
  for (const auto& p : catalog) max_price = std::max(max_price, p.price);
  std::vector<std::array<float, kRankFeatureDim>> out;
  out.reserve(catalog.size());
  for (const auto& p : catalog) out.push_back(rank_feature_vector(p, max_price));
  return out;
}

// ---- serialization -------------------------------------------------------

std::string to_ndjson_line(const ProductRecord& p) {
  ojson j;
  j["product_id"] = p.product_id;
  j["title"] = p.title;
  j["category_id"] = p.category_id;
  j["brand"] = p.brand;
  j["color"] = p.color;
  j["price"] = p.price;
  j["popularity"] = p.popularity;
  ojson extra = ojson::object();
  for (const auto& [k, v] : p.extra_fields) extra[k] = v;
  j["extra_fields"] = std::move(extra);
  return j.dump();
}

std::string to_ndjson_line(const UserRecord& u) {
  ojson j;
  j["user_id"] = u.user_id;
  ojson profile = ojson::object();
  for (const auto& [k, v] : u.profile_fields) profile[k] = v;
  j["profile_fields"] = std::move(profile);
  j["latent_preference"] = u.latent_preference;
  return j.dump();
}

std::string to_ndjson_line(const QueryLogEntry& e) {
  ojson j;
  j["user_id"] = e.user_id;
  j["query_text"] = e.query_text;
  j["clicked_product_id"] = e.clicked_product_id;
  j["clicked_category_id"] = e.clicked_category_id;
  return j.dump();
}

namespace {

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& records) {
  auto out = open_output(path);
  for (const auto& r : records) out << to_ndjson_line(r) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

FieldList fields_from(const ojson& obj) {
  FieldList fields;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    fields.emplace_back(it.key(), it.value().get<std::string>());
  return fields;
}

}  // namespace

void write_catalog(const std::filesystem::path& path, const std::vector<ProductRecord>& catalog) {
  write_lines(path, catalog);
}

void write_users(const std::filesystem::path& path, const std::vector<UserRecord>& users) {
  write_lines(path, users);
}

void write_logs(const std::filesystem::path& path, const std::vector<QueryLogEntry>& logs) {
  write_lines(path, logs);
}

void write_tiers(const std::filesystem::path& path, const TierAssignment& tiers) {
  auto out = open_output(path);
  out << "product_id,tier,in_high\n";
  const std::unordered_set<ProductId> high(tiers.high.begin(), tiers.high.end());
  for (ProductId id : tiers.medium)
    out << id << ',' << (high.count(id) ? "high" : "medium") << ',' << (high.count(id) ? 1 : 0)
        << '\n';
  for (ProductId id : tiers.low) out << id << ",low,0\n";
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ProductRecord> read_catalog(const std::filesystem::path& path) {
  std::vector<ProductRecord> catalog;
  for_each_line(path, [&](const std::string& line) {
    const auto j = ojson::parse(line);
    ProductRecord p;
    p.product_id = j.at("product_id").get<ProductId>();
    p.title = j.at("title").get<std::vector<std::string>>();
    p.category_id = j.at("category_id").get<CategoryId>();
    p.brand = j.at("brand").get<std::string>();
    p.color = j.at("color").get<std::string>();
    p.price = j.at("price").get<double>();
    p.popularity = j.at("popularity").get<double>();
    p.extra_fields = fields_from(j.at("extra_fields"));
    catalog.push_back(std::move(p));
  });
  return catalog;
}

std::vector<UserRecord> read_users(const std::filesystem::path& path) {
  std::vector<UserRecord> users;
  for_each_line(path, [&](const std::string& line) {
    const auto j = ojson::parse(line);
    UserRecord u;
    u.user_id = j.at("user_id").get<UserId>();
    u.profile_fields = fields_from(j.at("profile_fields"));
    u.latent_preference = j.at("latent_preference").get<std::vector<double>>();
    users.push_back(std::move(u));
  });
  return users;
}

QueryLogEntry parse_log_line(const std::string& line) {
  const auto j = ojson::parse(line);
  QueryLogEntry e;
  e.user_id = j.at("user_id").get<UserId>();
  e.query_text = j.at("query_text").get<std::vector<std::string>>();
  e.clicked_product_id = j.at("clicked_product_id").get<ProductId>();
  e.clicked_category_id = j.at("clicked_category_id").get<CategoryId>();
  return e;
}

std::vector<QueryLogEntry> read_logs(const std::filesystem::path& path) {
  std::vector<QueryLogEntry> logs;
  for_each_line(path, [&](const std::string& line) { logs.push_back(parse_log_line(line)); });
  return logs;
}

TierAssignment read_tiers(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "product_id,tier,in_high")
    throw IoError(path.string() + ": missing header product_id,tier,in_high");
  TierAssignment tiers;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string id_text, tier_text, high_text;
    if (!std::getline(is, id_text, ',') || !std::getline(is, tier_text, ',') ||
        !std::getline(is, high_text))
      throw IoError(path.string() + ": malformed row '" + line + "'");
    const ProductId id = std::stoll(id_text);
    const Tier tier = parse_tier(tier_text);
    if (tier == Tier::Low) {
      tiers.low.push_back(id);
    } else {
      tiers.medium.push_back(id);
      if (high_text == "1") tiers.high.push_back(id);
    }
  }
  return tiers;
}

}  // namespace esb
