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

#include "esb/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace esb {
namespace {

/// One YAML mapping being consumed. Every key read is remembered so that
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(name_or_root(), "expected a mapping");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node value = node_[key];
    if (!value) return;
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "cannot parse value '" + YAML::Dump(value) + "'");
    }
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), field(key));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string name_or_root() const { return path_.empty() ? "<root>" : path_; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  catalog.seed = s;
  logs.seed = s + 1;
  classifier.seed = s + 2;
  preference.seed = s + 3;
  load.seed = s + 4;
  ranker.score_net_seed = s + 5;
}

void RunConfig::validate() const {
  try {
    catalog.validate();
  } catch (const ConfigError& e) {
    // CatalogConfig names its own members; report the YAML key instead.
    static const std::pair<const char*, const char*> kKeys[] = {
        {"product_count", "catalog.products"},     {"attribute_field_count", "catalog.attribute_fields"},
        {"user_count", "catalog.users"},           {"category_count", "catalog.categories"},
        {"vocabulary_size", "catalog.vocabulary"}, {"zipf_exponent", "catalog.zipf_exponent"},
        {"title_length", "catalog.title_length"},  {"brand_count", "catalog.brands"},
        {"shared_token_rate", "catalog.shared_token_rate"}};
    for (const auto& [member, key] : kKeys) {
      const std::string prefix = std::string(member) + ": ";
      if (e.field() == member) throw ConfigError(key, std::string(e.what()).substr(prefix.size()));
    }
    throw;
  }
  logs.validate();
  load.validate();
  trainer.schedule.validate();
  const auto& shape = classifier.shape;
  if (shape.buckets == 0) throw ConfigError("classifier.buckets", "must be positive");
  if (shape.dim == 0) throw ConfigError("classifier.dim", "must be positive");
  if (shape.ngram_order < 1 || shape.ngram_order > 2) throw ConfigError("classifier.ngram_order", "must be 1 or 2");
  if (shape.categories != static_cast<std::uint32_t>(catalog.category_count))
    throw ConfigError("classifier.categories", "must equal catalog.categories");
  if (classifier.epochs < 0) throw ConfigError("classifier.epochs", "must be non-negative");
  if (!(classifier.learning_rate > 0)) throw ConfigError("classifier.learning_rate", "must be positive");
  if (preference.hidden.empty()) throw ConfigError("preference.hidden", "needs at least one layer");
  for (auto h : preference.hidden)
    if (h == 0) throw ConfigError("preference.hidden", "layer widths must be positive");
  if (preference.epochs < 0) throw ConfigError("preference.epochs", "must be non-negative");
  if (!(preference.learning_rate > 0)) throw ConfigError("preference.learning_rate", "must be positive");
  if (ranker.score_net && ranker.score_net_hidden == 0) throw ConfigError("ranker.score_net_hidden", "must be positive");
  if (recommender.serving_threads > 256) throw ConfigError("recommender.serving_threads", "at most 256");
  if (trainer.streaming_epochs < 1) throw ConfigError("trainer.streaming_epochs", "must be at least 1");
  if (trainer.run_seconds < 0) throw ConfigError("trainer.run_seconds", "must be non-negative");
  if (timeout_ms <= 0) throw ConfigError("timeout_ms", "must be positive");
  if (host.empty()) throw ConfigError("host", "must not be empty");
  if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");

  const std::pair<const char*, int> ports_list[] = {{"ports.planer", ports.planer},
                                                    {"ports.recommender", ports.recommender},
                                                    {"ports.searcher", ports.searcher},
                                                    {"ports.ranker", ports.ranker}};
  std::set<int> seen;
  for (const auto& [name, port] : ports_list) {
    if (port < 0 || port > 65535) throw ConfigError(name, "must be in [0, 65535]");
    if (port != 0 && !seen.insert(port).second) throw ConfigError(name, "duplicates another service port");
  }
}

StackOptions RunConfig::stack_options(bool http) const {
  StackOptions o;
  o.http = http;
  o.host = host;
  o.timeout = std::chrono::milliseconds(timeout_ms);
  o.recommender = recommender;
  o.ranker = ranker;
  return o;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", e.what());
  }
  RunConfig c;
  Section top(root, "");

  std::uint64_t seed = c.seed;
  top.read("seed", seed);
  c.apply_seed(seed);
  std::string out_dir = c.out_dir.string();
  top.read("out_dir", out_dir);
  c.out_dir = out_dir;
  top.read("host", c.host);
  top.read("timeout_ms", c.timeout_ms);

  Section cat = top.child("catalog");
  cat.read("products", c.catalog.product_count);
  cat.read("attribute_fields", c.catalog.attribute_field_count);
  cat.read("users", c.catalog.user_count);
  cat.read("categories", c.catalog.category_count);
  cat.read("vocabulary", c.catalog.vocabulary_size);
  cat.read("zipf_exponent", c.catalog.zipf_exponent);
  cat.read("title_length", c.catalog.title_length);
  cat.read("brands", c.catalog.brand_count);
  cat.read("shared_token_rate", c.catalog.shared_token_rate);
  cat.finish();

  Section logs = top.child("logs");
  logs.read("count", c.logs.count);
  logs.read("noise_rate", c.logs.noise_rate);
  logs.read("min_query_tokens", c.logs.min_query_tokens);
  logs.read("max_query_tokens", c.logs.max_query_tokens);
  logs.finish();

  Section cls = top.child("classifier");
  cls.read("buckets", c.classifier.shape.buckets);
  cls.read("dim", c.classifier.shape.dim);
  cls.read("ngram_order", c.classifier.shape.ngram_order);
  cls.read("epochs", c.classifier.epochs);
  cls.read("learning_rate", c.classifier.learning_rate);
  cls.finish();
  c.classifier.shape.categories = static_cast<std::uint32_t>(std::max(0, c.catalog.category_count));

  Section pref = top.child("preference");
  pref.read("hidden", c.preference.hidden);
  pref.read("epochs", c.preference.epochs);
  pref.read("learning_rate", c.preference.learning_rate);
  pref.finish();

  Section rk = top.child("ranker");
  rk.read("score_net", c.ranker.score_net);
  rk.read("score_net_hidden", c.ranker.score_net_hidden);
  rk.finish();

  Section rec = top.child("recommender");
  rec.read("serving_threads", c.recommender.serving_threads);
  rec.finish();

  Section load = top.child("load");
  load.read("virtual_users", c.load.virtual_users);
  load.read("mean_think_time", c.load.mean_think_time);
  std::string think = think_distribution_name(c.load.think_distribution);
  load.read("think_distribution", think);
  c.load.think_distribution = parse_think_distribution(think);
  load.read("warmup", c.load.warmup);
  load.read("total_requests", c.load.total_requests);
  load.read("limit", c.load.limit);
  load.finish();

  Section tr = top.child("trainer");
  std::string mode = schedule_mode_name(c.trainer.schedule.mode);
  tr.read("mode", mode);
  c.trainer.schedule.mode = parse_schedule_mode(mode);
  if (c.trainer.schedule.mode == ScheduleMode::Batch) c.trainer.schedule.interval = Schedule::batch().interval;
  tr.read("interval", c.trainer.schedule.interval);
  tr.read("time_scale", c.trainer.schedule.time_scale);
  tr.read("window", c.trainer.schedule.window);
  tr.read("streaming_epochs", c.trainer.streaming_epochs);
  tr.read("run_seconds", c.trainer.run_seconds);
  tr.finish();

  Section bench = top.child("bench");
  bench.read("self_host", c.bench.self_host);
  std::string transport = c.bench.http ? "http" : "local";
  bench.read("transport", transport);
  if (transport != "http" && transport != "local")
    throw ConfigError("bench.transport", "must be 'http' or 'local'");
  c.bench.http = transport == "http";
  bench.finish();

  Section ports = top.child("ports");
  ports.read("planer", c.ports.planer);
  ports.read("recommender", c.ports.recommender);
  ports.read("searcher", c.ports.searcher);
  ports.read("ranker", c.ports.ranker);
  ports.finish();

  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const RunConfig& c) {
  YAML::Emitter y;
  y.SetDoublePrecision(15);
  y << YAML::BeginMap;
  y << YAML::Key << "seed" << YAML::Value << c.seed;
  y << YAML::Key << "out_dir" << YAML::Value << c.out_dir.string();
  y << YAML::Key << "host" << YAML::Value << c.host;
  y << YAML::Key << "timeout_ms" << YAML::Value << c.timeout_ms;

  y << YAML::Key << "catalog" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "products" << YAML::Value << c.catalog.product_count;
  y << YAML::Key << "attribute_fields" << YAML::Value << c.catalog.attribute_field_count;
  y << YAML::Key << "users" << YAML::Value << c.catalog.user_count;
  y << YAML::Key << "categories" << YAML::Value << c.catalog.category_count;
  y << YAML::Key << "vocabulary" << YAML::Value << c.catalog.vocabulary_size;
  y << YAML::Key << "zipf_exponent" << YAML::Value << c.catalog.zipf_exponent;
  y << YAML::Key << "title_length" << YAML::Value << c.catalog.title_length;
  y << YAML::Key << "brands" << YAML::Value << c.catalog.brand_count;
  y << YAML::Key << "shared_token_rate" << YAML::Value << c.catalog.shared_token_rate;
  y << YAML::EndMap;

  y << YAML::Key << "logs" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "count" << YAML::Value << c.logs.count;
  y << YAML::Key << "noise_rate" << YAML::Value << c.logs.noise_rate;
  y << YAML::Key << "min_query_tokens" << YAML::Value << c.logs.min_query_tokens;
  y << YAML::Key << "max_query_tokens" << YAML::Value << c.logs.max_query_tokens;
  y << YAML::EndMap;

  y << YAML::Key << "classifier" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "buckets" << YAML::Value << c.classifier.shape.buckets;
  y << YAML::Key << "dim" << YAML::Value << c.classifier.shape.dim;
  y << YAML::Key << "ngram_order" << YAML::Value << c.classifier.shape.ngram_order;
  y << YAML::Key << "epochs" << YAML::Value << c.classifier.epochs;
  y << YAML::Key << "learning_rate" << YAML::Value << c.classifier.learning_rate;
  y << YAML::EndMap;

  y << YAML::Key << "preference" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "hidden" << YAML::Value << YAML::Flow << c.preference.hidden;
  y << YAML::Key << "epochs" << YAML::Value << c.preference.epochs;
  y << YAML::Key << "learning_rate" << YAML::Value << c.preference.learning_rate;
  y << YAML::EndMap;

  y << YAML::Key << "ranker" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "score_net" << YAML::Value << c.ranker.score_net;
  y << YAML::Key << "score_net_hidden" << YAML::Value << c.ranker.score_net_hidden;
  y << YAML::EndMap;

  y << YAML::Key << "recommender" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "serving_threads" << YAML::Value << c.recommender.serving_threads;
  y << YAML::EndMap;

  y << YAML::Key << "load" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "virtual_users" << YAML::Value << c.load.virtual_users;
  y << YAML::Key << "mean_think_time" << YAML::Value << c.load.mean_think_time;
  y << YAML::Key << "think_distribution" << YAML::Value << think_distribution_name(c.load.think_distribution);
  y << YAML::Key << "warmup" << YAML::Value << c.load.warmup;
  y << YAML::Key << "total_requests" << YAML::Value << c.load.total_requests;
  y << YAML::Key << "limit" << YAML::Value << c.load.limit;
  y << YAML::EndMap;

  y << YAML::Key << "trainer" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "mode" << YAML::Value << schedule_mode_name(c.trainer.schedule.mode);
  y << YAML::Key << "interval" << YAML::Value << c.trainer.schedule.interval;
  y << YAML::Key << "time_scale" << YAML::Value << c.trainer.schedule.time_scale;
  y << YAML::Key << "window" << YAML::Value << c.trainer.schedule.window;
  y << YAML::Key << "streaming_epochs" << YAML::Value << c.trainer.streaming_epochs;
  y << YAML::Key << "run_seconds" << YAML::Value << c.trainer.run_seconds;
  y << YAML::EndMap;

  y << YAML::Key << "bench" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "self_host" << YAML::Value << c.bench.self_host;
  y << YAML::Key << "transport" << YAML::Value << (c.bench.http ? "http" : "local");
  y << YAML::EndMap;

  y << YAML::Key << "ports" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "planer" << YAML::Value << c.ports.planer;
  y << YAML::Key << "recommender" << YAML::Value << c.ports.recommender;
  y << YAML::Key << "searcher" << YAML::Value << c.ports.searcher;
  y << YAML::Key << "ranker" << YAML::Value << c.ports.ranker;
  y << YAML::EndMap;

  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

}  // namespace esb
