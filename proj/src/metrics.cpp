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

#include "esb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace esb {

LatencyDistribution::LatencyDistribution(std::vector<std::int64_t> values)
    : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
  sum_ = std::accumulate(values_.begin(), values_.end(), std::int64_t{0});
}

std::int64_t LatencyDistribution::min() const {
  if (values_.empty()) throw PreconditionError("empty latency distribution");
  return values_.front();
}

std::int64_t LatencyDistribution::max() const {
  if (values_.empty()) throw PreconditionError("empty latency distribution");
  return values_.back();
}

double LatencyDistribution::mean() const {
  if (values_.empty()) throw PreconditionError("empty latency distribution");
  return static_cast<double>(sum_) / static_cast<double>(values_.size());
}

std::int64_t percentile(const LatencyDistribution& distribution, double p) {
  const std::size_t n = distribution.count();
  if (n == 0) throw PreconditionError("percentile of an empty distribution");
  if (!(p > 0.0) || p > 100.0) throw PreconditionError("percentile p must be in (0, 100]");
  constexpr std::uint64_t kScale = 100'000'000;  // 100 percent in millionths
  const auto p_millionths = static_cast<std::uint64_t>(std::llround(p * 1e6));
  std::uint64_t rank = (p_millionths * n + kScale - 1) / kScale;
  rank = std::clamp<std::uint64_t>(rank, 1, n);
  return distribution.values()[rank - 1];
}

// ---- report ---------------------------------------------------------------

namespace {

ScopeStats stats_for(const std::string& scope, std::vector<std::int64_t> values) {
  LatencyDistribution d(std::move(values));
  ScopeStats s;
  s.scope = scope;
  s.count = d.count();
  s.average_ms = d.mean() / 1000.0;
  s.p90_ms = static_cast<double>(percentile(d, 90)) / 1000.0;
  s.p99_ms = static_cast<double>(percentile(d, 99)) / 1000.0;
  s.min_ms = static_cast<double>(d.min()) / 1000.0;
  s.max_ms = static_cast<double>(d.max()) / 1000.0;
  return s;
}

int scope_rank(const std::string& scope) {
  static const std::vector<std::string> order = {
      "total",          "planer",          "recommender",
      "recommender.query_parse", "recommender.user_db", "recommender.classify",
      "recommender.serving",     "searcher",            "searcher.high",
      "searcher.medium", "searcher.low",   "ranker",
      "product_db",     "communication"};
  auto it = std::find(order.begin(), order.end(), scope);
  return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

BenchReport build_report(std::span<const RequestSample> samples) {
  BenchReport report;
  std::map<std::string, std::vector<std::int64_t>> per_scope;
  std::int64_t first_send = 0;
  std::int64_t last_recv = 0;
  bool any_measured = false;

  for (const RequestSample& s : samples) {
    if (s.in_warmup) continue;
    ++report.measured_count;
    if (!any_measured || s.send_us < first_send) first_send = s.send_us;
    if (!any_measured || s.recv_us > last_recv) last_recv = s.recv_us;
    any_measured = true;
    if (!s.success) {
      ++report.failure_count;
      continue;
    }
    ++report.success_count;
    per_scope["total"].push_back(s.latency_us);

    std::int64_t stage_sum = 0;
    std::int64_t recommender = 0;
    std::int64_t searcher = 0;
    bool has_recommender = false;
    bool has_searcher = false;
    // A stage reported twice in one response is summed.
    std::map<std::string, std::int64_t> stage_total;
    for (const StageTiming& t : s.stages) {
      stage_total[t.stage] += t.duration_us;
      stage_sum += t.duration_us;
      if (starts_with(t.stage, "recommender.")) {
        recommender += t.duration_us;
        has_recommender = true;
      } else if (starts_with(t.stage, "searcher.")) {
        searcher += t.duration_us;
        has_searcher = true;
      }
    }
    for (const auto& [stage, d] : stage_total) per_scope[stage].push_back(d);
    if (has_recommender) per_scope["recommender"].push_back(recommender);
    if (has_searcher) per_scope["searcher"].push_back(searcher);
    per_scope["communication"].push_back(s.latency_us - stage_sum);
  }

  if (report.success_count == 0)
    throw PreconditionError("no successful measured samples to report");

  for (auto& [scope, values] : per_scope) report.scopes.push_back(stats_for(scope, std::move(values)));
  std::stable_sort(report.scopes.begin(), report.scopes.end(),
                   [](const ScopeStats& a, const ScopeStats& b) {
                     const int ra = scope_rank(a.scope), rb = scope_rank(b.scope);
                     if (ra != rb) return ra < rb;
                     return a.scope < b.scope;
                   });

  report.window_s = static_cast<double>(std::max<std::int64_t>(last_recv - first_send, 1)) / 1e6;
  report.throughput_rps = static_cast<double>(report.success_count) / report.window_s;
  return report;
}

const ScopeStats* BenchReport::scope(const std::string& name) const {
  for (const auto& s : scopes)
    if (s.scope == name) return &s;
  return nullptr;
}

nlohmann::ordered_json BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["measured_requests"] = measured_count;
  j["successful_requests"] = success_count;
  j["failure_count"] = failure_count;
  j["window_s"] = window_s;
  j["throughput_rps"] = throughput_rps;
  nlohmann::ordered_json scope_obj = nlohmann::ordered_json::object();
  for (const auto& s : scopes) {
    scope_obj[s.scope] = {{"count", s.count},       {"average_ms", s.average_ms},
                          {"p90_ms", s.p90_ms},     {"p99_ms", s.p99_ms},
                          {"min_ms", s.min_ms},     {"max_ms", s.max_ms}};
  }
  j["scopes"] = std::move(scope_obj);
  return j;
}

BenchReport BenchReport::from_json(const nlohmann::json& j) {
  BenchReport r;
  r.measured_count = j.at("measured_requests").get<std::size_t>();
  r.success_count = j.at("successful_requests").get<std::size_t>();
  r.failure_count = j.at("failure_count").get<std::size_t>();
  r.window_s = j.at("window_s").get<double>();
  r.throughput_rps = j.at("throughput_rps").get<double>();
  for (auto it = j.at("scopes").begin(); it != j.at("scopes").end(); ++it) {
    ScopeStats s;
    s.scope = it.key();
    const auto& v = it.value();
    s.count = v.at("count").get<std::size_t>();
    s.average_ms = v.at("average_ms").get<double>();
    s.p90_ms = v.at("p90_ms").get<double>();
    s.p99_ms = v.at("p99_ms").get<double>();
    s.min_ms = v.at("min_ms").get<double>();
    s.max_ms = v.at("max_ms").get<double>();
    r.scopes.push_back(std::move(s));
  }
  std::stable_sort(r.scopes.begin(), r.scopes.end(), [](const ScopeStats& a, const ScopeStats& b) {
    return scope_rank(a.scope) < scope_rank(b.scope);
  });
  return r;
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  auto row = [&](const ScopeStats& s) {
    os << "  " << std::left << std::setw(26) << s.scope << std::right << std::setw(8) << s.count
       << std::setw(12) << s.average_ms << std::setw(12) << s.p90_ms << std::setw(12) << s.p99_ms
       << '\n';
  };
  auto panel = [&](const char* title, auto&& select) {
    os << title << '\n'
       << "  " << std::left << std::setw(26) << "scope" << std::right << std::setw(8) << "count"
       << std::setw(12) << "avg_ms" << std::setw(12) << "p90_ms" << std::setw(12) << "p99_ms"
       << '\n';
    for (const auto& s : scopes)
      if (select(s.scope)) row(s);
    os << '\n';
  };

  panel("(a) end-to-end", [](const std::string& s) { return s == "total"; });
  os << "  throughput_rps " << throughput_rps << "  measured " << measured_count << "  failures "
     << failure_count << "\n\n";
  panel("(b) per module", [](const std::string& s) {
    return s == "planer" || s == "recommender" || s == "searcher" || s == "ranker" ||
           s == "product_db" || s == "communication";
  });
  panel("(c) recommender internals",
        [](const std::string& s) { return starts_with(s, "recommender."); });
  panel("searcher tiers", [](const std::string& s) { return starts_with(s, "searcher."); });
  return os.str();
}

std::string BenchReport::to_csv() const {
  std::ostringstream os;
  os << "scope,count,average_ms,p90_ms,p99_ms,min_ms,max_ms\n";
  os << std::setprecision(9);
  for (const auto& s : scopes)
    os << s.scope << ',' << s.count << ',' << s.average_ms << ',' << s.p90_ms << ',' << s.p99_ms
       << ',' << s.min_ms << ',' << s.max_ms << '\n';
  return os.str();
}

// ---- samples.csv ----------------------------------------------------------

void write_samples_csv(const std::filesystem::path& path, std::span<const RequestSample> samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kSamplesCsvHeader << '\n';
  for (const RequestSample& s : samples) {
    const auto prefix = [&] {
      std::ostringstream p;
      p << s.request_id << ',' << s.send_us << ',' << s.recv_us << ',' << s.latency_us << ','
        << (s.success ? 1 : 0) << ',' << (s.in_warmup ? 1 : 0) << ',';
      return p.str();
    }();
    for (const StageTiming& t : s.stages) out << prefix << t.stage << ',' << t.duration_us << '\n';
    out << prefix << "total," << s.latency_us << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<RequestSample> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSamplesCsvHeader)
    throw IoError(path.string() + ": missing samples header");

  std::vector<RequestSample> samples;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream is(line);
    std::string col;
    while (std::getline(is, col, ',')) cols.push_back(col);
    if (cols.size() != 8)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 8 columns");
    try {
      auto [it, inserted] = index.emplace(cols[0], samples.size());
      if (inserted) {
        RequestSample s;
        s.request_id = cols[0];
        s.send_us = std::stoll(cols[1]);
        s.recv_us = std::stoll(cols[2]);
        s.latency_us = std::stoll(cols[3]);
        s.success = cols[4] == "1";
        s.in_warmup = cols[5] == "1";
        samples.push_back(std::move(s));
      }
      if (cols[6] != "total")
        samples[it->second].stages.push_back({cols[6], 0, std::stoll(cols[7])});
    } catch (const std::logic_error&) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return samples;
}

}  // namespace esb
