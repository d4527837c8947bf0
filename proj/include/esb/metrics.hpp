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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "esb/common.hpp"

namespace esb {

/// One timed stage as reported by the service that ran it. start_us is on
/// that service's monotonic clock and is only meaningful as a duration
/// anchor; it is never compared across processes.
struct StageTiming {
  std::string stage;
  std::int64_t start_us = 0;
  std::int64_t duration_us = 0;

  bool operator==(const StageTiming&) const = default;
};

/// Stage names in serving order.
inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "planer",          "recommender.query_parse", "recommender.user_db",
      "recommender.classify", "recommender.serving", "searcher.high",
      "searcher.medium", "searcher.low",            "ranker",
      "product_db"};
  return names;
}

struct RequestSample {
  std::string request_id;
  std::int64_t send_us = 0;  // loadgen clock, relative to run start
  std::int64_t recv_us = 0;
  std::int64_t latency_us = 0;
  bool success = false;
  bool in_warmup = false;
  std::vector<StageTiming> stages;
};

/// Sorted latency values of the successful measured samples.
class LatencyDistribution {
 public:
  LatencyDistribution() = default;
  explicit LatencyDistribution(std::vector<std::int64_t> values);

  std::size_t count() const { return values_.size(); }
  std::span<const std::int64_t> values() const { return values_; }
  std::int64_t min() const;
  std::int64_t max() const;
  double mean() const;

 private:
  std::vector<std::int64_t> values_;
  std::int64_t sum_ = 0;
};

/// Nearest-rank percentile: the value at 1-based index ceil(p/100 · n) of
/// the sorted values. p is taken as a decimal with up to six fractional
/// digits so that e.g. p = 99.9 over 1000 samples selects index 999.
/// Throws PreconditionError on an empty distribution or p outside (0, 100].
std::int64_t percentile(const LatencyDistribution& distribution, double p);

struct ScopeStats {
  std::string scope;
  std::size_t count = 0;
  double average_ms = 0;
  double p90_ms = 0;
  double p99_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
};

struct BenchReport {
  std::vector<ScopeStats> scopes;
  std::size_t measured_count = 0;
  std::size_t success_count = 0;
  std::size_t failure_count = 0;
  double window_s = 0;
  double throughput_rps = 0;

  /// nullptr when the scope is absent.
  const ScopeStats* scope(const std::string& name) const;

  nlohmann::ordered_json to_json() const;
  static BenchReport from_json(const nlohmann::json& j);
  /// Human table: total, per-module, recommender internals, searcher tiers.
  std::string to_text() const;
  /// One row per scope.
  std::string to_csv() const;
};

/// Aggregates the successful non-warmup samples. Scopes: total, every stage
/// present, `recommender` and `searcher` (per-request sums of their
/// sub-stages) and `communication` (total minus the sum of all stage
/// durations). Throws PreconditionError when no sample qualifies.
BenchReport build_report(std::span<const RequestSample> samples);

inline const char* kSamplesCsvHeader =
    "request_id,send_us,recv_us,latency_us,success,in_warmup,stage,stage_duration_us";

void write_samples_csv(const std::filesystem::path& path, std::span<const RequestSample> samples);
std::vector<RequestSample> read_samples_csv(const std::filesystem::path& path);

}  // namespace esb
