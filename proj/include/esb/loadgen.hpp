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
#include <functional>
#include <string>
#include <vector>

#include "esb/datagen.hpp"
#include "esb/metrics.hpp"
#include "esb/random.hpp"
#include "esb/services/clients.hpp"

namespace esb {

enum class ThinkDistribution { Exponential, Fixed };

const char* think_distribution_name(ThinkDistribution d);
ThinkDistribution parse_think_distribution(const std::string& name);

struct LoadProfile {
  std::size_t virtual_users = 8;
  double mean_think_time = 1.0;  // seconds
  ThinkDistribution think_distribution = ThinkDistribution::Exponential;
  double warmup = 5.0;  // seconds
  std::size_t total_requests = 2000;
  std::uint64_t seed = 2024;
  std::size_t limit = 100;

  void validate() const;
};

/// Exponential: -mean * ln(u) with u uniform in (0, 1]. Fixed: mean.
/// Throws ConfigError for a non-positive mean (zero is allowed for fixed).
double sample_think_time(ThinkDistribution distribution, double mean, Rng& rng);

/// Inverse transform of the exponential CDF; u = 1 maps to 0.
double exponential_think_time(double mean, double u);

struct ScheduledRequest {
  std::size_t virtual_user = 0;
  std::size_t sequence = 0;
  std::string request_id;
  UserId user_id = 0;
  std::string query_text;
  double think_time = 0;  // seconds slept before sending
};

/// Query replayed by `virtual_user` for its `sequence`-th request: log
/// entries are dealt round-robin across users.
const QueryLogEntry& replayed_query(const std::vector<QueryLogEntry>& queries,
                                    std::size_t virtual_users, std::size_t virtual_user,
                                    std::size_t sequence);

/// The first `per_user` requests every virtual user will issue. run_load
/// follows exactly this schedule, so it depends only on the profile and the
/// query source.
std::vector<ScheduledRequest> plan_schedule(const LoadProfile& profile,
                                            const std::vector<QueryLogEntry>& queries,
                                            std::size_t per_user);

struct LoadResult {
  std::vector<RequestSample> samples;  // ordered by send time
  std::size_t max_in_flight = 0;
  std::size_t max_in_flight_per_user = 0;
  double wall_seconds = 0;
};

/// Closed loop: each virtual user samples a think time, sleeps, sends one
/// request and waits for the answer. Stops once `total_requests` samples
/// sent after warm-up have been collected. Failed requests are recorded,
/// not fatal. `healthy`, when given, is checked once before starting.
LoadResult run_load(const LoadProfile& profile, PlanerClient& target,
                    const std::vector<QueryLogEntry>& queries,
                    const std::function<bool()>& healthy = {});

}  // namespace esb
