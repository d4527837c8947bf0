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

#include "esb/loadgen.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <tuple>

namespace esb {

const char* think_distribution_name(ThinkDistribution d) {
  return d == ThinkDistribution::Exponential ? "exponential" : "fixed";
}

ThinkDistribution parse_think_distribution(const std::string& name) {
  if (name == "exponential") return ThinkDistribution::Exponential;
  if (name == "fixed") return ThinkDistribution::Fixed;
  throw ConfigError("load.think_distribution", "unknown distribution '" + name + "'");
}

void LoadProfile::validate() const {
  if (virtual_users == 0) throw ConfigError("load.virtual_users", "must be at least 1");
  if (total_requests == 0) throw ConfigError("load.total_requests", "must be at least 1");
  if (!(warmup >= 0)) throw ConfigError("load.warmup", "must be non-negative");
  if (limit == 0) throw ConfigError("load.limit", "must be at least 1");
  if (think_distribution == ThinkDistribution::Exponential ? !(mean_think_time > 0) : !(mean_think_time >= 0))
    throw ConfigError("load.mean_think_time", "must be positive");
}

double sample_think_time(ThinkDistribution distribution, double mean, Rng& rng) {
  if (distribution == ThinkDistribution::Fixed) {
    if (!(mean >= 0)) throw ConfigError("load.mean_think_time", "must be non-negative");
    return mean;
  }
  if (!(mean > 0)) throw ConfigError("load.mean_think_time", "must be positive");
  return exponential_think_time(mean, rng.uniform_open_closed());
}

double exponential_think_time(double mean, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw PreconditionError("u must be in (0, 1]");
  return -mean * std::log(u);
}

const QueryLogEntry& replayed_query(const std::vector<QueryLogEntry>& queries,
                                    std::size_t virtual_users, std::size_t virtual_user,
                                    std::size_t sequence) {
  if (queries.empty()) throw PreconditionError("query source is empty");
  return queries[(virtual_user + sequence * virtual_users) % queries.size()];
}

namespace {

std::string request_id_for(std::uint64_t seed, std::size_t vu, std::size_t seq) {
  return "r" + std::to_string(seed) + "-" + std::to_string(vu) + "-" + std::to_string(seq);
}

ScheduledRequest next_request(const LoadProfile& profile, const std::vector<QueryLogEntry>& queries,
                              std::size_t vu, std::size_t seq, Rng& rng) {
  const QueryLogEntry& q = replayed_query(queries, profile.virtual_users, vu, seq);
  ScheduledRequest r;
  r.virtual_user = vu;
  r.sequence = seq;
  r.request_id = request_id_for(profile.seed, vu, seq);
  r.user_id = q.user_id;
  r.query_text = q.joined_query();
  r.think_time = sample_think_time(profile.think_distribution, profile.mean_think_time, rng);
  return r;
}

void raise_max(std::atomic<std::size_t>& target, std::size_t value) {
  std::size_t seen = target.load();
  while (value > seen && !target.compare_exchange_weak(seen, value)) {
  }
}

}  // namespace

std::vector<ScheduledRequest> plan_schedule(const LoadProfile& profile,
                                            const std::vector<QueryLogEntry>& queries,
                                            std::size_t per_user) {
  profile.validate();
  std::vector<ScheduledRequest> out;
  out.reserve(profile.virtual_users * per_user);
  for (std::size_t vu = 0; vu < profile.virtual_users; ++vu) {
    Rng rng(mix_seed(profile.seed, vu));
    for (std::size_t seq = 0; seq < per_user; ++seq) out.push_back(next_request(profile, queries, vu, seq, rng));
  }
  return out;
}

LoadResult run_load(const LoadProfile& profile, PlanerClient& target,
                    const std::vector<QueryLogEntry>& queries, const std::function<bool()>& healthy) {
  profile.validate();
  if (queries.empty()) throw PreconditionError("query source is empty");
  if (healthy && !healthy()) throw Error("unavailable", "load target failed its health check");

  const std::int64_t run_start = monotonic_us();
  const std::int64_t warmup_end = run_start + static_cast<std::int64_t>(std::llround(profile.warmup * 1e6));
  std::atomic<std::size_t> measured_slots{0};
  std::atomic<std::size_t> in_flight{0}, max_in_flight{0}, max_per_user{0};
  std::vector<std::vector<RequestSample>> per_user(profile.virtual_users);

  auto user_loop = [&](std::size_t vu) {
    Rng rng(mix_seed(profile.seed, vu));
    std::size_t outstanding = 0;
    for (std::size_t seq = 0;; ++seq) {
      if (measured_slots.load() >= profile.total_requests) return;
      const ScheduledRequest next = next_request(profile, queries, vu, seq, rng);
      if (next.think_time > 0) std::this_thread::sleep_for(std::chrono::duration<double>(next.think_time));

      const std::int64_t send = monotonic_us();
      const bool in_warmup = send < warmup_end;
      if (!in_warmup && measured_slots.fetch_add(1) >= profile.total_requests) return;

      raise_max(max_per_user, ++outstanding);
      raise_max(max_in_flight, ++in_flight);
      RequestSample sample;
      sample.request_id = next.request_id;
      sample.in_warmup = in_warmup;
      try {
        SearchResponse response = target.search({next.request_id, next.user_id, next.query_text, profile.limit});
        sample.success = response.request_id == next.request_id;
        sample.stages = std::move(response.timings);
      } catch (const std::exception&) {
        sample.success = false;
      }
      const std::int64_t recv = monotonic_us();
      --in_flight;
      --outstanding;
      sample.send_us = send - run_start;
      sample.recv_us = recv - run_start;
      sample.latency_us = recv - send;
      per_user[vu].push_back(std::move(sample));
    }
  };

  std::vector<std::thread> users;
  users.reserve(profile.virtual_users);
  for (std::size_t vu = 0; vu < profile.virtual_users; ++vu) users.emplace_back(user_loop, vu);
  for (auto& t : users) t.join();

  LoadResult result;
  for (auto& samples : per_user)
    for (auto& s : samples) result.samples.push_back(std::move(s));
  std::sort(result.samples.begin(), result.samples.end(), [](const RequestSample& a, const RequestSample& b) {
    return std::tie(a.send_us, a.recv_us, a.request_id) < std::tie(b.send_us, b.recv_us, b.request_id);
  });
  result.max_in_flight = max_in_flight.load();
  result.max_in_flight_per_user = max_per_user.load();
  result.wall_seconds = (monotonic_us() - run_start) / 1e6;
  return result;
}

}  // namespace esb
