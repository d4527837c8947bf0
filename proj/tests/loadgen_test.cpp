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
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "esb/services/clients.hpp"

namespace esb {
namespace {

std::vector<double> draws(std::size_t n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = sample_think_time(ThinkDistribution::Exponential, mean, rng);
  return out;
}

TEST(ThinkTime, ExponentialMomentsAndCdf) {
  for (double mean : {1.0, 0.05}) {
    auto x = draws(100'000, mean, 17);
    double sum = 0;
    for (double v : x) sum += v;
    const double m = sum / x.size();
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    const double var = ss / (x.size() - 1);
    EXPECT_NEAR(m / mean, 1.0, 0.02);
    EXPECT_NEAR(var / (mean * mean), 1.0, 0.05);

    std::sort(x.begin(), x.end());
    double worst = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = 1.0 - std::exp(-x[i] / mean);
      worst = std::max({worst, std::abs((i + 1) / n - f), std::abs(i / n - f)});
    }
    EXPECT_LT(worst, 0.01);
  }
}

TEST(ThinkTime, FixedAndBoundaries) {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_think_time(ThinkDistribution::Fixed, 0.5, rng), 0.5);
  EXPECT_EQ(sample_think_time(ThinkDistribution::Fixed, 0.0, rng), 0.0);
  EXPECT_EQ(exponential_think_time(2.0, 1.0), 0.0);
  EXPECT_NEAR(exponential_think_time(2.0, std::exp(-1.0)), 2.0, 1e-12);
  EXPECT_THROW(exponential_think_time(1.0, 0.0), PreconditionError);
  EXPECT_THROW(sample_think_time(ThinkDistribution::Exponential, 0.0, rng), ConfigError);
  EXPECT_THROW(sample_think_time(ThinkDistribution::Exponential, -1.0, rng), ConfigError);
  EXPECT_THROW(sample_think_time(ThinkDistribution::Fixed, -1.0, rng), ConfigError);
  for (double v : draws(10'000, 1.0, 3)) EXPECT_GE(v, 0.0);
}

TEST(ThinkTime, DistributionNames) {
  for (auto d : {ThinkDistribution::Exponential, ThinkDistribution::Fixed})
    EXPECT_EQ(parse_think_distribution(think_distribution_name(d)), d);
  EXPECT_THROW(parse_think_distribution("poisson"), ConfigError);
}

std::vector<QueryLogEntry> query_source(std::size_t n) {
  std::vector<QueryLogEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    QueryLogEntry e;
    e.user_id = static_cast<UserId>(i % 5);
    e.query_text = {"q" + std::to_string(i)};
    out.push_back(e);
  }
  return out;
}

/// Records what it was asked and tracks concurrency per virtual user.
class RecordingTarget : public PlanerClient {
 public:
  explicit RecordingTarget(std::chrono::microseconds service_time = {}, int fail_every = 0)
      : service_time_(service_time), fail_every_(fail_every) {}

  SearchResponse search(const SearchRequest& request) override {
    const std::string vu = request.request_id.substr(0, request.request_id.rfind('-'));
    {
      std::lock_guard lock(mu_);
      if (++outstanding_[vu] > 1) overlapped_ = true;
      seen_[request.request_id] = {request.user_id, request.query_text};
      ++calls_;
      if (fail_every_ && calls_ % fail_every_ == 0) {
        --outstanding_[vu];
        throw StageFailure("searcher.transport", "unavailable", "injected");
      }
    }
    if (service_time_.count() > 0) std::this_thread::sleep_for(service_time_);
    SearchResponse r;
    r.request_id = request.request_id;
    r.timings.push_back({"planer", 0, 1});
    std::lock_guard lock(mu_);
    --outstanding_[vu];
    return r;
  }

  bool overlapped() const { return overlapped_; }
  std::map<std::string, std::pair<UserId, std::string>> seen() const { return seen_; }

 private:
  std::chrono::microseconds service_time_;
  int fail_every_;
  std::mutex mu_;
  std::map<std::string, int> outstanding_;
  std::map<std::string, std::pair<UserId, std::string>> seen_;
  int calls_ = 0;
  bool overlapped_ = false;
};

LoadProfile quick_profile(std::size_t users, std::size_t total, double think = 0.001) {
  LoadProfile p;
  p.virtual_users = users;
  p.total_requests = total;
  p.mean_think_time = think;
  p.warmup = 0;
  p.seed = 99;
  return p;
}

TEST(RunLoad, SingleUserNoThinkIsSerial) {
  auto p = quick_profile(1, 200, 0.0);
  p.think_distribution = ThinkDistribution::Fixed;
  RecordingTarget target;
  const auto r = run_load(p, target, query_source(50));
  EXPECT_EQ(r.samples.size(), 200u);
  EXPECT_EQ(r.max_in_flight, 1u);
  for (std::size_t i = 1; i < r.samples.size(); ++i) EXPECT_GE(r.samples[i].send_us, r.samples[i - 1].recv_us);
}

TEST(RunLoad, ClosedLoopAndExactCount) {
  const auto p = quick_profile(6, 300);
  RecordingTarget target(std::chrono::microseconds(300));
  const auto r = run_load(p, target, query_source(40));
  std::size_t measured = 0;
  for (const auto& s : r.samples) measured += s.in_warmup ? 0 : 1;
  EXPECT_EQ(measured, 300u);
  EXPECT_EQ(r.max_in_flight_per_user, 1u);
  EXPECT_FALSE(target.overlapped());
  EXPECT_LE(r.max_in_flight, 6u);
  for (const auto& s : r.samples) {
    EXPECT_TRUE(s.success);
    EXPECT_GE(s.latency_us, 0);
    EXPECT_EQ(s.latency_us, s.recv_us - s.send_us);
  }
  EXPECT_TRUE(std::is_sorted(r.samples.begin(), r.samples.end(),
                             [](const auto& a, const auto& b) { return a.send_us < b.send_us; }));
}

TEST(RunLoad, WarmupSamplesAreFlaggedAndExcludedFromCount) {
  auto p = quick_profile(3, 60, 0.005);
  p.warmup = 0.1;
  RecordingTarget target;
  const auto r = run_load(p, target, query_source(10));
  std::size_t warm = 0, measured = 0;
  for (const auto& s : r.samples) {
    if (s.in_warmup) {
      ++warm;
      EXPECT_LT(s.send_us, 100'000);
    } else {
      ++measured;
      EXPECT_GE(s.send_us, 100'000);
    }
  }
  EXPECT_GT(warm, 0u);
  EXPECT_EQ(measured, 60u);
}

TEST(RunLoad, FailuresAreRecordedNotFatal) {
  const auto p = quick_profile(2, 100);
  RecordingTarget target({}, 7);
  const auto r = run_load(p, target, query_source(10));
  std::size_t failed = 0;
  for (const auto& s : r.samples) failed += s.success ? 0 : 1;
  EXPECT_GT(failed, 0u);
  std::size_t measured = 0;
  for (const auto& s : r.samples) measured += s.in_warmup ? 0 : 1;
  EXPECT_EQ(measured, 100u);
}

TEST(RunLoad, StartupChecks) {
  const auto p = quick_profile(1, 5);
  RecordingTarget target;
  EXPECT_THROW(run_load(p, target, {}), PreconditionError);
  try {
    run_load(p, target, query_source(3), [] { return false; });
    FAIL() << "expected a failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unavailable");
  }
}

TEST(Schedule, DeterministicAndFollowedByRunLoad) {
  const auto p = quick_profile(4, 80);
  const auto queries = query_source(23);
  const auto a = plan_schedule(p, queries, 30);
  const auto b = plan_schedule(p, queries, 30);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].request_id, b[i].request_id);
    EXPECT_EQ(a[i].query_text, b[i].query_text);
    EXPECT_EQ(a[i].think_time, b[i].think_time);
  }
  auto other = p;
  other.seed = 100;
  EXPECT_NE(plan_schedule(other, queries, 30)[0].think_time, a[0].think_time);

  RecordingTarget target;
  run_load(p, target, queries);
  std::map<std::string, const ScheduledRequest*> by_id;
  for (const auto& s : a) by_id[s.request_id] = &s;
  std::size_t matched = 0;
  for (const auto& [id, sent] : target.seen()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    EXPECT_EQ(sent.first, it->second->user_id) << id;
    EXPECT_EQ(sent.second, it->second->query_text) << id;
    ++matched;
  }
  EXPECT_GE(matched, 80u);
}

TEST(Schedule, RoundRobinReplay) {
  const auto queries = query_source(10);
  EXPECT_EQ(&replayed_query(queries, 3, 0, 0), &queries[0]);
  EXPECT_EQ(&replayed_query(queries, 3, 2, 1), &queries[5]);
  EXPECT_EQ(&replayed_query(queries, 3, 1, 3), &queries[0]);
  EXPECT_THROW(replayed_query({}, 3, 0, 0), PreconditionError);
}

TEST(Profile, Validation) {
  LoadProfile p;
  EXPECT_NO_THROW(p.validate());
  p.virtual_users = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.total_requests = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.warmup = -1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.mean_think_time = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.think_distribution = ThinkDistribution::Fixed;
  EXPECT_NO_THROW(p.validate());
}

}  // namespace
}  // namespace esb
