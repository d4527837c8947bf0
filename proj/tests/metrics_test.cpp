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
#include <random>

#include <gtest/gtest.h>

#include "esb/random.hpp"
#include "fixtures.hpp"

namespace esb {
namespace {

// p given in tenths of a percent so that the rank is computed exactly.
std::int64_t brute_force_percentile(std::vector<std::int64_t> values, std::int64_t p_tenths) {
  std::sort(values.begin(), values.end());
  const auto n = static_cast<std::int64_t>(values.size());
  const std::int64_t rank = std::max<std::int64_t>((p_tenths * n + 999) / 1000, 1);
  return values[static_cast<std::size_t>(rank - 1)];
}

TEST(Percentile, DecadeArray) {
  const LatencyDistribution d({100, 30, 10, 20, 60, 40, 50, 70, 80, 90});
  EXPECT_EQ(percentile(d, 90), 90);
  EXPECT_EQ(percentile(d, 100), 100);
  EXPECT_EQ(percentile(d, 10), 10);
  EXPECT_EQ(percentile(d, 0.001), 10);
}

TEST(Percentile, SingleSampleAndErrors) {
  const LatencyDistribution one({42});
  for (double p : {0.5, 50.0, 99.9, 100.0}) EXPECT_EQ(percentile(one, p), 42);
  EXPECT_THROW(percentile(LatencyDistribution{}, 50), PreconditionError);
  EXPECT_THROW(percentile(one, 0), PreconditionError);
  EXPECT_THROW(percentile(one, 100.5), PreconditionError);
}

TEST(Percentile, NinetyNinePointNineOfThousandIsRank999) {
  std::vector<std::int64_t> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i + 1;
  EXPECT_EQ(percentile(LatencyDistribution(v), 99.9), 999);
}

TEST(Percentile, MatchesBruteForceOnRandomDistributions) {
  Rng rng(2024);
  const std::vector<std::pair<double, std::int64_t>> ps{{50, 500}, {90, 900}, {99, 990}, {99.9, 999}};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = trial == 0 ? 10007 : 1 + rng.below(10007);
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = static_cast<std::int64_t>(rng.below(1'000'000));
    const LatencyDistribution d(v);
    for (const auto& [p, tenths] : ps) ASSERT_EQ(percentile(d, p), brute_force_percentile(v, tenths)) << n;
  }
}

TEST(Percentile, MonotoneInP) {
  Rng rng(3);
  std::vector<std::int64_t> v(777);
  for (auto& x : v) x = static_cast<std::int64_t>(rng.below(5000));
  const LatencyDistribution d(v);
  std::int64_t previous = d.min();
  for (double p = 0.5; p <= 100.0; p += 0.5) {
    const auto q = percentile(d, p);
    EXPECT_GE(q, previous);
    previous = q;
  }
  EXPECT_EQ(previous, d.max());
}

RequestSample sample(std::string id, std::int64_t send, std::int64_t latency,
                     std::vector<std::pair<std::string, std::int64_t>> stages, bool ok = true,
                     bool warmup = false) {
  RequestSample s;
  s.request_id = std::move(id);
  s.send_us = send;
  s.recv_us = send + latency;
  s.latency_us = latency;
  s.success = ok;
  s.in_warmup = warmup;
  for (auto& [name, d] : stages) s.stages.push_back({name, 0, d});
  return s;
}

std::vector<std::pair<std::string, std::int64_t>> full_stages(std::int64_t base) {
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (std::size_t i = 0; i < stage_names().size(); ++i)
    out.emplace_back(stage_names()[i], base + static_cast<std::int64_t>(i));
  return out;
}

TEST(BuildReport, IdenticalLatenciesCollapse) {
  std::vector<RequestSample> samples;
  for (int i = 0; i < 50; ++i) samples.push_back(sample("r" + std::to_string(i), i * 1000, 4000, {}));
  const auto r = build_report(samples);
  const auto* total = r.scope("total");
  ASSERT_NE(total, nullptr);
  EXPECT_DOUBLE_EQ(total->average_ms, 4.0);
  EXPECT_DOUBLE_EQ(total->p90_ms, 4.0);
  EXPECT_DOUBLE_EQ(total->p99_ms, 4.0);
}

TEST(BuildReport, CommunicationResidualAndScopeShape) {
  // Stage durations 100..109 sum to 1045.
  std::vector<RequestSample> samples{sample("a", 0, 2045, full_stages(100)),
                                     sample("b", 10, 3045, full_stages(100))};
  const auto r = build_report(samples);
  for (const auto& name : stage_names()) EXPECT_NE(r.scope(name), nullptr) << name;
  for (const char* name : {"total", "recommender", "searcher", "communication"})
    EXPECT_NE(r.scope(name), nullptr) << name;
  EXPECT_DOUBLE_EQ(r.scope("communication")->min_ms, 1.0);
  EXPECT_DOUBLE_EQ(r.scope("communication")->max_ms, 2.0);
  EXPECT_DOUBLE_EQ(r.scope("communication")->average_ms, 1.5);
  // recommender sub-stages are indices 1..4: 101+102+103+104.
  EXPECT_DOUBLE_EQ(r.scope("recommender")->average_ms, 0.410);
  EXPECT_DOUBLE_EQ(r.scope("searcher")->average_ms, 0.105 + 0.106 + 0.107);
}

TEST(BuildReport, WarmupFailuresAndThroughput) {
  std::vector<RequestSample> samples{
      sample("w", 0, 100, {}, true, true),
      sample("a", 1'000'000, 1000, {}),
      sample("f", 1'500'000, 1000, {}, false),
      sample("b", 2'999'000, 1000, {}),
  };
  const auto r = build_report(samples);
  EXPECT_EQ(r.measured_count, 3u);
  EXPECT_EQ(r.success_count, 2u);
  EXPECT_EQ(r.failure_count, 1u);
  EXPECT_DOUBLE_EQ(r.window_s, 2.0);
  EXPECT_DOUBLE_EQ(r.throughput_rps, 1.0);
  EXPECT_EQ(r.scope("total")->count, 2u);
}

TEST(BuildReport, NoSuccessfulSamplesIsAnError) {
  std::vector<RequestSample> samples{sample("w", 0, 100, {}, true, true), sample("f", 1, 2, {}, false)};
  EXPECT_THROW(build_report(samples), PreconditionError);
  EXPECT_THROW(build_report({}), PreconditionError);
}

std::vector<RequestSample> random_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RequestSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto stages = full_stages(static_cast<std::int64_t>(rng.below(300)));
    const auto latency = 2000 + static_cast<std::int64_t>(rng.below(20000));
    out.push_back(sample("s" + std::to_string(seed) + "-" + std::to_string(i),
                         static_cast<std::int64_t>(rng.below(10'000'000)), latency, stages,
                         rng.bernoulli(0.95), rng.bernoulli(0.05)));
  }
  return out;
}

TEST(BuildReportProperties, PermutationInvariantAndOrdered) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto samples = random_samples(400, seed);
    const auto expected = build_report(samples).to_json().dump();
    std::mt19937_64 g(seed);
    std::shuffle(samples.begin(), samples.end(), g);
    EXPECT_EQ(build_report(samples).to_json().dump(), expected);
    for (const auto& s : build_report(samples).scopes) {
      EXPECT_LE(s.min_ms, s.average_ms) << s.scope;
      EXPECT_LE(s.average_ms, s.max_ms) << s.scope;
      EXPECT_LE(s.p90_ms, s.p99_ms) << s.scope;
      EXPECT_LE(s.p99_ms, s.max_ms) << s.scope;
    }
  }
}

TEST(BuildReportProperties, MergingEqualsConcatenation) {
  const auto a = random_samples(300, 41);
  const auto b = random_samples(200, 42);
  std::vector<RequestSample> ab(a), ba(b);
  ab.insert(ab.end(), b.begin(), b.end());
  ba.insert(ba.end(), a.begin(), a.end());
  EXPECT_EQ(build_report(ab).to_json().dump(), build_report(ba).to_json().dump());
}

TEST(Report, JsonRoundTripAndRenderings) {
  const auto r = build_report(random_samples(100, 7));
  const auto back = BenchReport::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), r.to_json().dump());
  const auto text = r.to_text();
  for (const char* name : {"total", "recommender.serving", "searcher.high", "communication"})
    EXPECT_NE(text.find(name), std::string::npos) << name;
  const auto csv = r.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.scopes.size() + 1));
}

TEST(SamplesCsv, RoundTrip) {
  testing::TempDir dir;
  const auto samples = random_samples(50, 9);
  const auto path = dir.path() / "samples.csv";
  write_samples_csv(path, samples);
  const auto back = read_samples_csv(path);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(back[i].request_id, samples[i].request_id);
    EXPECT_EQ(back[i].send_us, samples[i].send_us);
    EXPECT_EQ(back[i].recv_us, samples[i].recv_us);
    EXPECT_EQ(back[i].latency_us, samples[i].latency_us);
    EXPECT_EQ(back[i].success, samples[i].success);
    EXPECT_EQ(back[i].in_warmup, samples[i].in_warmup);
    ASSERT_EQ(back[i].stages.size(), samples[i].stages.size());
    for (std::size_t k = 0; k < samples[i].stages.size(); ++k) {
      EXPECT_EQ(back[i].stages[k].stage, samples[i].stages[k].stage);
      EXPECT_EQ(back[i].stages[k].duration_us, samples[i].stages[k].duration_us);
    }
  }
}

}  // namespace
}  // namespace esb
