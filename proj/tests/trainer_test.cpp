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

#include "esb/trainer.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "esb/services/recommender.hpp"
#include "esb/services/searcher.hpp"
#include "esb/services/stack.hpp"
#include "esb/text.hpp"
#include "fixtures.hpp"

namespace esb {
namespace {

using testing::World;

const World& world() {
  static const World w;
  return w;
}

/// Cheap job that records its snapshots and can be told to fail.
class RecordingJob : public ModelJob {
 public:
  explicit RecordingJob(ModelKind kind = ModelKind::Preference) : kind_(kind) {}
  ModelKind kind() const override { return kind_; }
  ModelArtifact train(const std::vector<QueryLogEntry>& snapshot, bool warm_start,
                      std::uint64_t version) override {
    snapshots.push_back(snapshot);
    warm.push_back(warm_start);
    if (fail_next.exchange(false)) throw TrainingError("injected training failure");
    if (kind_ == ModelKind::Classifier) return serialize(TextClassifier::initialized({16, 2, 3, 1}, 1), version);
    return serialize(PreferenceNet::initialized({kPreferenceInputDim, 2, kRankFeatureDim}, 1), version);
  }

  std::vector<std::vector<QueryLogEntry>> snapshots;
  std::vector<bool> warm;
  std::atomic<bool> fail_next{false};

 private:
  ModelKind kind_;
};

std::unique_ptr<Recommender> make_recommender() {
  const auto m = world().models(4);
  return std::make_unique<Recommender>(world().user_store(), m.classifier, 1, m.preference, 1);
}

ModelPublisher publish_to(Recommender& rec) {
  return [&rec](std::span<const std::uint8_t> bytes) { return rec.reload(bytes); };
}

LogSource fixed_logs(std::size_t n) {
  return [n] {
    const auto& logs = world().logs;
    return std::vector<QueryLogEntry>(logs.begin(), logs.begin() + static_cast<long>(std::min(n, logs.size())));
  };
}

TEST(Scheduler, BatchTickPublishesOneVersion) {
  auto rec = make_recommender();
  TrainingScheduler scheduler(Schedule::batch(), fixed_logs(200), publish_to(*rec));
  PreferenceHyperparams params;
  params.hidden = {8};
  params.epochs = 2;
  scheduler.add(preference_job(world().users, params), rec->versions().preference);
  scheduler.tick_now();
  const auto h = scheduler.history();
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].outcome, JobOutcome::Published);
  EXPECT_EQ(h[0].version, 2u);
  EXPECT_EQ(h[0].snapshot_size, 200u);
  EXPECT_EQ(rec->versions(), (ModelVersions{1, 2}));
}

TEST(Scheduler, InjectedStalePublishIsRejectedAndScheduleContinues) {
  auto rec = make_recommender();
  TrainingScheduler scheduler(Schedule::streaming(), fixed_logs(100), publish_to(*rec));
  scheduler.add(std::make_unique<RecordingJob>(), 1);
  scheduler.tick_now();
  scheduler.inject_stale_publish(ModelKind::Preference);
  scheduler.tick_now();
  EXPECT_EQ(rec->versions().preference, 2u);
  scheduler.tick_now();
  const auto h = scheduler.history();
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].outcome, JobOutcome::Published);
  EXPECT_EQ(h[1].outcome, JobOutcome::Rejected);
  EXPECT_EQ(h[1].version, 2u);
  EXPECT_EQ(h[2].outcome, JobOutcome::Published);
  EXPECT_EQ(h[2].version, 3u);
  EXPECT_EQ(rec->versions().preference, 3u);
}

TEST(Scheduler, StreamingWindowKeepsNewestEntries) {
  std::vector<QueryLogEntry> source;
  auto append = [&](int n) {
    for (int i = 0; i < n; ++i) {
      QueryLogEntry e;
      e.user_id = world().users[0].user_id;
      e.query_text = {"e" + std::to_string(source.size())};
      source.push_back(e);
    }
  };
  Schedule s = Schedule::streaming();
  s.window = 5;
  auto job = std::make_unique<RecordingJob>();
  auto* probe = job.get();
  TrainingScheduler scheduler(s, [&] { return source; }, [](auto) { return ReloadAck{}; });
  scheduler.add(std::move(job), 0);

  append(3);
  scheduler.tick_now();
  append(4);
  scheduler.tick_now();
  scheduler.tick_now();
  append(1);
  scheduler.tick_now();

  auto names = [](const std::vector<QueryLogEntry>& snap) {
    std::vector<std::string> out;
    for (const auto& e : snap) out.push_back(e.query_text[0]);
    return out;
  };
  ASSERT_EQ(probe->snapshots.size(), 4u);
  EXPECT_EQ(names(probe->snapshots[0]), (std::vector<std::string>{"e0", "e1", "e2"}));
  EXPECT_EQ(names(probe->snapshots[1]), (std::vector<std::string>{"e2", "e3", "e4", "e5", "e6"}));
  EXPECT_EQ(names(probe->snapshots[2]), names(probe->snapshots[1]));
  EXPECT_EQ(names(probe->snapshots[3]), (std::vector<std::string>{"e3", "e4", "e5", "e6", "e7"}));
  EXPECT_EQ(probe->warm, (std::vector<bool>{false, true, true, true}));
}

TEST(Scheduler, FailedJobsDoNotStopLaterTicks) {
  auto rec = make_recommender();
  auto job = std::make_unique<RecordingJob>();
  auto* probe = job.get();
  TrainingScheduler scheduler(Schedule::streaming(), fixed_logs(50), publish_to(*rec));
  scheduler.add(std::move(job), 1);
  probe->fail_next = true;
  scheduler.tick_now();
  scheduler.tick_now();
  const auto h = scheduler.history();
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].outcome, JobOutcome::Failed);
  EXPECT_NE(h[0].detail.find("injected"), std::string::npos);
  EXPECT_EQ(h[1].outcome, JobOutcome::Published);
  EXPECT_EQ(h[1].version, 2u);
}

TEST(Scheduler, UnreachableTargetIsRetriedThenFailed) {
  int calls = 0;
  TrainerOptions options;
  options.publish_attempts = 3;
  options.retry_backoff = std::chrono::milliseconds(1);
  TrainingScheduler scheduler(
      Schedule::streaming(), fixed_logs(20),
      [&](auto) -> ReloadAck {
        ++calls;
        throw StageFailure("recommender.transport", "unavailable", "connection refused");
      },
      options);
  scheduler.add(std::make_unique<RecordingJob>(), 1);
  scheduler.tick_now();
  EXPECT_EQ(calls, 3);
  const auto h = scheduler.history();
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].outcome, JobOutcome::Failed);
  EXPECT_EQ(h[0].detail.rfind("unreachable", 0), 0u);
}

TEST(Scheduler, TimedStreamingRunCountsTicksAndWritesLog) {
  testing::TempDir dir;
  auto rec = make_recommender();
  Schedule s = Schedule::streaming();
  s.interval = 5.0;
  s.time_scale = 5.0;  // one tick per second
  TrainerOptions options;
  options.jobs_log = dir.path() / "jobs.log";
  TrainingScheduler scheduler(s, fixed_logs(100), publish_to(*rec), options);
  scheduler.add(std::make_unique<RecordingJob>(ModelKind::Preference), 1);
  scheduler.add(std::make_unique<RecordingJob>(ModelKind::Classifier), 1);
  scheduler.run_for(std::chrono::milliseconds(6050));

  const auto h = scheduler.history();
  for (ModelKind kind : {ModelKind::Preference, ModelKind::Classifier}) {
    std::vector<std::uint64_t> versions;
    for (const auto& j : h)
      if (j.kind == kind && j.outcome == JobOutcome::Published) versions.push_back(j.version);
    EXPECT_GE(versions.size(), 5u);
    EXPECT_LE(versions.size(), 6u);
    for (std::size_t i = 1; i < versions.size(); ++i) EXPECT_GT(versions[i], versions[i - 1]);
  }
  std::ifstream in(options.jobs_log);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("tick=", 0), 0u) << line;
    EXPECT_NE(line.find(" outcome="), std::string::npos);
    ++lines;
  }
  EXPECT_EQ(lines, h.size());
}

TEST(Scheduler, JobLineFormat) {
  TrainingJob job;
  job.kind = ModelKind::Classifier;
  job.tick_s = 10;
  job.snapshot_size = 7;
  job.duration_ms = 1.25;
  job.version = 3;
  job.outcome = JobOutcome::Rejected;
  job.detail = "version \"3\" is stale";
  EXPECT_EQ(format_job_line(job),
            "tick=10.000 kind=classifier snapshot=7 duration_ms=1.2 version=3 outcome=rejected "
            "detail=\"version '3' is stale\"");
}

TEST(Schedule, Validation) {
  EXPECT_NO_THROW(Schedule::batch().validate());
  EXPECT_NO_THROW(Schedule::streaming().validate());
  Schedule s = Schedule::streaming();
  s.time_scale = 20;
  EXPECT_THROW(s.validate(), ConfigError);
  s = Schedule::batch();
  s.time_scale = 3600;
  EXPECT_NO_THROW(s.validate());
  s.interval = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(parse_schedule_mode("batch"), ScheduleMode::Batch);
  EXPECT_THROW(parse_schedule_mode("hourly"), ConfigError);
}

TEST(IndexPublish, InstallsEverywhereWithStableChecksum) {
  const auto& w = world();
  Searcher searcher;
  Ranker ranker;
  const auto first = build_and_publish_indexes(w.catalog, w.tiers,
                                               {local_index_target(searcher), local_index_target(ranker)});
  EXPECT_EQ(first.targets, 2u);
  EXPECT_EQ(first.doc_counts[0], w.tiers.high.size());
  EXPECT_EQ(first.doc_counts[1], w.tiers.medium.size());
  EXPECT_EQ(first.doc_counts[2], w.tiers.low.size());
  EXPECT_EQ(searcher.index_checksum(), first.checksum);
  EXPECT_EQ(ranker.index_checksum(), first.checksum);
  EXPECT_EQ(searcher.stats()["doc_counts"]["high"], w.tiers.high.size());

  const auto second = build_and_publish_indexes(w.catalog, w.tiers, {local_index_target(searcher)});
  EXPECT_EQ(second.checksum, first.checksum);
}

TEST(IndexPublish, BuildErrorKeepsPriorIndexes) {
  const auto& w = world();
  Searcher searcher;
  build_and_publish_indexes(w.catalog, w.tiers, {local_index_target(searcher)});
  const auto before = searcher.index_checksum();
  auto broken = w.tiers;
  broken.low.pop_back();
  EXPECT_THROW(build_and_publish_indexes(w.catalog, broken, {local_index_target(searcher)}), BuildError);
  EXPECT_EQ(searcher.index_checksum(), before);
}

TEST(IndexPublish, RebuildDuringLoadNeverServesEmptyResults) {
  const auto& w = world();
  Searcher searcher;
  build_and_publish_indexes(w.catalog, w.tiers, {local_index_target(searcher)});
  const auto tokens = tokenize(w.logs[0].joined_query());
  ASSERT_FALSE(searcher.handle(tokens, {}, 10).product_ids.empty());

  std::atomic<bool> done{false};
  std::atomic<int> empty{0}, queries{0};
  std::thread reader([&] {
    while (!done.load()) {
      if (searcher.handle(tokens, {}, 10).product_ids.empty()) ++empty;
      ++queries;
    }
  });
  while (queries.load() == 0) std::this_thread::yield();
  for (int i = 0; i < 20; ++i) build_and_publish_indexes(w.catalog, w.tiers, {local_index_target(searcher)});
  done = true;
  reader.join();
  EXPECT_EQ(empty.load(), 0);
  EXPECT_GT(queries.load(), 0);
}

}  // namespace
}  // namespace esb
