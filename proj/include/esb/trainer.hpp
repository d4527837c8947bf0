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

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "esb/artifact.hpp"
#include "esb/datagen.hpp"
#include "esb/index.hpp"
#include "esb/services/types.hpp"

namespace esb {

enum class ScheduleMode { Batch, Streaming };

const char* schedule_mode_name(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& name);

struct Schedule {
  ScheduleMode mode = ScheduleMode::Streaming;
  double interval = 10.0;  // seconds, before scaling
  double time_scale = 1.0;
  std::size_t window = 10000;  // streaming only

  static Schedule batch() { return {ScheduleMode::Batch, 3600.0, 1.0, 10000}; }
  static Schedule streaming() { return {ScheduleMode::Streaming, 10.0, 1.0, 10000}; }

  double effective_interval() const { return interval / time_scale; }
  void validate() const;
};

/// Returns every log entry available right now. Later calls may return more
/// entries appended at the end.
using LogSource = std::function<std::vector<QueryLogEntry>()>;

/// Installs an artifact. Rejections surface as StaleModelError or
/// CorruptionError; anything else is treated as an unreachable target.
using ModelPublisher = std::function<ReloadAck(std::span<const std::uint8_t>)>;

/// Training logic for one model kind. Keeps the last trained model so
/// streaming ticks can warm-start from it.
class ModelJob {
 public:
  virtual ~ModelJob() = default;
  virtual ModelKind kind() const = 0;
  virtual ModelArtifact train(const std::vector<QueryLogEntry>& snapshot, bool warm_start,
                              std::uint64_t version) = 0;
};

/// `streaming_epochs` applies to warm-started ticks; cold starts use the
/// hyperparameters' epoch count.
std::unique_ptr<ModelJob> classifier_job(ClassifierHyperparams params, int streaming_epochs = 1);
std::unique_ptr<ModelJob> preference_job(std::vector<UserRecord> users, PreferenceHyperparams params,
                                         int streaming_epochs = 1);

enum class JobOutcome { Published, Rejected, Failed };
const char* job_outcome_name(JobOutcome outcome);

struct TrainingJob {
  std::uint64_t job_id = 0;
  ModelKind kind = ModelKind::Classifier;
  double tick_s = 0;  // seconds since the scheduler started
  std::size_t snapshot_size = 0;
  double duration_ms = 0;
  std::uint64_t version = 0;
  JobOutcome outcome = JobOutcome::Failed;
  std::string detail;
};

/// jobs.log line: tick, kind, snapshot size, duration, version, outcome.
std::string format_job_line(const TrainingJob& job);

struct TrainerOptions {
  int publish_attempts = 3;
  std::chrono::milliseconds retry_backoff{100};  // doubled per attempt, capped at 1 s
  std::filesystem::path jobs_log;                 // empty: no log file
};

/// One scheduler thread per registered model kind. Ticks fire at whole
/// multiples of the effective interval after start(); a slow job delays
/// only its own kind, and missed ticks are skipped rather than queued.
class TrainingScheduler {
 public:
  TrainingScheduler(Schedule schedule, LogSource source, ModelPublisher publisher,
                    TrainerOptions options = {});
  ~TrainingScheduler();

  /// `current_version` is the version already installed for this kind;
  /// the first publish uses current_version + 1.
  void add(std::unique_ptr<ModelJob> job, std::uint64_t current_version);

  void start();
  void stop();
  void run_for(std::chrono::duration<double> duration);

  /// Runs one tick for every kind on the calling thread.
  void tick_now();

  /// The next job of this kind republishes its last version.
  void inject_stale_publish(ModelKind kind);

  std::vector<TrainingJob> history() const;

 private:
  struct Lane;
  void run_lane(Lane& lane);
  void tick(Lane& lane, double tick_s);
  void record(TrainingJob job);

  Schedule schedule_;
  LogSource source_;
  ModelPublisher publisher_;
  TrainerOptions options_;
  std::vector<std::unique_ptr<Lane>> lanes_;
  std::vector<std::thread> threads_;
  std::chrono::steady_clock::time_point started_;
  mutable std::mutex mu_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  std::uint64_t next_job_id_ = 1;
  std::vector<TrainingJob> history_;
};

/// Installs a freshly built index set. The snapshot bytes are provided for
/// targets that ship them elsewhere.
using IndexTarget =
    std::function<void(const std::shared_ptr<const IndexSet>&, std::span<const std::uint8_t> snapshot)>;

struct IndexPublishResult {
  std::uint64_t checksum = 0;
  std::array<std::size_t, 3> doc_counts{};
  std::size_t targets = 0;
};

/// Builds all three index kinds and installs them in every target. A build
/// error is thrown before any target is touched.
IndexPublishResult build_and_publish_indexes(const std::vector<ProductRecord>& catalog,
                                             const TierAssignment& tiers,
                                             const std::vector<IndexTarget>& targets);

}  // namespace esb
