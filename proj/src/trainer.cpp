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
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <optional>

#include "esb/hash.hpp"

namespace esb {

const char* schedule_mode_name(ScheduleMode mode) {
  return mode == ScheduleMode::Batch ? "batch" : "streaming";
}

ScheduleMode parse_schedule_mode(const std::string& name) {
  if (name == "batch") return ScheduleMode::Batch;
  if (name == "streaming") return ScheduleMode::Streaming;
  throw ConfigError("trainer.mode", "unknown schedule mode '" + name + "'");
}

void Schedule::validate() const {
  if (!(interval > 0)) throw ConfigError("trainer.interval", "must be positive");
  if (!(time_scale > 0)) throw ConfigError("trainer.time_scale", "must be positive");
  if (mode == ScheduleMode::Streaming) {
    if (effective_interval() < 1.0)
      throw ConfigError("trainer.interval", "streaming interval / time_scale must be at least 1 s");
    if (window == 0) throw ConfigError("trainer.window", "must be at least 1");
  }
}

const char* job_outcome_name(JobOutcome outcome) {
  switch (outcome) {
    case JobOutcome::Published: return "published";
    case JobOutcome::Rejected: return "rejected";
    case JobOutcome::Failed: return "failed";
  }
  return "failed";
}

std::string format_job_line(const TrainingJob& job) {
  char head[160];
  std::snprintf(head, sizeof head, "tick=%.3f kind=%s snapshot=%zu duration_ms=%.1f version=%llu outcome=%s",
                job.tick_s, model_kind_name(job.kind), job.snapshot_size, job.duration_ms,
                static_cast<unsigned long long>(job.version), job_outcome_name(job.outcome));
  std::string line = head;
  if (!job.detail.empty()) {
    std::string detail = job.detail;
    for (char& c : detail)
      if (c == '\n' || c == '"') c = '\'';
    line += " detail=\"" + detail + "\"";
  }
  return line;
}

namespace {

class ClassifierJob final : public ModelJob {
 public:
  ClassifierJob(ClassifierHyperparams params, int streaming_epochs)
      : params_(params), streaming_epochs_(streaming_epochs) {}

  ModelKind kind() const override { return ModelKind::Classifier; }

  ModelArtifact train(const std::vector<QueryLogEntry>& snapshot, bool warm_start,
                      std::uint64_t version) override {
    TextClassifier next;
    if (warm_start && model_) {
      next = *model_;
      continue_training(next, snapshot, streaming_epochs_, params_.learning_rate,
                        mix_seed(params_.seed, ++round_));
    } else {
      next = train_classifier(snapshot, params_);
    }
    model_ = std::move(next);
    return serialize(*model_, version);
  }

 private:
  ClassifierHyperparams params_;
  int streaming_epochs_;
  std::optional<TextClassifier> model_;
  std::uint64_t round_ = 0;
};

class PreferenceJob final : public ModelJob {
 public:
  PreferenceJob(std::vector<UserRecord> users, PreferenceHyperparams params, int streaming_epochs)
      : users_(std::move(users)), params_(std::move(params)), streaming_epochs_(streaming_epochs) {}

  ModelKind kind() const override { return ModelKind::Preference; }

  ModelArtifact train(const std::vector<QueryLogEntry>& snapshot, bool warm_start,
                      std::uint64_t version) override {
    PreferenceNet next;
    if (warm_start && model_) {
      next = *model_;
      continue_training(next, users_, snapshot, streaming_epochs_, params_.learning_rate,
                        mix_seed(params_.seed, ++round_));
    } else {
      next = train_preference(users_, snapshot, params_);
    }
    model_ = std::move(next);
    return serialize(*model_, version);
  }

 private:
  std::vector<UserRecord> users_;
  PreferenceHyperparams params_;
  int streaming_epochs_;
  std::optional<PreferenceNet> model_;
  std::uint64_t round_ = 0;
};

}  // namespace

std::unique_ptr<ModelJob> classifier_job(ClassifierHyperparams params, int streaming_epochs) {
  return std::make_unique<ClassifierJob>(params, streaming_epochs);
}

std::unique_ptr<ModelJob> preference_job(std::vector<UserRecord> users, PreferenceHyperparams params,
                                         int streaming_epochs) {
  return std::make_unique<PreferenceJob>(std::move(users), std::move(params), streaming_epochs);
}

struct TrainingScheduler::Lane {
  std::unique_ptr<ModelJob> job;
  std::uint64_t last_published = 0;
  std::atomic<bool> stale_pending{false};
  std::deque<QueryLogEntry> window;
  std::size_t seen = 0;
  bool trained = false;
  std::mutex run_mu;  // serializes jobs of this kind
};

TrainingScheduler::TrainingScheduler(Schedule schedule, LogSource source, ModelPublisher publisher,
                                     TrainerOptions options)
    : schedule_(schedule),
      source_(std::move(source)),
      publisher_(std::move(publisher)),
      options_(std::move(options)) {
  schedule_.validate();
  if (options_.publish_attempts < 1) throw ConfigError("trainer.publish_attempts", "must be at least 1");
}

TrainingScheduler::~TrainingScheduler() { stop(); }

void TrainingScheduler::add(std::unique_ptr<ModelJob> job, std::uint64_t current_version) {
  if (!threads_.empty()) throw PreconditionError("cannot add a model kind to a running scheduler");
  auto lane = std::make_unique<Lane>();
  lane->job = std::move(job);
  lane->last_published = current_version;
  lanes_.push_back(std::move(lane));
}

void TrainingScheduler::inject_stale_publish(ModelKind kind) {
  for (auto& lane : lanes_)
    if (lane->job->kind() == kind) lane->stale_pending = true;
}

void TrainingScheduler::start() {
  if (!threads_.empty()) return;
  {
    std::lock_guard lock(mu_);
    stopping_ = false;
  }
  started_ = std::chrono::steady_clock::now();
  for (auto& lane : lanes_) threads_.emplace_back([this, l = lane.get()] { run_lane(*l); });
}

void TrainingScheduler::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  for (auto& t : threads_) t.join();
  threads_.clear();
}

void TrainingScheduler::run_for(std::chrono::duration<double> duration) {
  start();
  {
    std::unique_lock lock(mu_);
    stop_cv_.wait_for(lock, duration, [this] { return stopping_; });
  }
  stop();
}

void TrainingScheduler::tick_now() {
  if (started_ == std::chrono::steady_clock::time_point{}) started_ = std::chrono::steady_clock::now();
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  for (auto& lane : lanes_) tick(*lane, t);
}

void TrainingScheduler::run_lane(Lane& lane) {
  using clock = std::chrono::steady_clock;
  const auto interval = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(schedule_.effective_interval()));
  for (std::int64_t k = 1;; ) {
    const auto due = started_ + k * interval;
    {
      std::unique_lock lock(mu_);
      if (stop_cv_.wait_until(lock, due, [this] { return stopping_; })) return;
    }
    tick(lane, std::chrono::duration<double>(due - started_).count());
    const auto elapsed = clock::now() - started_;
    k = std::max<std::int64_t>(k + 1, elapsed / interval + 1);
  }
}

void TrainingScheduler::tick(Lane& lane, double tick_s) {
  std::lock_guard run_lock(lane.run_mu);
  TrainingJob job;
  job.kind = lane.job->kind();
  job.tick_s = tick_s;
  const std::int64_t t0 = monotonic_us();
  try {
    std::vector<QueryLogEntry> snapshot = source_();
    bool warm = false;
    if (schedule_.mode == ScheduleMode::Streaming) {
      if (snapshot.size() < lane.seen) lane.seen = 0;  // source was replaced
      for (std::size_t i = lane.seen; i < snapshot.size(); ++i) lane.window.push_back(std::move(snapshot[i]));
      lane.seen = snapshot.size();
      while (lane.window.size() > schedule_.window) lane.window.pop_front();
      snapshot.assign(lane.window.begin(), lane.window.end());
      warm = lane.trained;
    }
    job.snapshot_size = snapshot.size();
    job.version = lane.stale_pending.exchange(false) ? lane.last_published : lane.last_published + 1;

    const ModelArtifact artifact = lane.job->train(snapshot, warm, job.version);
    lane.trained = true;

    auto backoff = options_.retry_backoff;
    for (int attempt = 1;; ++attempt) {
      try {
        publisher_(artifact.bytes);
        job.outcome = JobOutcome::Published;
        lane.last_published = job.version;
        break;
      } catch (const StaleModelError& e) {
        job.outcome = JobOutcome::Rejected;
        job.detail = e.what();
        break;
      } catch (const CorruptionError& e) {
        job.outcome = JobOutcome::Rejected;
        job.detail = e.what();
        break;
      } catch (const std::exception& e) {
        if (attempt >= options_.publish_attempts) {
          job.outcome = JobOutcome::Failed;
          job.detail = std::string("unreachable: ") + e.what();
          break;
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, std::chrono::milliseconds(1000));
      }
    }
  } catch (const std::exception& e) {
    job.outcome = JobOutcome::Failed;
    job.detail = e.what();
  }
  job.duration_ms = (monotonic_us() - t0) / 1000.0;
  record(std::move(job));
}

void TrainingScheduler::record(TrainingJob job) {
  std::lock_guard lock(mu_);
  job.job_id = next_job_id_++;
  if (!options_.jobs_log.empty()) {
    std::ofstream out(options_.jobs_log, std::ios::app);
    out << format_job_line(job) << '\n';
  }
  history_.push_back(std::move(job));
}

std::vector<TrainingJob> TrainingScheduler::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

IndexPublishResult build_and_publish_indexes(const std::vector<ProductRecord>& catalog,
                                             const TierAssignment& tiers,
                                             const std::vector<IndexTarget>& targets) {
  auto indexes = std::make_shared<const IndexSet>(build_indexes(catalog, tiers));
  const std::vector<std::uint8_t> snapshot = indexes->serialize();
  IndexPublishResult result;
  result.checksum = fnv1a64(std::span<const std::uint8_t>(snapshot));
  for (int t = 0; t < 3; ++t) result.doc_counts[t] = indexes->inverted[t].doc_count();
  for (const auto& target : targets) {
    target(indexes, snapshot);
    ++result.targets;
  }
  return result;
}

}  // namespace esb
