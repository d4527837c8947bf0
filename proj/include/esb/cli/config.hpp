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

#include <filesystem>
#include <string>

#include "esb/datagen.hpp"
#include "esb/loadgen.hpp"
#include "esb/preference_net.hpp"
#include "esb/services/stack.hpp"
#include "esb/text_classifier.hpp"
#include "esb/trainer.hpp"

namespace esb {

struct TrainerConfig {
  Schedule schedule = Schedule::streaming();
  int streaming_epochs = 1;
  double run_seconds = 0;  // serve --role trainer: 0 runs until signaled
};

struct BenchConfig {
  bool self_host = true;  // start the services inside the bench process
  bool http = true;       // transport when self-hosting
};

/// Every knob of a run, loaded from one YAML document. Missing keys keep
/// their defaults; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "esb-out";
  CatalogConfig catalog;
  QueryLogConfig logs;
  ClassifierHyperparams classifier;
  PreferenceHyperparams preference;
  RankerOptions ranker;
  RecommenderOptions recommender;
  LoadProfile load;
  TrainerConfig trainer;
  BenchConfig bench;
  std::string host = "127.0.0.1";
  ServicePorts ports{8080, 8081, 8082, 8083};
  int timeout_ms = 2000;

  /// Copies `seed` into every module that draws random numbers.
  void apply_seed(std::uint64_t s);
  /// Throws ConfigError naming the first offending field.
  void validate() const;

  StackOptions stack_options(bool http) const;
  Endpoint endpoint(int port) const { return {host, port, std::chrono::milliseconds(timeout_ms)}; }
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& yaml_text);
std::string dump_config(const RunConfig& config);

/// File names inside the output directory.
namespace files {
inline constexpr const char* kCatalog = "catalog.ndjson";
inline constexpr const char* kUsers = "users.ndjson";
inline constexpr const char* kLogs = "logs.ndjson";
inline constexpr const char* kTiers = "tiers.csv";
inline constexpr const char* kIndexes = "indexes.bin";
inline constexpr const char* kClassifier = "classifier.esbm";
inline constexpr const char* kPreference = "preference.esbm";
inline constexpr const char* kSamples = "samples.csv";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kJobsLog = "jobs.log";
}  // namespace files

}  // namespace esb
