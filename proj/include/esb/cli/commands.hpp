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

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "esb/cli/config.hpp"
#include "esb/metrics.hpp"
#include "esb/micro_bench.hpp"

namespace esb {

/// Everything a serving process loads from the output directory.
struct ServingState {
  ServingModels models;
  std::shared_ptr<const UserStore> users;
  std::shared_ptr<const IndexSet> indexes;
};

/// Throws IoError naming the first missing file.
ServingState load_serving_state(const RunConfig& config);

void cmd_datagen(const RunConfig& config, std::ostream& out);
void cmd_index(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);

/// Runs until `stop` becomes true. role ∈ {all, planer, recommender,
/// searcher, ranker, trainer}.
void cmd_serve(const RunConfig& config, const std::string& role, std::ostream& out,
               const std::atomic<bool>& stop);

/// Health-checks the target, runs the load profile, writes samples.csv,
/// report.json and report.txt. Missing data files are produced first.
BenchReport cmd_bench(const RunConfig& config, std::ostream& out);

/// Reads samples, writes report.json and report.txt next to `out_dir`.
BenchReport cmd_report(const std::filesystem::path& samples, const std::filesystem::path& out_dir,
                       std::ostream& out);

MicroBenchResult cmd_micro(const std::string& kernel, const std::string& shape, std::size_t repetitions,
                           std::ostream& out);

/// Full command line: parses arguments, runs one subcommand, prints a
/// single `error code=... message=...` line on failure. Returns the exit
/// status.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err, const std::atomic<bool>& stop);

}  // namespace esb
