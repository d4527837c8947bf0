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

#include "esb/cli/commands.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "esb/cli/config.hpp"
#include "esb/services/clients.hpp"
#include "esb/services/http.hpp"
#include "fixtures.hpp"

namespace esb {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args, const std::atomic<bool>& stop) {
  args.insert(args.begin(), "esbench");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, stop);
  return {code, out.str(), err.str()};
}

CliResult run(std::vector<std::string> args) {
  static const std::atomic<bool> never{false};
  return run(std::move(args), never);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A config small enough that datagen, train and a short bench take seconds.
fs::path write_small_config(const fs::path& dir, const std::string& extra = "") {
  const fs::path path = dir / "small.yaml";
  std::ofstream(path) << "out_dir: " << (dir / "out").string() << "\n"
                      << "catalog: {products: 400, attribute_fields: 8, users: 12, categories: 5, vocabulary: 300}\n"
                      << "logs: {count: 800}\n"
                      << "classifier: {buckets: 4096, dim: 8, epochs: 2}\n"
                      << "preference: {hidden: [16], epochs: 1}\n"
                      << "load: {virtual_users: 2, mean_think_time: 0.001, warmup: 0, total_requests: 60}\n"
                      << extra;
  return path;
}

TEST(Cli, MicroPrintsOneJsonLine) {
  const auto r = run({"micro", "dense", "4x8x16", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json line = json::parse(r.out);
  EXPECT_EQ(line["kernel"], "dense");
  EXPECT_EQ(line["repetitions"], 10);
  EXPECT_EQ(line["n"], 16);

  const auto bad = run({"micro", "conv", "4x4"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.err.rfind("error code=usage", 0), 0u) << bad.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"launch"}).code, 2);
  const auto bad_config = run({"datagen", "--config", "/nonexistent/esb.yaml"});
  EXPECT_EQ(bad_config.code, 2);
  EXPECT_NE(bad_config.err.find("field=--config"), std::string::npos) << bad_config.err;
}

TEST(Cli, ConfigErrorsStopBeforeSideEffects) {
  testing::TempDir dir;
  const auto config = write_small_config(dir.path(), "ports: {planer: 9000, searcher: 9000}\n");
  const auto r = run({"datagen", "--config", config.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("field=ports.searcher"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out"));

  const auto role = run({"serve", "--config", write_small_config(dir.path()).string(), "--role", "chef"});
  EXPECT_EQ(role.code, 2);
  EXPECT_NE(role.err.find("field=--role"), std::string::npos) << role.err;
}

TEST(Cli, ReportOnEmptySamplesFails) {
  testing::TempDir dir;
  std::ofstream(dir / "samples.csv").close();
  const auto r = run({"report", (dir / "samples.csv").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("error code=empty_input", 0), 0u) << r.err;

  std::ofstream(dir / "header.csv") << kSamplesCsvHeader << "\n";
  EXPECT_NE(run({"report", (dir / "header.csv").string()}).code, 0);
}

TEST(Cli, DatagenIsIdempotentAndSeedOverrides) {
  testing::TempDir dir;
  const auto config = write_small_config(dir.path());
  ASSERT_EQ(run({"datagen", "--config", config.string()}).code, 0);
  const auto first = slurp(dir / "out" / "catalog.ndjson");
  const auto first_logs = slurp(dir / "out" / "logs.ndjson");
  ASSERT_EQ(run({"datagen", "--config", config.string()}).code, 0);
  EXPECT_EQ(slurp(dir / "out" / "catalog.ndjson"), first);
  EXPECT_EQ(slurp(dir / "out" / "logs.ndjson"), first_logs);

  const auto other = dir / "other";
  ASSERT_EQ(run({"datagen", "--config", config.string(), "--out", other.string(), "--seed", "5"}).code, 0);
  EXPECT_NE(slurp(other / "catalog.ndjson"), first);
}

std::vector<std::string> request_ids(const fs::path& samples) {
  std::vector<std::string> ids;
  for (const auto& s : read_samples_csv(samples)) ids.push_back(s.request_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

TEST(Cli, PipelineProducesReportsAndRepeats) {
  testing::TempDir a, b;
  std::vector<nlohmann::ordered_json> reports;
  std::vector<std::vector<std::string>> ids;
  for (const auto* dir : {&a, &b}) {
    const auto config = write_small_config(dir->path(), "bench: {transport: http}\n").string();
    for (const char* cmd : {"datagen", "index", "train"}) ASSERT_EQ(run({cmd, "--config", config}).code, 0) << cmd;
    const auto r = run({"bench", "--config", config});
    ASSERT_EQ(r.code, 0) << r.err;
    const fs::path out = dir->path() / "out";
    for (const char* f : {"samples.csv", "report.json", "report.txt", "indexes.bin", "classifier.esbm"})
      EXPECT_TRUE(fs::exists(out / f)) << f;
    reports.push_back(nlohmann::ordered_json::parse(slurp(out / "report.json")));
    ids.push_back(request_ids(out / "samples.csv"));
  }
  EXPECT_GT(reports[0]["throughput_rps"].get<double>(), 0.0);
  EXPECT_EQ(reports[0]["failure_count"], 0);
  std::vector<std::string> keys[2];
  for (int i = 0; i < 2; ++i)
    for (auto it = reports[i]["scopes"].begin(); it != reports[i]["scopes"].end(); ++it) keys[i].push_back(it.key());
  EXPECT_EQ(keys[0], keys[1]);
  EXPECT_EQ(keys[0].front(), "total");
  EXPECT_EQ(ids[0].size(), ids[1].size());

  // report re-aggregates the same samples into the same numbers.
  const auto samples = a.path() / "out" / "samples.csv";
  const auto again = a.path() / "again";
  ASSERT_EQ(run({"report", samples.string(), "--out", again.string()}).code, 0);
  EXPECT_EQ(nlohmann::ordered_json::parse(slurp(again / "report.json")), reports[0]);
}

std::array<int, 4> free_ports() {
  std::array<int, 4> ports{};
  std::vector<std::unique_ptr<HttpService>> holders;
  for (int& p : ports) {
    holders.push_back(std::make_unique<HttpService>("probe"));
    p = holders.back()->start("127.0.0.1", 0);
  }
  for (auto& h : holders) h->stop();
  return ports;
}

bool wait_healthy(const Endpoint& e) {
  for (int i = 0; i < 400; ++i) {
    if (http_health(e)) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  return false;
}

TEST(Cli, SplitRolesBehaveLikeAllInOne) {
  testing::TempDir dir;
  const auto base = write_small_config(dir.path());
  for (const char* cmd : {"datagen", "index", "train"}) ASSERT_EQ(run({cmd, "--config", base.string()}).code, 0);

  auto config_with_ports = [&](const std::string& name, const std::array<int, 4>& p, const std::string& extra) {
    const fs::path path = dir / name;
    std::ofstream(path) << slurp(base) << "ports: {planer: " << p[0] << ", recommender: " << p[1]
                        << ", searcher: " << p[2] << ", ranker: " << p[3] << "}\n"
                        << extra;
    return path.string();
  };
  const auto split_ports = free_ports();
  const auto all_ports = free_ports();
  const auto split = config_with_ports(
      "split.yaml", split_ports, "trainer: {mode: streaming, interval: 1, run_seconds: 2.5}\n");
  const auto all = config_with_ports("all.yaml", all_ports, "");

  std::atomic<bool> stop{false};
  std::vector<std::thread> servers;
  std::vector<CliResult> results(5);
  const std::vector<std::pair<std::string, std::string>> roles{
      {"recommender", split}, {"searcher", split}, {"ranker", split}, {"planer", split}, {"all", all}};
  for (std::size_t i = 0; i < roles.size(); ++i)
    servers.emplace_back([&, i] { results[i] = run({"serve", "--config", roles[i].second, "--role", roles[i].first}, stop); });

  for (int port : split_ports) ASSERT_TRUE(wait_healthy({"127.0.0.1", port}));
  for (int port : all_ports) ASSERT_TRUE(wait_healthy({"127.0.0.1", port}));

  const auto logs = read_logs(dir / "out" / "logs.ndjson");
  auto split_client = http_planer_client({"127.0.0.1", split_ports[0]});
  auto all_client = http_planer_client({"127.0.0.1", all_ports[0]});
  for (std::size_t i = 0; i < 40; ++i) {
    const SearchRequest r{"c" + std::to_string(i), logs[i].user_id, logs[i].joined_query(), 30};
    EXPECT_EQ(result_body(split_client->search(r)), result_body(all_client->search(r)));
  }

  // The trainer role republishes indexes and streams new model versions
  // into the split recommender.
  const auto trainer = run({"serve", "--config", split, "--role", "trainer"});
  EXPECT_EQ(trainer.code, 0) << trainer.err;
  EXPECT_NE(trainer.out.find("indexes_published=3"), std::string::npos) << trainer.out;
  const auto versions = http_stats({"127.0.0.1", split_ports[1]})["model_version"];
  EXPECT_GE(versions["classifier"].get<int>(), 2);
  EXPECT_GE(versions["preference"].get<int>(), 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "jobs.log"));

  stop = true;
  for (auto& t : servers) t.join();
  for (const auto& r : results) EXPECT_EQ(r.code, 0) << r.err;
}

}  // namespace
}  // namespace esb
