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

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace esb {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path in_out(const RunConfig& c, const char* name) { return c.out_dir / name; }

void require_file(const fs::path& path, const char* producer) {
  if (!fs::exists(path))
    throw IoError("missing " + path.string() + " (run `esbench " + producer + "` first)");
}

std::shared_ptr<const IndexSet> load_indexes(const RunConfig& c) {
  const auto path = in_out(c, files::kIndexes);
  require_file(path, "index");
  return std::make_shared<const IndexSet>(IndexSet::deserialize(read_file_bytes(path)));
}

std::shared_ptr<const UserStore> load_users(const RunConfig& c) {
  const auto path = in_out(c, files::kUsers);
  require_file(path, "datagen");
  return std::make_shared<const UserStore>(read_users(path));
}

ServingModels load_models(const RunConfig& c) {
  const auto cls_path = in_out(c, files::kClassifier);
  const auto pref_path = in_out(c, files::kPreference);
  require_file(cls_path, "train");
  require_file(pref_path, "train");
  const auto cls = read_file_bytes(cls_path);
  const auto pref = read_file_bytes(pref_path);
  ServingModels m;
  m.classifier = deserialize_classifier(cls);
  m.classifier_version = inspect_artifact(cls).version;
  m.preference = deserialize_preference(pref);
  m.preference_version = inspect_artifact(pref).version;
  return m;
}

void wait_for(const std::atomic<bool>& stop, double seconds = 0) {
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (!stop.load() && (seconds <= 0 || std::chrono::steady_clock::now() < until))
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_reports(const BenchReport& report, const fs::path& dir) {
  write_text(dir / files::kReportJson, report.to_json().dump(2) + "\n");
  write_text(dir / files::kReportText, report.to_text());
}

}  // namespace

ServingState load_serving_state(const RunConfig& config) {
  return {load_models(config), load_users(config), load_indexes(config)};
}

void cmd_datagen(const RunConfig& c, std::ostream& out) {
  c.validate();
  fs::create_directories(c.out_dir);
  const auto catalog = generate_catalog(c.catalog);
  const auto users = generate_users(c.catalog);
  const auto logs = generate_query_logs(catalog, users, c.logs);
  const auto tiers = assign_tiers(catalog);
  write_catalog(in_out(c, files::kCatalog), catalog);
  write_users(in_out(c, files::kUsers), users);
  write_logs(in_out(c, files::kLogs), logs);
  write_tiers(in_out(c, files::kTiers), tiers);
  out << "datagen: products=" << catalog.size() << " users=" << users.size() << " logs=" << logs.size()
      << " tiers=" << tiers.high.size() << "/" << tiers.medium.size() << "/" << tiers.low.size()
      << " dir=" << c.out_dir.string() << "\n";
}

void cmd_index(const RunConfig& c, std::ostream& out) {
  c.validate();
  require_file(in_out(c, files::kCatalog), "datagen");
  require_file(in_out(c, files::kTiers), "datagen");
  const auto catalog = read_catalog(in_out(c, files::kCatalog));
  const auto tiers = read_tiers(in_out(c, files::kTiers));
  const IndexSet indexes = build_indexes(catalog, tiers);
  const auto bytes = indexes.serialize();
  write_text(in_out(c, files::kIndexes), std::string(bytes.begin(), bytes.end()));
  out << "index: docs=" << indexes.docs.size() << " high=" << indexes.tier(Tier::High).doc_count()
      << " medium=" << indexes.tier(Tier::Medium).doc_count() << " low=" << indexes.tier(Tier::Low).doc_count()
      << " checksum=" << indexes.checksum() << "\n";
}

void cmd_train(const RunConfig& c, std::ostream& out) {
  c.validate();
  require_file(in_out(c, files::kLogs), "datagen");
  require_file(in_out(c, files::kUsers), "datagen");
  const auto logs = read_logs(in_out(c, files::kLogs));
  const auto users = read_users(in_out(c, files::kUsers));

  const auto t0 = std::chrono::steady_clock::now();
  const TextClassifier classifier = train_classifier(logs, c.classifier);
  const auto t1 = std::chrono::steady_clock::now();
  const PreferenceNet preference = train_preference(users, logs, c.preference);
  const auto t2 = std::chrono::steady_clock::now();

  write_artifact(in_out(c, files::kClassifier), serialize(classifier, 1));
  write_artifact(in_out(c, files::kPreference), serialize(preference, 1));
  const auto secs = [](auto d) { return std::chrono::duration<double>(d).count(); };
  out << "train: classifier_accuracy=" << classifier_accuracy(classifier, logs)
      << " classifier_s=" << secs(t1 - t0) << " preference_mse=" << preference_mse(preference, users, logs)
      << " preference_s=" << secs(t2 - t1) << " version=1\n";
}

void cmd_serve(const RunConfig& c, const std::string& role, std::ostream& out, const std::atomic<bool>& stop) {
  c.validate();
  static const std::set<std::string> kRoles = {"all", "planer", "recommender", "searcher", "ranker", "trainer"};
  if (!kRoles.count(role)) throw ConfigError("--role", "unknown role '" + role + "'");
  if (role == "all") {
    ServingState state = load_serving_state(c);
    StackOptions options = c.stack_options(true);
    options.ports = c.ports;
    ServiceStack stack(std::move(state.models), state.users, state.indexes, options);
    const auto& p = stack.ports();
    out << "serve: role=all planer=" << p.planer << " recommender=" << p.recommender
        << " searcher=" << p.searcher << " ranker=" << p.ranker << std::endl;
    wait_for(stop);
    return;
  }
  if (role == "recommender") {
    ServingModels m = load_models(c);
    Recommender recommender(load_users(c), std::move(m.classifier), m.classifier_version,
                            std::move(m.preference), m.preference_version, c.recommender);
    HttpService http("recommender");
    mount_recommender(http, recommender);
    out << "serve: role=recommender port=" << http.start(c.host, c.ports.recommender) << std::endl;
    wait_for(stop);
    return;
  }
  if (role == "searcher") {
    Searcher searcher;
    searcher.install_indexes(load_indexes(c));
    HttpService http("searcher");
    mount_searcher(http, searcher);
    out << "serve: role=searcher port=" << http.start(c.host, c.ports.searcher) << std::endl;
    wait_for(stop);
    return;
  }
  if (role == "ranker") {
    Ranker ranker(c.ranker);
    ranker.install_indexes(load_indexes(c));
    HttpService http("ranker");
    mount_ranker(http, ranker);
    out << "serve: role=ranker port=" << http.start(c.host, c.ports.ranker) << std::endl;
    wait_for(stop);
    return;
  }
  if (role == "planer") {
    Planer planer(http_recommender_client(c.endpoint(c.ports.recommender)),
                  http_searcher_client(c.endpoint(c.ports.searcher)),
                  http_ranker_client(c.endpoint(c.ports.ranker)));
    planer.install_indexes(load_indexes(c));
    HttpService http("planer");
    mount_planer(http, planer);
    out << "serve: role=planer port=" << http.start(c.host, c.ports.planer) << std::endl;
    wait_for(stop);
    return;
  }
  if (role == "trainer") {
    require_file(in_out(c, files::kCatalog), "datagen");
    require_file(in_out(c, files::kTiers), "datagen");
    const auto catalog = read_catalog(in_out(c, files::kCatalog));
    const auto tiers = read_tiers(in_out(c, files::kTiers));
    const auto indexed = build_and_publish_indexes(
        catalog, tiers,
        {http_index_target(c.endpoint(c.ports.searcher)), http_index_target(c.endpoint(c.ports.ranker)),
         http_index_target(c.endpoint(c.ports.planer))});
    out << "serve: role=trainer indexes_published=" << indexed.targets << " checksum=" << indexed.checksum
        << std::endl;

    const Endpoint rec = c.endpoint(c.ports.recommender);
    const ModelVersions current = http_stats(rec).at("model_version").get<ModelVersions>();
    const fs::path logs_path = in_out(c, files::kLogs);
    TrainerOptions options;
    options.jobs_log = in_out(c, files::kJobsLog);
    TrainingScheduler scheduler(
        c.trainer.schedule, [logs_path] { return read_logs(logs_path); },
        [rec](std::span<const std::uint8_t> bytes) { return http_reload(rec, bytes); }, options);
    scheduler.add(classifier_job(c.classifier, c.trainer.streaming_epochs), current.classifier);
    scheduler.add(preference_job(read_users(in_out(c, files::kUsers)), c.preference, c.trainer.streaming_epochs),
                  current.preference);
    scheduler.start();
    wait_for(stop, c.trainer.run_seconds);
    scheduler.stop();
    for (const auto& job : scheduler.history()) out << format_job_line(job) << "\n";
  }
}

BenchReport cmd_bench(const RunConfig& c, std::ostream& out) {
  c.validate();
  std::vector<RequestSample> samples;
  if (c.bench.self_host) {
    const bool have_data = fs::exists(in_out(c, files::kCatalog)) && fs::exists(in_out(c, files::kUsers)) &&
                           fs::exists(in_out(c, files::kLogs)) && fs::exists(in_out(c, files::kTiers));
    if (!have_data) cmd_datagen(c, out);
    if (!have_data || !fs::exists(in_out(c, files::kIndexes))) cmd_index(c, out);
    if (!have_data || !fs::exists(in_out(c, files::kClassifier)) || !fs::exists(in_out(c, files::kPreference)))
      cmd_train(c, out);
  }
  require_file(in_out(c, files::kLogs), "datagen");
  const auto queries = read_logs(in_out(c, files::kLogs));

  LoadResult result;
  if (c.bench.self_host) {
    ServingState state = load_serving_state(c);
    ServiceStack stack(std::move(state.models), state.users, state.indexes, c.stack_options(c.bench.http));
    auto client = stack.client();
    std::function<bool()> healthy;
    if (stack.http()) {
      const auto ports = stack.ports();
      healthy = [&stack, ports] {
        for (int port : {ports.planer, ports.recommender, ports.searcher, ports.ranker})
          if (!http_health(stack.endpoint(port))) return false;
        return true;
      };
    }
    out << "bench: self-hosted " << (stack.http() ? "http" : "in-process") << " services, "
        << c.load.virtual_users << " users, " << c.load.total_requests << " requests" << std::endl;
    result = run_load(c.load, *client, queries, healthy);
  } else {
    auto client = http_planer_client(c.endpoint(c.ports.planer));
    auto healthy = [&c] {
      for (int port : {c.ports.planer, c.ports.recommender, c.ports.searcher, c.ports.ranker})
        if (!http_health(c.endpoint(port))) return false;
      return true;
    };
    out << "bench: remote services at " << c.endpoint(c.ports.planer).url() << std::endl;
    result = run_load(c.load, *client, queries, healthy);
  }

  fs::create_directories(c.out_dir);
  write_samples_csv(in_out(c, files::kSamples), result.samples);
  const BenchReport report = build_report(result.samples);
  write_reports(report, c.out_dir);
  out << report.to_text();
  out << "bench: wall_s=" << result.wall_seconds << " max_in_flight=" << result.max_in_flight
      << " samples=" << (c.out_dir / files::kSamples).string() << "\n";
  return report;
}

BenchReport cmd_report(const fs::path& samples_path, const fs::path& out_dir, std::ostream& out) {
  if (!fs::exists(samples_path)) throw IoError("cannot open " + samples_path.string());
  if (fs::file_size(samples_path) == 0)
    throw Error("empty_input", "samples file " + samples_path.string() + " is empty");
  const auto samples = read_samples_csv(samples_path);
  if (samples.empty()) throw Error("empty_input", "samples file " + samples_path.string() + " has no samples");
  const BenchReport report = build_report(samples);
  const fs::path dir = out_dir.empty() ? samples_path.parent_path() : out_dir;
  if (!dir.empty()) fs::create_directories(dir);
  write_reports(report, dir.empty() ? fs::path(".") : dir);
  out << report.to_text();
  return report;
}

MicroBenchResult cmd_micro(const std::string& kernel, const std::string& shape, std::size_t repetitions,
                           std::ostream& out) {
  MicroBenchOptions options;
  options.repetitions = repetitions;
  const MicroBenchResult r = micro_bench(parse_micro_kernel(kernel), parse_micro_shape(shape), options);
  json line{{"kernel", micro_kernel_name(r.kernel)},
            {"m", r.shape.m},
            {"k", r.shape.k},
            {"n", r.shape.n},
            {"repetitions", r.repetitions},
            {"min_us", r.min_us},
            {"mean_us", r.mean_us},
            {"p99_us", r.p99_us},
            {"checksum", r.checksum}};
  out << line.dump() << "\n";
  return r;
}

namespace {

std::string quoted(std::string s) {
  for (char& ch : s)
    if (ch == '"' || ch == '\n') ch = '\'';
  return "\"" + s + "\"";
}

void print_error(std::ostream& err, const std::string& code, const std::string& message,
                 const std::string& field = "") {
  err << "error code=" << code;
  if (!field.empty()) err << " field=" << field;
  err << " message=" << quoted(message) << std::endl;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err, const std::atomic<bool>& stop) {
  CLI::App app{"esbench: end-to-end search service benchmark"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, role = "all";
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "YAML run configuration");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed for every generator");

  app.add_subcommand("datagen", "generate catalog, users, query logs and tiers");
  app.add_subcommand("index", "build the index snapshot");
  app.add_subcommand("train", "train the classifier and preference model");
  auto* serve = app.add_subcommand("serve", "run services until interrupted");
  serve->add_option("--role", role, "all|planer|recommender|searcher|ranker|trainer");
  app.add_subcommand("bench", "run the load generator and write the report");
  auto* report = app.add_subcommand("report", "aggregate a samples.csv file");
  std::string samples_path;
  report->add_option("samples", samples_path, "samples.csv path")->required();
  auto* micro = app.add_subcommand("micro", "time one kernel");
  std::string kernel, shape;
  std::size_t reps = 1000;
  micro->add_option("kernel", kernel, "dense|relu|sigmoid|softmax|elementwise_multiply")->required();
  micro->add_option("shape", shape, "MxKxN or MxN")->required();
  micro->add_option("reps", reps, "repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "micro") {
      cmd_micro(kernel, shape, reps, out);
      return 0;
    }
    if (cmd == "report") {
      cmd_report(samples_path, out_dir, out);
      return 0;
    }

    RunConfig config = *config_opt ? load_config(config_path) : RunConfig{};
    if (*seed_opt) config.apply_seed(seed);
    if (*out_opt) config.out_dir = out_dir;
    config.validate();

    if (cmd == "datagen") cmd_datagen(config, out);
    else if (cmd == "index") cmd_index(config, out);
    else if (cmd == "train") cmd_train(config, out);
    else if (cmd == "serve") cmd_serve(config, role, out, stop);
    else if (cmd == "bench") cmd_bench(config, out);
    return 0;
  } catch (const ConfigError& e) {
    print_error(err, e.code(), e.what(), e.field());
    return 2;
  } catch (const UsageError& e) {
    print_error(err, e.code(), e.what());
    return 2;
  } catch (const Error& e) {
    print_error(err, e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return 1;
  }
}

}  // namespace esb
