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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <atomic>
#include <sstream>
#include <string>
#include <vector>

#include "esb/cli/commands.hpp"
#include "esb/cli/config.hpp"
#include "esb/datagen.hpp"
#include "esb/loadgen.hpp"
#include "esb/metrics.hpp"
#include "esb/micro_bench.hpp"

namespace py = pybind11;

namespace {

py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> owned{"esbench"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  std::ostringstream out, err;
  const std::atomic<bool> stop{true};
  int code = 0;
  {
    py::gil_scoped_release release;
    code = esb::run_cli(static_cast<int>(argv.size()), argv.data(), out, err, stop);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "esbench core bindings";
  m.attr("__version__") = "0.1.0";

  static py::exception<esb::Error> error(m, "EsbError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const esb::Error& e) {
      py::set_error(error, (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def("stage_names", [] { return esb::stage_names(); }, "Stage names in serving order.");

  m.def(
      "percentile",
      [](std::vector<std::int64_t> values, double p) {
        return esb::percentile(esb::LatencyDistribution(std::move(values)), p);
      },
      py::arg("values"), py::arg("p"), "Nearest-rank percentile of integer latencies.");

  m.def(
      "build_report",
      [](const std::string& samples_csv) {
        const auto samples = esb::read_samples_csv(samples_csv);
        return to_python(esb::build_report(samples).to_json());
      },
      py::arg("samples_csv"), "Aggregates a samples.csv file into the report.json structure.");

  m.def("exponential_think_time", &esb::exponential_think_time, py::arg("mean"), py::arg("u"));

  m.def(
      "tier_sizes",
      [](std::int64_t product_count, std::uint64_t seed) {
        esb::CatalogConfig c;
        c.product_count = product_count;
        c.attribute_field_count = 8;
        c.vocabulary_size = 100;
        c.category_count = 1;
        c.user_count = 1;
        c.seed = seed;
        const auto tiers = esb::assign_tiers(esb::generate_catalog(c));
        return py::make_tuple(tiers.high.size(), tiers.medium.size(), tiers.low.size());
      },
      py::arg("product_count"), py::arg("seed") = 42, "(high, medium, low) sizes for a generated catalog.");

  m.def(
      "micro_bench",
      [](const std::string& kernel, const std::string& shape, std::size_t repetitions) {
        esb::MicroBenchOptions options;
        options.repetitions = repetitions;
        esb::MicroBenchResult r;
        {
          py::gil_scoped_release release;
          r = esb::micro_bench(esb::parse_micro_kernel(kernel), esb::parse_micro_shape(shape), options);
        }
        py::dict d;
        d["kernel"] = esb::micro_kernel_name(r.kernel);
        d["shape"] = py::make_tuple(r.shape.m, r.shape.k, r.shape.n);
        d["repetitions"] = r.repetitions;
        d["min_us"] = r.min_us;
        d["mean_us"] = r.mean_us;
        d["p99_us"] = r.p99_us;
        d["checksum"] = r.checksum;
        return d;
      },
      py::arg("kernel"), py::arg("shape"), py::arg("repetitions") = 100);

  m.def("default_config", [] { return esb::dump_config(esb::RunConfig{}); },
        "The built-in desk profile as YAML.");

  m.def(
      "parse_config",
      [](const std::string& yaml_text) {
        const auto config = esb::parse_config(yaml_text);
        config.validate();
        return esb::dump_config(config);
      },
      py::arg("yaml_text"), "Validates a config document and returns it with defaults filled in.");

  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs one esbench subcommand in-process; returns (exit_code, stdout, stderr).");
}
