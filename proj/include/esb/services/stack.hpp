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

#include <memory>
#include <string>

#include "esb/services/clients.hpp"
#include "esb/services/http.hpp"
#include "esb/services/planer.hpp"
#include "esb/services/ranker.hpp"
#include "esb/services/recommender.hpp"
#include "esb/services/searcher.hpp"
#include "esb/trainer.hpp"

namespace esb {

struct ServicePorts {
  int planer = 0;
  int recommender = 0;
  int searcher = 0;
  int ranker = 0;
};

struct StackOptions {
  bool http = true;  // false: the planer calls the other services in-process
  std::string host = "127.0.0.1";
  ServicePorts ports;  // 0 picks a free port
  std::chrono::milliseconds timeout{2000};
  RecommenderOptions recommender;
  RankerOptions ranker;
};

struct ServingModels {
  TextClassifier classifier;
  std::uint64_t classifier_version = 1;
  PreferenceNet preference;
  std::uint64_t preference_version = 1;
};

/// All four online services in one process, either wired directly or each
/// behind its own HTTP listener. Handler code is the same in both modes.
class ServiceStack {
 public:
  ServiceStack(ServingModels models, std::shared_ptr<const UserStore> users,
               std::shared_ptr<const IndexSet> indexes, StackOptions options = {});
  ~ServiceStack();

  Recommender& recommender() { return *recommender_; }
  Searcher& searcher() { return *searcher_; }
  Ranker& ranker() { return *ranker_; }
  Planer& planer() { return *planer_; }

  bool http() const { return options_.http; }
  /// Bound endpoints; only meaningful in HTTP mode.
  const ServicePorts& ports() const { return ports_; }
  Endpoint endpoint(int port) const { return {options_.host, port, options_.timeout}; }

  /// A client for the planer over this stack's transport.
  std::unique_ptr<PlanerClient> client() const;
  /// Publishes through POST /reload in HTTP mode, directly otherwise.
  ModelPublisher publisher();
  /// Searcher, ranker and planer, over this stack's transport.
  std::vector<IndexTarget> index_targets();

  void stop();

 private:
  StackOptions options_;
  ServicePorts ports_;
  std::unique_ptr<Recommender> recommender_;
  std::unique_ptr<Searcher> searcher_;
  std::unique_ptr<Ranker> ranker_;
  std::unique_ptr<Planer> planer_;
  std::unique_ptr<HttpService> recommender_http_, searcher_http_, ranker_http_, planer_http_;
};

/// Index target that installs the shared set in-process.
IndexTarget local_index_target(IndexHolder& holder);
/// Index target that posts the snapshot to an HTTP service.
IndexTarget http_index_target(const Endpoint& endpoint);

}  // namespace esb
