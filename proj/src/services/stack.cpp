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

#include "esb/services/stack.hpp"

namespace esb {

IndexTarget local_index_target(IndexHolder& holder) {
  return [&holder](const std::shared_ptr<const IndexSet>& indexes, std::span<const std::uint8_t>) {
    holder.install_indexes(indexes);
  };
}

IndexTarget http_index_target(const Endpoint& endpoint) {
  return [endpoint](const std::shared_ptr<const IndexSet>&, std::span<const std::uint8_t> snapshot) {
    http_install_indexes(endpoint, snapshot);
  };
}

ServiceStack::ServiceStack(ServingModels models, std::shared_ptr<const UserStore> users,
                           std::shared_ptr<const IndexSet> indexes, StackOptions options)
    : options_(std::move(options)) {
  recommender_ = std::make_unique<Recommender>(std::move(users), std::move(models.classifier),
                                               models.classifier_version, std::move(models.preference),
                                               models.preference_version, options_.recommender);
  searcher_ = std::make_unique<Searcher>();
  ranker_ = std::make_unique<Ranker>(options_.ranker);
  if (indexes) {
    searcher_->install_indexes(indexes);
    ranker_->install_indexes(indexes);
  }

  if (!options_.http) {
    planer_ = std::make_unique<Planer>(local_client(*recommender_), local_client(*searcher_),
                                       local_client(*ranker_));
    if (indexes) planer_->install_indexes(indexes);
    return;
  }

  recommender_http_ = std::make_unique<HttpService>("recommender");
  searcher_http_ = std::make_unique<HttpService>("searcher");
  ranker_http_ = std::make_unique<HttpService>("ranker");
  planer_http_ = std::make_unique<HttpService>("planer");
  mount_recommender(*recommender_http_, *recommender_);
  mount_searcher(*searcher_http_, *searcher_);
  mount_ranker(*ranker_http_, *ranker_);
  ports_.recommender = recommender_http_->start(options_.host, options_.ports.recommender);
  ports_.searcher = searcher_http_->start(options_.host, options_.ports.searcher);
  ports_.ranker = ranker_http_->start(options_.host, options_.ports.ranker);

  planer_ = std::make_unique<Planer>(http_recommender_client(endpoint(ports_.recommender)),
                                     http_searcher_client(endpoint(ports_.searcher)),
                                     http_ranker_client(endpoint(ports_.ranker)));
  if (indexes) planer_->install_indexes(indexes);
  mount_planer(*planer_http_, *planer_);
  ports_.planer = planer_http_->start(options_.host, options_.ports.planer);
}

ServiceStack::~ServiceStack() { stop(); }

void ServiceStack::stop() {
  // Front to back, so no listener is torn down under an in-flight call.
  // Dropping the planer closes its keep-alive connections downstream,
  // which lets the other listeners drain immediately.
  if (planer_http_) {
    planer_http_->stop();
    planer_.reset();
  }
  for (auto* h : {&searcher_http_, &ranker_http_, &recommender_http_})
    if (*h) (*h)->stop();
}

std::unique_ptr<PlanerClient> ServiceStack::client() const {
  if (options_.http) return http_planer_client(endpoint(ports_.planer));
  return local_client(*planer_);
}

ModelPublisher ServiceStack::publisher() {
  if (options_.http) {
    const Endpoint e = endpoint(ports_.recommender);
    return [e](std::span<const std::uint8_t> bytes) { return http_reload(e, bytes); };
  }
  return [this](std::span<const std::uint8_t> bytes) { return recommender_->reload(bytes); };
}

std::vector<IndexTarget> ServiceStack::index_targets() {
  if (options_.http)
    return {http_index_target(endpoint(ports_.searcher)), http_index_target(endpoint(ports_.ranker)),
            http_index_target(endpoint(ports_.planer))};
  return {local_index_target(*searcher_), local_index_target(*ranker_), local_index_target(*planer_)};
}

}  // namespace esb
