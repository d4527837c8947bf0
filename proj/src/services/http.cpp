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

#include "esb/services/http.hpp"

#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>

#include "esb/services/clients.hpp"
#include "esb/services/planer.hpp"
#include "esb/services/ranker.hpp"
#include "esb/services/recommender.hpp"
#include "esb/services/searcher.hpp"

namespace esb {

using nlohmann::json;

// ---------------------------------------------------------------- server

struct HttpService::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpService::HttpService(std::string name, std::size_t threads)
    : name_(std::move(name)), impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  s.set_keep_alive_max_count(1u << 20);
  s.set_keep_alive_timeout(5);
  s.set_tcp_nodelay(true);
}

HttpService::~HttpService() { stop(); }

void HttpService::post(const std::string& path, Handler handler) {
  impl_->server.Post(path, [h = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    HttpReply reply = h(req.body);
    res.status = reply.status;
    res.set_content(std::move(reply.body), reply.content_type);
  });
}

void HttpService::get(const std::string& path, Handler handler) {
  impl_->server.Get(path, [h = std::move(handler)](const httplib::Request&, httplib::Response& res) {
    HttpReply reply = h("");
    res.status = reply.status;
    res.set_content(std::move(reply.body), reply.content_type);
  });
}

int HttpService::start(const std::string& host, int port) {
  auto& s = impl_->server;
  // httplib defaults to SO_REUSEPORT, which lets a second server share the
  // port silently. Plain SO_REUSEADDR still allows fast restarts.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  const bool bound = port == 0 ? (port = s.bind_to_any_port(host)) > 0 : s.bind_to_port(host, port);
  if (!bound)
    throw Error("port_in_use", name_ + ": cannot bind " + host + ":" + std::to_string(port));
  port_ = port;
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port_;
}

void HttpService::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

int http_status_for(const std::string& code) {
  if (code == "not_found") return 404;
  if (code == "stale") return 409;
  if (code == "corrupt") return 422;
  if (code == "bad_request" || code == "config" || code == "precondition" || code == "shape" ||
      code == "usage")
    return 400;
  if (code == "unavailable") return 502;
  if (code == "timeout") return 504;
  return 500;
}

namespace {

HttpReply json_reply(const json& body, int status = 200) { return {status, body.dump(), "application/json"}; }

HttpReply error_reply(const std::string& code, const std::string& stage, const std::string& message) {
  return json_reply(error_body(code, stage, message), http_status_for(code));
}

template <typename F>
HttpReply guarded(const std::string& service, F&& body) {
  try {
    return body();
  } catch (const StageFailure& e) {
    return error_reply(e.code(), e.stage(), e.what());
  } catch (const Error& e) {
    return error_reply(e.code(), service, e.what());
  } catch (const json::exception& e) {
    return error_reply("bad_request", service, e.what());
  } catch (const std::exception& e) {
    return error_reply("internal", service, e.what());
  }
}

std::span<const std::uint8_t> as_bytes(const std::string& body) {
  return {reinterpret_cast<const std::uint8_t*>(body.data()), body.size()};
}

void mount_common(HttpService& http, std::function<json()> stats) {
  const std::string name = http.name();
  http.get("/health", [name](const std::string&) {
    return json_reply({{"status", "ok"}, {"service", name}});
  });
  http.get("/stats", [name, stats = std::move(stats)](const std::string&) {
    return guarded(name, [&] { return json_reply(stats()); });
  });
}

void mount_indexes(HttpService& http, IndexHolder& holder, const std::string& service) {
  http.post("/indexes", [&holder, service](const std::string& body) {
    return guarded(service, [&] {
      auto indexes = std::make_shared<const IndexSet>(IndexSet::deserialize(as_bytes(body)));
      holder.install_indexes(indexes);
      return json_reply({{"checksum", holder.index_checksum()}});
    });
  });
}

}  // namespace

void mount_recommender(HttpService& http, Recommender& recommender) {
  http.post("/recommend", [&recommender](const std::string& body) {
    return guarded("recommender", [&] {
      const json in = json::parse(body);
      const RecommendResponse out =
          recommender.handle(in.at("user_id").get<UserId>(), in.at("query_text").get<std::string>());
      return json_reply(out);
    });
  });
  http.post("/reload", [&recommender](const std::string& body) {
    return guarded("recommender.reload", [&] { return json_reply(recommender.reload(as_bytes(body))); });
  });
  mount_common(http, [&recommender] { return recommender.stats(); });
}

void mount_searcher(HttpService& http, Searcher& searcher) {
  http.post("/query", [&searcher](const std::string& body) {
    return guarded("searcher", [&] {
      const json in = json::parse(body);
      const auto probs = in.value("category_probs", std::vector<double>{});
      const QueryResponse out = searcher.handle(in.at("tokens").get<std::vector<std::string>>(), probs,
                                                in.value("limit", kDefaultSearchLimit));
      return json_reply(out);
    });
  });
  mount_indexes(http, searcher, "searcher");
  mount_common(http, [&searcher] { return searcher.stats(); });
}

void mount_ranker(HttpService& http, Ranker& ranker) {
  http.post("/rank", [&ranker](const std::string& body) {
    return guarded("ranker", [&] {
      const json in = json::parse(body);
      const auto ids = in.at("product_ids").get<std::vector<ProductId>>();
      const auto weights = in.at("preference_weights").get<std::vector<double>>();
      return json_reply(ranker.handle(ids, weights));
    });
  });
  mount_indexes(http, ranker, "ranker");
  mount_common(http, [&ranker] { return ranker.stats(); });
}

void mount_planer(HttpService& http, Planer& planer) {
  http.post("/search", [&planer](const std::string& body) {
    return guarded("planer", [&] { return json_reply(planer.handle(json::parse(body).get<SearchRequest>())); });
  });
  mount_indexes(http, planer, "product_db");
  mount_common(http, [&planer] { return planer.stats(); });
}

// ---------------------------------------------------------------- clients

namespace {

/// Keep-alive connections to one endpoint, one per concurrent caller.
class Caller {
 public:
  Caller(Endpoint endpoint, std::string service)
      : endpoint_(std::move(endpoint)), service_(std::move(service)) {}

  std::string post(const std::string& path, const std::string& body,
                   const char* content_type = "application/json") {
    return exchange([&](httplib::Client& c) { return c.Post(path, body, content_type); });
  }

  std::string get(const std::string& path) {
    return exchange([&](httplib::Client& c) { return c.Get(path); });
  }

 private:
  template <typename F>
  std::string exchange(F&& send) {
    std::unique_ptr<httplib::Client> client = acquire();
    httplib::Result result = send(*client);
    if (!result) {
      const auto err = result.error();
      throw StageFailure(service_ + ".transport", err == httplib::Error::Read ? "timeout" : "unavailable",
                         endpoint_.url() + ": " + httplib::to_string(err));
    }
    const int status = result->status;
    std::string body = std::move(result->body);
    release(std::move(client));
    if (status != 200) raise_remote(status, body);
    return body;
  }

  [[noreturn]] void raise_remote(int status, const std::string& body) const {
    std::string code = "http_" + std::to_string(status), stage = service_, message = body;
    try {
      const json e = json::parse(body).at("error");
      code = e.value("code", code);
      stage = e.value("stage", stage);
      message = e.value("message", message);
    } catch (const json::exception&) {
    }
    throw StageFailure(stage, code, message);
  }

  std::unique_ptr<httplib::Client> acquire() {
    {
      std::lock_guard lock(mu_);
      if (!idle_.empty()) {
        auto c = std::move(idle_.back());
        idle_.pop_back();
        return c;
      }
    }
    auto c = std::make_unique<httplib::Client>(endpoint_.host, endpoint_.port);
    const auto ms = endpoint_.timeout.count();
    c->set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    c->set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    c->set_write_timeout(ms / 1000, (ms % 1000) * 1000);
    c->set_keep_alive(true);
    c->set_tcp_nodelay(true);
    return c;
  }

  void release(std::unique_ptr<httplib::Client> c) {
    std::lock_guard lock(mu_);
    idle_.push_back(std::move(c));
  }

  Endpoint endpoint_;
  std::string service_;
  std::mutex mu_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

class HttpRecommenderClient final : public RecommenderClient {
 public:
  explicit HttpRecommenderClient(const Endpoint& e) : caller_(e, "recommender") {}
  RecommendResponse recommend(UserId user_id, const std::string& query_text) override {
    const json in{{"user_id", user_id}, {"query_text", query_text}};
    return json::parse(caller_.post("/recommend", in.dump())).get<RecommendResponse>();
  }

 private:
  Caller caller_;
};

class HttpSearcherClient final : public SearcherClient {
 public:
  explicit HttpSearcherClient(const Endpoint& e) : caller_(e, "searcher") {}
  QueryResponse query(const std::vector<std::string>& tokens, std::span<const double> category_probs,
                      std::size_t limit) override {
    const json in{{"tokens", tokens},
                  {"category_probs", std::vector<double>(category_probs.begin(), category_probs.end())},
                  {"limit", limit}};
    return json::parse(caller_.post("/query", in.dump())).get<QueryResponse>();
  }

 private:
  Caller caller_;
};

class HttpRankerClient final : public RankerClient {
 public:
  explicit HttpRankerClient(const Endpoint& e) : caller_(e, "ranker") {}
  RankResponse rank(std::span<const ProductId> product_ids,
                    std::span<const double> preference_weights) override {
    const json in{
        {"product_ids", std::vector<ProductId>(product_ids.begin(), product_ids.end())},
        {"preference_weights", std::vector<double>(preference_weights.begin(), preference_weights.end())}};
    return json::parse(caller_.post("/rank", in.dump())).get<RankResponse>();
  }

 private:
  Caller caller_;
};

class HttpPlanerClient final : public PlanerClient {
 public:
  explicit HttpPlanerClient(const Endpoint& e) : caller_(e, "planer") {}
  SearchResponse search(const SearchRequest& request) override {
    return json::parse(caller_.post("/search", json(request).dump())).get<SearchResponse>();
  }

 private:
  Caller caller_;
};

std::string to_body(std::span<const std::uint8_t> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

std::unique_ptr<RecommenderClient> http_recommender_client(const Endpoint& endpoint) {
  return std::make_unique<HttpRecommenderClient>(endpoint);
}
std::unique_ptr<SearcherClient> http_searcher_client(const Endpoint& endpoint) {
  return std::make_unique<HttpSearcherClient>(endpoint);
}
std::unique_ptr<RankerClient> http_ranker_client(const Endpoint& endpoint) {
  return std::make_unique<HttpRankerClient>(endpoint);
}
std::unique_ptr<PlanerClient> http_planer_client(const Endpoint& endpoint) {
  return std::make_unique<HttpPlanerClient>(endpoint);
}

ReloadAck http_reload(const Endpoint& endpoint, std::span<const std::uint8_t> artifact) {
  Caller caller(endpoint, "recommender");
  try {
    return json::parse(caller.post("/reload", to_body(artifact), "application/octet-stream"))
        .get<ReloadAck>();
  } catch (const StageFailure& e) {
    if (e.code() == "stale") throw StaleModelError(e.what());
    if (e.code() == "corrupt") throw CorruptionError(e.what());
    throw;
  }
}

std::uint64_t http_install_indexes(const Endpoint& endpoint, std::span<const std::uint8_t> snapshot) {
  Caller caller(endpoint, "indexes");
  return json::parse(caller.post("/indexes", to_body(snapshot), "application/octet-stream"))
      .at("checksum")
      .get<std::uint64_t>();
}

bool http_health(const Endpoint& endpoint) {
  try {
    Caller caller(endpoint, "health");
    return json::parse(caller.get("/health")).value("status", "") == "ok";
  } catch (const std::exception&) {
    return false;
  }
}

json http_stats(const Endpoint& endpoint) {
  Caller caller(endpoint, "stats");
  return json::parse(caller.get("/stats"));
}

}  // namespace esb
