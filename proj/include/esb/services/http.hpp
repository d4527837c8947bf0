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

#include <functional>
#include <memory>
#include <string>

namespace esb {

class Recommender;
class Searcher;
class Ranker;
class Planer;
class IndexHolder;

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// One listening HTTP/1.1 server. Several services may be mounted on one
/// instance; each role normally gets its own.
class HttpService {
 public:
  using Handler = std::function<HttpReply(const std::string& body)>;

  explicit HttpService(std::string name, std::size_t threads = 64);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  void post(const std::string& path, Handler handler);
  void get(const std::string& path, Handler handler);

  /// Binds and serves on a background thread; returns the bound port.
  /// Port 0 picks a free port. Throws Error("port_in_use") naming the port.
  int start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }
  const std::string& name() const { return name_; }

 private:
  struct Impl;
  std::string name_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// HTTP status for an error code carried by esb::Error.
int http_status_for(const std::string& code);

// Route tables. Every mount adds GET /health and GET /stats.
void mount_recommender(HttpService& http, Recommender& recommender);
void mount_searcher(HttpService& http, Searcher& searcher);
void mount_ranker(HttpService& http, Ranker& ranker);
void mount_planer(HttpService& http, Planer& planer);

}  // namespace esb
