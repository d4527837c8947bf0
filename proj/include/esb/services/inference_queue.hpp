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

#include <condition_variable>
#include <cstdint>
#include <mutex>

namespace esb {

/// Admission gate in front of the preference model, standing in for a
/// model server with a fixed number of inference slots. A request that
/// finds a free slot runs on its own thread right away; otherwise it waits
/// in FIFO order. Waiting time is part of the `recommender.serving` stage.
/// Zero slots means unlimited concurrency.
class InferenceQueue {
 public:
  explicit InferenceQueue(std::size_t slots) : slots_(slots) {}

  InferenceQueue(const InferenceQueue&) = delete;
  InferenceQueue& operator=(const InferenceQueue&) = delete;

  template <typename F>
  auto run(F&& task) -> decltype(task()) {
    if (slots_ == 0) return task();
    acquire();
    struct Release {
      InferenceQueue* q;
      ~Release() { q->release(); }
    } release{this};
    return task();
  }

  std::size_t worker_count() const { return slots_; }

 private:
  void acquire();
  void release();

  const std::size_t slots_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t busy_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ticket_ = 0;
};

}  // namespace esb
