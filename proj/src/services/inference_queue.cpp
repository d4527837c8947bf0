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

#include "esb/services/inference_queue.hpp"

namespace esb {

void InferenceQueue::acquire() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return ticket == serving_ticket_ && busy_ < slots_; });
  ++serving_ticket_;
  ++busy_;
  // The next ticket holder may also fit if more than one slot is free.
  if (busy_ < slots_) cv_.notify_all();
}

void InferenceQueue::release() {
  {
    std::lock_guard lock(mu_);
    --busy_;
  }
  cv_.notify_all();
}

}  // namespace esb
