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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "esb/index.hpp"
#include "esb/services/snapshot.hpp"
#include "esb/services/types.hpp"

namespace esb {

/// Anything that serves from an IndexSet and accepts a replacement.
class IndexHolder {
 public:
  virtual ~IndexHolder() = default;

  void install_indexes(std::shared_ptr<const IndexSet> indexes);
  std::shared_ptr<const IndexSet> indexes() const { return indexes_.load(); }
  std::uint64_t index_checksum() const { return checksum_.load(); }

 protected:
  /// Throws PreconditionError when nothing has been installed yet.
  std::shared_ptr<const IndexSet> require_indexes(const char* service) const;

 private:
  Snapshot<IndexSet> indexes_;
  std::atomic<std::uint64_t> checksum_{0};
};

/// Moves products of the most probable category ahead of the rest, keeping
/// relative order on both sides. No-op when `category_probs` is empty.
void prioritize_category(std::vector<ProductId>& ids, const IndexSet& indexes,
                         std::span<const double> category_probs);

class Searcher : public IndexHolder {
 public:
  QueryResponse handle(const std::vector<std::string>& tokens,
                       std::span<const double> category_probs, std::size_t limit) const;
  nlohmann::json stats() const;

 private:
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::array<std::atomic<std::uint64_t>, 3> probes_{};
};

}  // namespace esb
