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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "esb/common.hpp"
#include "esb/datagen.hpp"
#include "esb/kernels.hpp"
#include "esb/random.hpp"

namespace esb {

/// Hashes each token, and each adjacent token pair when ngram_order is 2,
/// into [0, buckets) with FNV-1a 64 over the lowercased text (a pair is
/// hashed as "left right"). Emission order: unigrams, then bigrams.
std::vector<std::uint32_t> featurize(std::string_view query_text, std::uint32_t buckets,
                                     int ngram_order);

struct ClassifierShape {
  std::uint32_t buckets = 1u << 18;
  std::uint32_t dim = 16;
  std::uint32_t categories = 20;
  std::uint32_t ngram_order = 2;

  bool operator==(const ClassifierShape&) const = default;
};

/// Gradient of the cross-entropy loss for one example. Embedding rows are
/// sparse: one entry per distinct bucket.
template <typename T>
struct ClassifierGradient {
  T loss = 0;
  std::vector<std::pair<std::uint32_t, std::vector<T>>> embedding_rows;
  std::vector<T> output;  // dim × categories
};

/// Bag-of-hashed-n-grams linear classifier: mean of embedding rows, then a
/// linear layer and softmax.
template <typename T>
class BasicTextClassifier {
 public:
  BasicTextClassifier() = default;
  explicit BasicTextClassifier(const ClassifierShape& shape)
      : shape_(shape),
        embeddings_(static_cast<std::size_t>(shape.buckets) * shape.dim),
        output_(static_cast<std::size_t>(shape.dim) * shape.categories) {
    if (shape.buckets == 0 || shape.dim == 0 || shape.categories == 0)
      throw ShapeError("classifier dimensions must be positive");
    if (shape.ngram_order != 1 && shape.ngram_order != 2)
      throw ShapeError("ngram_order must be 1 or 2");
  }

  /// Embeddings uniform in ±1/dim, output layer zero.
  static BasicTextClassifier initialized(const ClassifierShape& shape, std::uint64_t seed) {
    BasicTextClassifier model(shape);
    Rng rng(seed);
    const double bound = 1.0 / shape.dim;
    for (T& e : model.embeddings_) e = static_cast<T>(rng.uniform(-bound, bound));
    return model;
  }

  const ClassifierShape& shape() const { return shape_; }
  std::span<T> embeddings() { return embeddings_; }
  std::span<const T> embeddings() const { return embeddings_; }
  std::span<T> output_weights() { return output_; }
  std::span<const T> output_weights() const { return output_; }

  std::vector<T> hidden(std::span<const std::uint32_t> features) const {
    std::vector<T> h(shape_.dim, T(0));
    if (features.empty()) return h;
    for (std::uint32_t f : features) {
      const T* row = embeddings_.data() + static_cast<std::size_t>(f) * shape_.dim;
      for (std::uint32_t j = 0; j < shape_.dim; ++j) h[j] += row[j];
    }
    const T scale = T(1) / static_cast<T>(features.size());
    for (T& v : h) v *= scale;
    return h;
  }

  std::vector<T> probabilities(std::span<const std::uint32_t> features) const {
    const auto h = hidden(features);
    std::vector<T> logits(shape_.categories);
    kernels::dense<T>(h, output_, {}, logits, 1, shape_.dim, shape_.categories);
    kernels::softmax_rows<T>(logits, 1, shape_.categories);
    return logits;
  }

  std::vector<T> classify(std::string_view query_text) const {
    const auto features = featurize(query_text, shape_.buckets, static_cast<int>(shape_.ngram_order));
    return probabilities(features);
  }

  /// Cross-entropy loss and gradient for one (features, label) example.
  ClassifierGradient<T> gradient(std::span<const std::uint32_t> features,
                                 std::uint32_t label) const {
    if (label >= shape_.categories) throw ShapeError("label out of range");
    ClassifierGradient<T> g;
    const auto h = hidden(features);
    auto p = probabilities(features);
    g.loss = -std::log(std::max(p[label], std::numeric_limits<T>::min()));

    std::vector<T> dz = std::move(p);
    dz[label] -= T(1);
    g.output.assign(output_.size(), T(0));
    for (std::uint32_t i = 0; i < shape_.dim; ++i)
      for (std::uint32_t c = 0; c < shape_.categories; ++c)
        g.output[i * shape_.categories + c] = h[i] * dz[c];

    if (features.empty()) return g;
    std::vector<T> dh(shape_.dim, T(0));
    for (std::uint32_t i = 0; i < shape_.dim; ++i)
      for (std::uint32_t c = 0; c < shape_.categories; ++c)
        dh[i] += output_[i * shape_.categories + c] * dz[c];

    const T scale = T(1) / static_cast<T>(features.size());
    for (std::uint32_t f : features) {
      auto it = std::find_if(g.embedding_rows.begin(), g.embedding_rows.end(),
                             [f](const auto& row) { return row.first == f; });
      if (it == g.embedding_rows.end()) {
        g.embedding_rows.emplace_back(f, std::vector<T>(shape_.dim, T(0)));
        it = std::prev(g.embedding_rows.end());
      }
      for (std::uint32_t j = 0; j < shape_.dim; ++j) it->second[j] += dh[j] * scale;
    }
    return g;
  }

  void apply(const ClassifierGradient<T>& g, T learning_rate) {
    for (std::size_t i = 0; i < output_.size(); ++i) output_[i] -= learning_rate * g.output[i];
    for (const auto& [bucket, row] : g.embedding_rows) {
      T* dst = embeddings_.data() + static_cast<std::size_t>(bucket) * shape_.dim;
      for (std::uint32_t j = 0; j < shape_.dim; ++j) dst[j] -= learning_rate * row[j];
    }
  }

  template <typename U>
  BasicTextClassifier<U> cast() const {
    BasicTextClassifier<U> out(shape_);
    std::copy(embeddings_.begin(), embeddings_.end(), out.embeddings().begin());
    std::copy(output_.begin(), output_.end(), out.output_weights().begin());
    return out;
  }

  bool operator==(const BasicTextClassifier&) const = default;

 private:
  ClassifierShape shape_;
  std::vector<T> embeddings_;
  std::vector<T> output_;
};

using TextClassifier = BasicTextClassifier<float>;

struct ClassifierHyperparams {
  ClassifierShape shape;
  int epochs = 5;
  double learning_rate = 0.2;
  std::uint64_t seed = 1;
};

/// Plain SGD on softmax cross-entropy, labels = clicked category. Example
/// order is reshuffled each epoch from the seed. With epochs == 0 the
/// initialization is returned.
TextClassifier train_classifier(const std::vector<QueryLogEntry>& logs,
                                const ClassifierHyperparams& params,
                                TrainingStats* stats = nullptr);

/// Continues training an existing model (warm start).
void continue_training(TextClassifier& model, const std::vector<QueryLogEntry>& logs,
                       int epochs, double learning_rate, std::uint64_t seed,
                       TrainingStats* stats = nullptr);

/// Fraction of entries whose argmax prediction equals the clicked category.
double classifier_accuracy(const TextClassifier& model, const std::vector<QueryLogEntry>& logs);

}  // namespace esb
