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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "esb/common.hpp"
#include "esb/datagen.hpp"
#include "esb/kernels.hpp"
#include "esb/random.hpp"

namespace esb {

/// Width of the hashed query vector fed to the preference network.
inline constexpr std::size_t kQueryVectorDim = 16;
inline constexpr std::size_t kPreferenceInputDim = kUserFeatureDim + kQueryVectorDim;

/// L2-normalized hashed token counts (FNV-1a 64 bucketed into 16 slots).
std::vector<float> encode_query(const std::vector<std::string>& tokens);

template <typename T>
struct PreferenceGradient {
  T loss = 0;
  std::vector<std::vector<T>> weights;  // per layer, in × out
  std::vector<std::vector<T>> biases;
};

/// Feed-forward net: dense + relu on every hidden layer, dense + sigmoid on
/// the output. Loss is the mean squared error over the outputs.
template <typename T>
class BasicPreferenceNet {
 public:
  BasicPreferenceNet() = default;
  explicit BasicPreferenceNet(std::vector<std::uint32_t> layer_sizes)
      : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ShapeError("preference net needs at least two layer sizes");
    for (auto s : sizes_)
      if (s == 0) throw ShapeError("layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weights_.emplace_back(static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1], T(0));
      biases_.emplace_back(sizes_[l + 1], T(0));
    }
  }

  /// He-uniform weights for relu layers, Glorot-uniform for the output layer,
  /// zero biases.
  static BasicPreferenceNet initialized(std::vector<std::uint32_t> layer_sizes,
                                        std::uint64_t seed) {
    BasicPreferenceNet net(std::move(layer_sizes));
    Rng rng(seed);
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
      const double fan_in = net.sizes_[l];
      const double fan_out = net.sizes_[l + 1];
      const bool output = l + 1 == net.weights_.size();
      const double bound = output ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
      for (T& w : net.weights_[l]) w = static_cast<T>(rng.uniform(-bound, bound));
    }
    return net;
  }

  const std::vector<std::uint32_t>& layer_sizes() const { return sizes_; }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::vector<T>& weights(std::size_t layer) { return weights_[layer]; }
  const std::vector<T>& weights(std::size_t layer) const { return weights_[layer]; }
  std::vector<T>& biases(std::size_t layer) { return biases_[layer]; }
  const std::vector<T>& biases(std::size_t layer) const { return biases_[layer]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
  }

  /// Output activations, clamped into the open interval (0, 1).
  std::vector<T> forward(std::span<const T> input) const {
    auto acts = forward_all(input);
    auto out = std::move(acts.back());
    for (T& v : out)
      v = std::clamp(v, std::numeric_limits<T>::min(), std::nextafter(T(1), T(0)));
    return out;
  }

  /// Mean squared error and its gradient for one example.
  PreferenceGradient<T> gradient(std::span<const T> input, std::span<const T> target) const {
    if (target.size() != output_size()) throw ShapeError("target length mismatch");
    const auto acts = forward_all(input);
    const std::vector<T>& y = acts.back();
    const T inv_n = T(1) / static_cast<T>(y.size());

    PreferenceGradient<T> g;
    g.weights.resize(weights_.size());
    g.biases.resize(biases_.size());

    std::vector<T> delta(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
      const T diff = y[j] - target[j];
      g.loss += diff * diff * inv_n;
      delta[j] = T(2) * diff * inv_n * y[j] * (T(1) - y[j]);
    }

    for (std::size_t l = weights_.size(); l-- > 0;) {
      const std::vector<T>& a = acts[l];
      const std::size_t in = sizes_[l];
      const std::size_t out = sizes_[l + 1];
      g.biases[l] = delta;
      g.weights[l].assign(in * out, T(0));
      for (std::size_t i = 0; i < in; ++i)
        for (std::size_t j = 0; j < out; ++j) g.weights[l][i * out + j] = a[i] * delta[j];
      if (l == 0) break;
      std::vector<T> prev(in, T(0));
      for (std::size_t i = 0; i < in; ++i) {
        if (a[i] <= T(0)) continue;  // relu derivative
        T acc = 0;
        for (std::size_t j = 0; j < out; ++j) acc += weights_[l][i * out + j] * delta[j];
        prev[i] = acc;
      }
      delta = std::move(prev);
    }
    return g;
  }

  void apply(const PreferenceGradient<T>& g, T learning_rate) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (std::size_t i = 0; i < weights_[l].size(); ++i)
        weights_[l][i] -= learning_rate * g.weights[l][i];
      for (std::size_t i = 0; i < biases_[l].size(); ++i)
        biases_[l][i] -= learning_rate * g.biases[l][i];
    }
  }

  template <typename U>
  BasicPreferenceNet<U> cast() const {
    BasicPreferenceNet<U> out(sizes_);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      std::copy(weights_[l].begin(), weights_[l].end(), out.weights(l).begin());
      std::copy(biases_[l].begin(), biases_[l].end(), out.biases(l).begin());
    }
    return out;
  }

  bool operator==(const BasicPreferenceNet&) const = default;

 private:
  /// Activations of every layer, input first.
  std::vector<std::vector<T>> forward_all(std::span<const T> input) const {
    if (input.size() != input_size())
      throw ShapeError("preference net expects input of length " + std::to_string(input_size()) +
                       ", got " + std::to_string(input.size()));
    std::vector<std::vector<T>> acts;
    acts.reserve(sizes_.size());
    acts.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      std::vector<T> next(sizes_[l + 1]);
      kernels::dense<T>(acts.back(), weights_[l], biases_[l], next, 1, sizes_[l], sizes_[l + 1]);
      if (l + 1 < weights_.size()) {
        kernels::relu<T>(next);
      } else {
        kernels::sigmoid<T>(next);
      }
      acts.push_back(std::move(next));
    }
    return acts;
  }

  std::vector<std::uint32_t> sizes_;
  std::vector<std::vector<T>> weights_;
  std::vector<std::vector<T>> biases_;
};

using PreferenceNet = BasicPreferenceNet<float>;

/// Input vector for one request: user features followed by the query vector.
std::vector<float> preference_input(std::span<const float> user_features,
                                    std::span<const float> query_vector);

/// predict_weights: checks the input dimensions and runs the forward pass.
std::vector<float> predict_weights(const PreferenceNet& net, std::span<const float> user_vector,
                                   std::span<const float> query_vector);

struct PreferenceHyperparams {
  std::vector<std::uint32_t> hidden = {512, 512};
  int epochs = 3;
  double learning_rate = 0.05;
  std::uint64_t seed = 3;
};

/// SGD on squared error against each logged user's latent preference.
/// One example per log entry; with epochs == 0 the initialization is
/// returned.
PreferenceNet train_preference(const std::vector<UserRecord>& users,
                               const std::vector<QueryLogEntry>& logs,
                               const PreferenceHyperparams& params,
                               TrainingStats* stats = nullptr);

void continue_training(PreferenceNet& net, const std::vector<UserRecord>& users,
                       const std::vector<QueryLogEntry>& logs, int epochs, double learning_rate,
                       std::uint64_t seed, TrainingStats* stats = nullptr);

/// Mean squared error over (user, query) examples built from the logs.
double preference_mse(const PreferenceNet& net, const std::vector<UserRecord>& users,
                      const std::vector<QueryLogEntry>& logs);

}  // namespace esb
