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

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "esb/hash.hpp"
#include "esb/preference_net.hpp"
#include "esb/text.hpp"
#include "esb/text_classifier.hpp"

namespace esb {

namespace {

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::uint32_t category_count_of(const std::vector<QueryLogEntry>& logs) {
  CategoryId max_label = 0;
  for (const auto& e : logs) max_label = std::max(max_label, e.clicked_category_id);
  return static_cast<std::uint32_t>(max_label) + 1;
}

}  // namespace

std::vector<std::uint32_t> featurize(std::string_view query_text, std::uint32_t buckets,
                                     int ngram_order) {
  const auto tokens = tokenize(query_text);
  std::vector<std::uint32_t> features;
  features.reserve(tokens.size() * 2);
  for (const auto& t : tokens) features.push_back(static_cast<std::uint32_t>(fnv1a64(t) % buckets));
  if (ngram_order >= 2) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      const std::uint64_t h = fnv1a64(tokens[i + 1], fnv1a64(" ", fnv1a64(tokens[i])));
      features.push_back(static_cast<std::uint32_t>(h % buckets));
    }
  }
  return features;
}

// ---- classifier training ---------------------------------------------------

void continue_training(TextClassifier& model, const std::vector<QueryLogEntry>& logs, int epochs,
                       double learning_rate, std::uint64_t seed, TrainingStats* stats) {
  if (logs.empty()) throw TrainingError("classifier training needs at least one log entry");
  const auto& shape = model.shape();
  std::vector<std::vector<std::uint32_t>> features;
  features.reserve(logs.size());
  for (const auto& e : logs) {
    if (static_cast<std::uint32_t>(e.clicked_category_id) >= shape.categories)
      throw TrainingError("label " + std::to_string(e.clicked_category_id) +
                          " exceeds the model's category count");
    features.push_back(featurize(e.joined_query(), shape.buckets, static_cast<int>(shape.ngram_order)));
  }

  Rng rng(seed);
  const auto lr = static_cast<float>(learning_rate);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t i : shuffled_order(logs.size(), rng)) {
      const auto g = model.gradient(features[i], static_cast<std::uint32_t>(logs[i].clicked_category_id));
      total += g.loss;
      model.apply(g, lr);
    }
    if (stats) stats->epoch_loss.push_back(total / static_cast<double>(logs.size()));
  }
}

TextClassifier train_classifier(const std::vector<QueryLogEntry>& logs,
                                const ClassifierHyperparams& params, TrainingStats* stats) {
  if (logs.empty()) throw TrainingError("classifier training needs at least one log entry");
  ClassifierShape shape = params.shape;
  shape.categories = std::max(shape.categories, category_count_of(logs));
  auto model = TextClassifier::initialized(shape, params.seed);
  continue_training(model, logs, params.epochs, params.learning_rate, mix_seed(params.seed, 1),
                    stats);
  return model;
}

double classifier_accuracy(const TextClassifier& model, const std::vector<QueryLogEntry>& logs) {
  if (logs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : logs) {
    const auto p = model.classify(e.joined_query());
    const auto best = std::max_element(p.begin(), p.end()) - p.begin();
    if (best == e.clicked_category_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logs.size());
}

// ---- preference network ----------------------------------------------------

std::vector<float> encode_query(const std::vector<std::string>& tokens) {
  std::vector<float> v(kQueryVectorDim, 0.0f);
  for (const auto& t : tokens) v[fnv1a64(t) % kQueryVectorDim] += 1.0f;
  float norm = 0.0f;
  for (float x : v) norm += x * x;
  if (norm > 0.0f) {
    norm = std::sqrt(norm);
    for (float& x : v) x /= norm;
  }
  return v;
}

std::vector<float> preference_input(std::span<const float> user_features,
                                    std::span<const float> query_vector) {
  std::vector<float> input;
  input.reserve(user_features.size() + query_vector.size());
  input.insert(input.end(), user_features.begin(), user_features.end());
  input.insert(input.end(), query_vector.begin(), query_vector.end());
  return input;
}

std::vector<float> predict_weights(const PreferenceNet& net, std::span<const float> user_vector,
                                   std::span<const float> query_vector) {
  if (user_vector.size() + query_vector.size() != net.input_size())
    throw ShapeError("user vector (" + std::to_string(user_vector.size()) + ") + query vector (" +
                     std::to_string(query_vector.size()) + ") does not match input layer of " +
                     std::to_string(net.input_size()));
  return net.forward(preference_input(user_vector, query_vector));
}

namespace {

struct PreferenceExample {
  std::vector<float> input;
  std::vector<float> target;
};

std::vector<PreferenceExample> preference_examples(const std::vector<UserRecord>& users,
                                                   const std::vector<QueryLogEntry>& logs) {
  std::unordered_map<UserId, const UserRecord*> by_id;
  std::unordered_map<UserId, std::vector<float>> features;
  for (const auto& u : users) by_id.emplace(u.user_id, &u);
  std::vector<PreferenceExample> examples;
  examples.reserve(logs.size());
  for (const auto& e : logs) {
    auto it = by_id.find(e.user_id);
    if (it == by_id.end())
      throw TrainingError("log entry references unknown user " + std::to_string(e.user_id));
    auto fit = features.find(e.user_id);
    if (fit == features.end()) fit = features.emplace(e.user_id, it->second->feature_vector()).first;
    PreferenceExample ex;
    ex.input = preference_input(fit->second, encode_query(e.query_text));
    ex.target.assign(it->second->latent_preference.begin(), it->second->latent_preference.end());
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace

void continue_training(PreferenceNet& net, const std::vector<UserRecord>& users,
                       const std::vector<QueryLogEntry>& logs, int epochs, double learning_rate,
                       std::uint64_t seed, TrainingStats* stats) {
  if (users.empty() || logs.empty())
    throw TrainingError("preference training needs users and log entries");
  const auto examples = preference_examples(users, logs);
  for (const auto& ex : examples) {
    if (ex.input.size() != net.input_size() || ex.target.size() != net.output_size())
      throw TrainingError("example dimensions do not match the preference net");
  }
  Rng rng(seed);
  const auto lr = static_cast<float>(learning_rate);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t i : shuffled_order(examples.size(), rng)) {
      const auto g = net.gradient(examples[i].input, examples[i].target);
      total += g.loss;
      net.apply(g, lr);
    }
    if (stats) stats->epoch_loss.push_back(total / static_cast<double>(examples.size()));
  }
}

PreferenceNet train_preference(const std::vector<UserRecord>& users,
                               const std::vector<QueryLogEntry>& logs,
                               const PreferenceHyperparams& params, TrainingStats* stats) {
  if (users.empty() || logs.empty())
    throw TrainingError("preference training needs users and log entries");
  std::vector<std::uint32_t> sizes;
  sizes.push_back(static_cast<std::uint32_t>(kPreferenceInputDim));
  sizes.insert(sizes.end(), params.hidden.begin(), params.hidden.end());
  sizes.push_back(static_cast<std::uint32_t>(kRankFeatureDim));
  auto net = PreferenceNet::initialized(sizes, params.seed);
  continue_training(net, users, logs, params.epochs, params.learning_rate, mix_seed(params.seed, 1),
                    stats);
  return net;
}

double preference_mse(const PreferenceNet& net, const std::vector<UserRecord>& users,
                      const std::vector<QueryLogEntry>& logs) {
  const auto examples = preference_examples(users, logs);
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    const auto y = net.forward(ex.input);
    double se = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) se += (y[j] - ex.target[j]) * (y[j] - ex.target[j]);
    total += se / static_cast<double>(y.size());
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace esb
