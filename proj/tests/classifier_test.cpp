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

#include "esb/text_classifier.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "esb/datagen.hpp"
#include "esb/random.hpp"
#include "oracles.hpp"

namespace esb {
namespace {

using testing::separable_corpus;

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-7});
  return std::abs(a - b) / scale;
}

BasicTextClassifier<double> random_model(const ClassifierShape& shape, std::uint64_t seed) {
  auto model = BasicTextClassifier<double>::initialized(shape, seed);
  Rng rng(seed + 100);
  for (double& w : model.output_weights()) w = rng.uniform(-1.0, 1.0);
  for (double& e : model.embeddings()) e = rng.uniform(-1.0, 1.0);
  return model;
}

TEST(Featurize, EdgeCases) {
  EXPECT_TRUE(featurize("", 64, 2).empty());
  EXPECT_EQ(featurize("red shoe box", 64, 2), featurize("red shoe box", 64, 2));
  for (auto f : featurize("red shoe box", 1, 2)) EXPECT_EQ(f, 0u);
  EXPECT_EQ(featurize("red shoe box", 1 << 20, 1).size(), 3u);
  EXPECT_EQ(featurize("red shoe box", 1 << 20, 2).size(), 5u);
}

TEST(Classify, EmptyQueryIsUniform) {
  ClassifierShape shape{64, 4, 7, 2};
  const auto model = TextClassifier::initialized(shape, 1);
  for (float p : model.classify("")) EXPECT_NEAR(p, 1.0 / 7.0, 1e-6);
}

TEST(Classify, OutputsSumToOneOnRandomModels) {
  ClassifierShape shape{128, 6, 9, 2};
  const auto model = random_model(shape, 3).cast<float>();
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    std::string q;
    const int n = static_cast<int>(rng.below(6));
    for (int t = 0; t < n; ++t) q += "w" + std::to_string(rng.below(51)) + " ";
    const auto p = model.classify(q);
    double sum = 0;
    for (float v : p) {
      EXPECT_GE(v, 0.0f);
      sum += v;
    }
    ASSERT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(ClassifierGradient, MatchesCentralDifferences) {
  ClassifierShape shape{16, 4, 3, 2};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto model = random_model(shape, seed);
    const std::vector<std::uint32_t> features{1, 5, 5, 9, 14};
    const std::uint32_t label = static_cast<std::uint32_t>(seed % 3);
    const auto g = model.gradient(features, label);
    const double eps = 1e-4;
    auto loss = [&] { return model.gradient(features, label).loss; };

    for (std::size_t i = 0; i < model.output_weights().size(); ++i) {
      double& w = model.output_weights()[i];
      const double saved = w;
      w = saved + eps;
      const double up = loss();
      w = saved - eps;
      const double down = loss();
      w = saved;
      EXPECT_LT(relative_error(g.output[i], (up - down) / (2 * eps)), 1e-4) << "output " << i;
    }
    for (const auto& [bucket, row] : g.embedding_rows) {
      for (std::uint32_t j = 0; j < shape.dim; ++j) {
        double& e = model.embeddings()[bucket * shape.dim + j];
        const double saved = e;
        e = saved + eps;
        const double up = loss();
        e = saved - eps;
        const double down = loss();
        e = saved;
        EXPECT_LT(relative_error(row[j], (up - down) / (2 * eps)), 1e-4)
            << "bucket " << bucket << " dim " << j;
      }
    }
    // Buckets absent from the features get no gradient row.
    EXPECT_EQ(g.embedding_rows.size(), 4u);
  }
}

std::vector<QueryLogEntry> one_example() {
  QueryLogEntry e;
  e.user_id = 0;
  e.query_text = {"blue", "kettle"};
  e.clicked_category_id = 2;
  return {e};
}

TEST(TrainClassifier, OverfitsSingleExample) {
  ClassifierHyperparams params;
  params.shape = {256, 8, 4, 2};
  params.epochs = 100;
  params.learning_rate = 0.5;
  const auto model = train_classifier(one_example(), params);
  EXPECT_GT(model.classify("blue kettle")[2], 0.9f);
}

TEST(TrainClassifier, ZeroEpochsReturnsInitialization) {
  ClassifierHyperparams params;
  params.shape = {256, 8, 4, 2};
  params.epochs = 0;
  EXPECT_EQ(train_classifier(one_example(), params), TextClassifier::initialized(params.shape, params.seed));
}

TEST(TrainClassifier, EmptyLogsAreRejected) {
  EXPECT_THROW(train_classifier({}, ClassifierHyperparams{}), TrainingError);
}

TEST(TrainClassifier, SeparableCorpusQualityGate) {
  const auto corpus = separable_corpus();
  ClassifierHyperparams params;
  params.shape.categories = 10;
  TrainingStats stats;
  const auto start = std::chrono::steady_clock::now();
  const auto model = train_classifier(corpus.train, params, &stats);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(classifier_accuracy(model, corpus.held_out), 0.95);
  EXPECT_LT(seconds, 60.0);
  ASSERT_EQ(stats.epoch_loss.size(), static_cast<std::size_t>(params.epochs));
  EXPECT_LT(stats.epoch_loss.back(), stats.epoch_loss.front());
}

TEST(TrainClassifier, DeterministicForFixedSeed) {
  const auto corpus = separable_corpus();
  ClassifierHyperparams params;
  params.shape = {4096, 8, 10, 2};
  params.epochs = 2;
  std::vector<QueryLogEntry> slice(corpus.train.begin(), corpus.train.begin() + 2000);
  EXPECT_EQ(train_classifier(slice, params), train_classifier(slice, params));
}

}  // namespace
}  // namespace esb
