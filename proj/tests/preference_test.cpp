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

#include "esb/preference_net.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "esb/datagen.hpp"
#include "esb/random.hpp"

namespace esb {
namespace {

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-7});
  return std::abs(a - b) / scale;
}

BasicPreferenceNet<double> random_net(std::vector<std::uint32_t> sizes, std::uint64_t seed) {
  auto net = BasicPreferenceNet<double>::initialized(std::move(sizes), seed);
  Rng rng(seed + 1);
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    for (double& b : net.biases(l)) b = rng.uniform(-0.5, 0.5);
  return net;
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1, double hi = 1) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

TEST(PreferenceGradient, EveryLayerMatchesCentralDifferences) {
  const std::vector<std::vector<std::uint32_t>> shapes{{5, 4, 3}, {6, 5, 4, 2}, {3, 8, 1}};
  for (const auto& shape : shapes) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto net = random_net(shape, seed);
      Rng rng(seed * 31);
      const auto x = random_vector(shape.front(), rng);
      const auto t = random_vector(shape.back(), rng, 0, 1);
      const auto g = net.gradient(x, t);
      const double eps = 1e-4;
      auto loss = [&] { return net.gradient(x, t).loss; };
      auto check = [&](std::vector<double>& params, const std::vector<double>& analytic,
                       const char* what, std::size_t layer) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          const double saved = params[i];
          params[i] = saved + eps;
          const double up = loss();
          params[i] = saved - eps;
          const double down = loss();
          params[i] = saved;
          EXPECT_LT(relative_error(analytic[i], (up - down) / (2 * eps)), 1e-4)
              << what << " layer " << layer << " index " << i << " seed " << seed;
        }
      };
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        check(net.weights(l), g.weights[l], "weight", l);
        check(net.biases(l), g.biases[l], "bias", l);
      }
    }
  }
}

TEST(PredictWeights, ZeroNetGivesOneHalf) {
  const PreferenceNet net({kPreferenceInputDim, 8, kRankFeatureDim});
  const std::vector<float> user(kUserFeatureDim, 0.3f), query(kQueryVectorDim, 0.1f);
  for (float w : predict_weights(net, user, query)) EXPECT_EQ(w, 0.5f);
}

TEST(PredictWeights, BoundedOnRandomInputs) {
  const auto net = PreferenceNet::initialized({kPreferenceInputDim, 32, 32, kRankFeatureDim}, 4);
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<float> user(kUserFeatureDim), query(kQueryVectorDim);
    for (float& v : user) v = static_cast<float>(rng.uniform(-50, 50));
    for (float& v : query) v = static_cast<float>(rng.uniform(-50, 50));
    const auto w = predict_weights(net, user, query);
    ASSERT_EQ(w.size(), kRankFeatureDim);
    for (float v : w) {
      ASSERT_GT(v, 0.0f);
      ASSERT_LT(v, 1.0f);
    }
  }
}

TEST(PredictWeights, DimensionMismatchIsShapeError) {
  const auto net = PreferenceNet::initialized({kPreferenceInputDim, 4, kRankFeatureDim}, 1);
  const std::vector<float> user(kUserFeatureDim - 1), query(kQueryVectorDim);
  EXPECT_THROW(predict_weights(net, user, query), ShapeError);
}

TEST(Forward, MatchesStraightLoopOracle) {
  const auto net = random_net({7, 5, 4, 3}, 9);
  Rng rng(10);
  const auto x = random_vector(7, rng);
  std::vector<double> a = x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& sizes = net.layer_sizes();
    std::vector<double> z(sizes[l + 1]);
    for (std::size_t j = 0; j < z.size(); ++j) {
      double acc = net.biases(l)[j];
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * net.weights(l)[i * z.size() + j];
      const bool last = l + 1 == net.layer_count();
      z[j] = last ? 1.0 / (1.0 + std::exp(-acc)) : std::max(acc, 0.0);
    }
    a = std::move(z);
  }
  const auto got = net.cast<float>().forward(std::vector<float>(x.begin(), x.end()));
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(got[j], a[j], 1e-6);
}

TEST(EncodeQuery, NormalizedAndDeterministic) {
  const auto v = encode_query({"red", "shoe", "red"});
  ASSERT_EQ(v.size(), kQueryVectorDim);
  double norm = 0;
  for (float x : v) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-6);
  EXPECT_EQ(v, encode_query({"red", "shoe", "red"}));
  for (float x : encode_query({})) EXPECT_EQ(x, 0.0f);
}

struct Data {
  std::vector<UserRecord> users;
  std::vector<QueryLogEntry> logs;
};

Data training_data(std::int64_t users, std::int64_t logs) {
  CatalogConfig c;
  c.product_count = 500;
  c.attribute_field_count = 8;
  c.user_count = users;
  c.category_count = 5;
  c.vocabulary_size = 400;
  c.seed = 21;
  const auto catalog = generate_catalog(c);
  Data d{generate_users(c), {}};
  QueryLogConfig q;
  q.count = logs;
  q.seed = 22;
  d.logs = generate_query_logs(catalog, d.users, q);
  return d;
}

TEST(TrainPreference, ReachesTargetMseOnHundredUsers) {
  const auto d = training_data(100, 400);
  PreferenceHyperparams params;
  params.hidden = {32, 32};
  params.epochs = 200;
  TrainingStats stats;
  const auto net = train_preference(d.users, d.logs, params, &stats);
  EXPECT_LT(preference_mse(net, d.users, d.logs), 0.05);
  EXPECT_LT(stats.epoch_loss.back(), stats.epoch_loss.front());
}

TEST(TrainPreference, ZeroEpochsAndDeterminism) {
  const auto d = training_data(20, 100);
  PreferenceHyperparams params;
  params.hidden = {8};
  params.epochs = 0;
  EXPECT_EQ(train_preference(d.users, d.logs, params),
            PreferenceNet::initialized({kPreferenceInputDim, 8, kRankFeatureDim}, params.seed));
  params.epochs = 3;
  EXPECT_EQ(train_preference(d.users, d.logs, params), train_preference(d.users, d.logs, params));
}

TEST(TrainPreference, EmptyInputsAreRejected) {
  const auto d = training_data(5, 10);
  EXPECT_THROW(train_preference({}, d.logs, {}), TrainingError);
  EXPECT_THROW(train_preference(d.users, {}, {}), TrainingError);
}

TEST(Construction, RejectsBadShapes) {
  EXPECT_THROW(PreferenceNet({4}), ShapeError);
  EXPECT_THROW(PreferenceNet({4, 0, 2}), ShapeError);
}

}  // namespace
}  // namespace esb
