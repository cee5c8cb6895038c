// Copyright 2026 The FEDF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedf/model.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using fedf::DataShard;
using fedf::LossKind;
using fedf::ModelKind;
using fedf::ModelSpec;
using fedf::ParameterVector;
using fedf::TrainingConfig;

namespace {

ModelSpec linreg(std::size_t in, std::size_t out = 1) {
  ModelSpec s;
  s.kind = ModelKind::kLinearRegression;
  s.input_dim = in;
  s.output_dim = out;
  s.loss = LossKind::kMse;
  return s;
}

ModelSpec logreg(std::size_t in, std::size_t out, LossKind loss) {
  ModelSpec s;
  s.kind = ModelKind::kLogisticRegression;
  s.input_dim = in;
  s.output_dim = out;
  s.loss = loss;
  return s;
}

ModelSpec mlp(std::size_t in, std::size_t hidden, std::size_t out,
              LossKind loss) {
  ModelSpec s;
  s.kind = ModelKind::kMlp1h;
  s.input_dim = in;
  s.hidden_dim = hidden;
  s.output_dim = out;
  s.loss = loss;
  return s;
}

DataShard one_sample(std::vector<double> x, std::vector<double> y) {
  DataShard d;
  d.feature_dim = x.size();
  d.target_dim = y.size();
  d.features = std::move(x);
  d.targets = std::move(y);
  return d;
}

}  // namespace

TEST_CASE("parameter counts follow the layout arithmetic") {
  CHECK(fedf::param_count(linreg(3)) == 4);
  CHECK(fedf::param_count(linreg(1)) == 2);
  CHECK(fedf::param_count(mlp(2, 4, 1, LossKind::kMse)) == 17);
  CHECK(fedf::param_count(logreg(5, 3, LossKind::kCrossEntropy)) == 18);
}

TEST_CASE("init_parameters is deterministic and layout-tagged") {
  const auto a = fedf::init_parameters(linreg(1), 7);
  const auto b = fedf::init_parameters(linreg(1), 7);
  const auto c = fedf::init_parameters(linreg(1), 8);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.layout_id == "linreg:in=1,out=1,loss=mse");
  CHECK(a.size() == 2);
  // Uniform [-0.5, 0.5] / sqrt(fan_in) bound.
  const auto m = fedf::init_parameters(mlp(4, 8, 2, LossKind::kMse), 3);
  for (double v : m.values) CHECK(std::fabs(v) <= 0.5);
}

TEST_CASE("invalid specs are rejected") {
  ModelSpec bad = linreg(3);
  bad.loss = LossKind::kCrossEntropy;
  CHECK_THROWS_AS(fedf::validate_spec(bad), fedf::ValidationError);
  ModelSpec no_hidden = mlp(3, 0, 1, LossKind::kMse);
  CHECK_THROWS_AS(fedf::validate_spec(no_hidden), fedf::ValidationError);
}

TEST_CASE("mse loss on perfect and trivial fits") {
  // y = x with (w, b) = (1, 0) fits {(1,1), (2,2)} exactly.
  ParameterVector perfect;
  perfect.values = {1.0, 0.0};
  DataShard two;
  two.feature_dim = 1;
  two.target_dim = 1;
  two.features = {1.0, 2.0};
  two.targets = {1.0, 2.0};
  CHECK(fedf::loss(linreg(1), perfect, two) == 0.0);

  ParameterVector zeros;
  zeros.values = {0.0, 0.0};
  CHECK(fedf::loss(linreg(1), zeros, one_sample({1.0}, {1.0})) == 1.0);
}

TEST_CASE("loss equals an independent per-sample recomputation") {
  const ModelSpec spec = linreg(4, 2);
  const ParameterVector params = helpers::random_params(spec, 21);
  const DataShard data = helpers::random_shard(64, 4, 2, 22);
  // Brute-force oracle with its own forward pass.
  double acc = 0.0;
  for (std::size_t j = 0; j < data.sample_count(); ++j) {
    for (std::size_t o = 0; o < 2; ++o) {
      double z = params.values[8 + o];
      for (std::size_t i = 0; i < 4; ++i) {
        z += params.values[o * 4 + i] * data.feature_row(j)[i];
      }
      const double r = data.target_row(j)[o] - z;
      acc += r * r;
    }
  }
  acc /= static_cast<double>(data.sample_count());
  CHECK(fedf::loss(spec, params, data) == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("loss is invariant under sample permutation") {
  const ModelSpec spec = linreg(3);
  const ParameterVector params = helpers::random_params(spec, 31);
  const DataShard data = helpers::random_shard(33, 3, 1, 32);
  DataShard reversed;
  reversed.feature_dim = 3;
  reversed.target_dim = 1;
  for (std::size_t j = data.sample_count(); j-- > 0;) {
    reversed.features.insert(reversed.features.end(), data.feature_row(j),
                             data.feature_row(j) + 3);
    reversed.targets.push_back(data.target_row(j)[0]);
  }
  CHECK(fedf::loss(spec, params, data) ==
        doctest::Approx(fedf::loss(spec, params, reversed)).epsilon(1e-12));
}

TEST_CASE("hand-computed gradient for the one-sample linear case") {
  ParameterVector zeros;
  zeros.values = {0.0, 0.0};
  const auto g = fedf::gradient(linreg(1), zeros, one_sample({1.0}, {1.0}));
  CHECK(g.values[0] == doctest::Approx(-2.0));
  CHECK(g.values[1] == doctest::Approx(-2.0));
}

TEST_CASE("zero residual means zero gradient") {
  ParameterVector perfect;
  perfect.values = {1.0, 0.0};
  const auto g = fedf::gradient(linreg(1), perfect, one_sample({2.0}, {2.0}));
  CHECK(g.values[0] == 0.0);
  CHECK(g.values[1] == 0.0);
}

TEST_CASE("gradients match central finite differences on 100 random instances "
          "per model kind") {
  struct Case {
    ModelSpec spec;
    bool classes;
  };
  const Case cases[] = {
      {linreg(5, 2), false},
      {logreg(4, 1, LossKind::kCrossEntropy), true},
      {logreg(3, 4, LossKind::kCrossEntropy), true},
      {logreg(3, 1, LossKind::kMse), true},
      {mlp(4, 6, 2, LossKind::kMse), false},
      {mlp(3, 5, 3, LossKind::kCrossEntropy), true},
  };
  for (const Case& c : cases) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 100; ++seed) {
      const ParameterVector params =
          helpers::random_params(c.spec, 1000 + seed);
      DataShard batch;
      if (c.classes && c.spec.loss == LossKind::kCrossEntropy) {
        batch = helpers::random_class_shard(
            7, c.spec.input_dim,
            c.spec.output_dim == 1 ? 2 : c.spec.output_dim, 2000 + seed);
      } else if (c.classes) {
        batch = helpers::random_class_shard(7, c.spec.input_dim, 2, 2000 + seed);
      } else {
        batch = helpers::random_shard(7, c.spec.input_dim, c.spec.output_dim,
                                      2000 + seed);
      }
      const auto analytic = fedf::gradient(c.spec, params, batch);
      const auto numeric =
          oracles::finite_difference_gradient(c.spec, params, batch, 1e-6);
      CHECK(oracles::relative_error(analytic.values, numeric.values) < 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("serial and parallel model kernels agree bit for bit") {
  const ModelSpec specs[] = {linreg(8, 2),
                             logreg(6, 3, LossKind::kCrossEntropy),
                             mlp(5, 7, 2, LossKind::kMse)};
  for (const ModelSpec& spec : specs) {
    const ParameterVector params = helpers::random_params(spec, 5);
    DataShard data;
    if (spec.loss == LossKind::kCrossEntropy) {
      data = helpers::random_class_shard(6000, spec.input_dim, spec.output_dim,
                                         6);
    } else {
      data = helpers::random_shard(6000, spec.input_dim, spec.output_dim, 6);
    }
    CHECK(fedf::loss(spec, params, data) ==
          fedf::serial::loss(spec, params, data));
    CHECK(fedf::gradient(spec, params, data).values ==
          fedf::serial::gradient(spec, params, data).values);
  }
}

TEST_CASE("single full-batch step reproduces the explicit update exactly") {
  const ModelSpec spec = linreg(4);
  const ParameterVector start = helpers::random_params(spec, 41);
  const DataShard data = helpers::random_shard(50, 4, 1, 42);
  TrainingConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 50;
  cfg.local_epochs = 1;
  cfg.shuffle_seed = 7;
  const auto outcome = fedf::train_local(spec, start, data, cfg);
  const auto g = fedf::gradient(spec, start, data);
  for (std::size_t i = 0; i < start.values.size(); ++i) {
    CHECK(outcome.params.values[i] ==
          start.values[i] - cfg.learning_rate * g.values[i]);
  }
  CHECK(outcome.cost == fedf::loss(spec, outcome.params, data));
}

TEST_CASE("momentum at zero matches plain sgd exactly") {
  const ModelSpec spec = linreg(3);
  const ParameterVector start = helpers::random_params(spec, 51);
  const DataShard data = helpers::random_shard(40, 3, 1, 52);
  TrainingConfig plain;
  plain.learning_rate = 0.03;
  plain.batch_size = 8;
  plain.local_epochs = 3;
  plain.shuffle_seed = 9;
  TrainingConfig with_momentum = plain;
  with_momentum.optimizer = fedf::OptimizerKind::kSgdMomentum;
  with_momentum.momentum = 0.0;
  CHECK(fedf::train_local(spec, start, data, plain).params.values ==
        fedf::train_local(spec, start, data, with_momentum).params.values);
}

TEST_CASE("convex least squares training approaches the closed-form optimum") {
  const auto synth = fedf::generate_synthetic(fedf::SyntheticKind::kLinear,
                                              400, 6, 0.05, 61);
  const auto fit = oracles::least_squares(synth.shard);
  const ModelSpec spec = linreg(6);
  TrainingConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 32;
  cfg.local_epochs = 150;
  cfg.shuffle_seed = 62;
  const auto outcome =
      fedf::train_local(spec, fedf::init_parameters(spec, 63), synth.shard, cfg);
  CHECK(outcome.cost < fedf::loss(spec, fedf::init_parameters(spec, 63),
                                  synth.shard));
  CHECK(outcome.cost <= 1.05 * fit.mse);
}

TEST_CASE("train_local is bit-reproducible") {
  const ModelSpec spec = mlp(3, 4, 1, LossKind::kMse);
  const ParameterVector start = helpers::random_params(spec, 71);
  const DataShard data = helpers::random_shard(60, 3, 1, 72);
  TrainingConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.batch_size = 7;
  cfg.local_epochs = 4;
  cfg.shuffle_seed = 73;
  const auto a = fedf::train_local(spec, start, data, cfg);
  const auto b = fedf::train_local(spec, start, data, cfg);
  CHECK(a.params.values == b.params.values);
  CHECK(a.cost == b.cost);
}

TEST_CASE("absurd learning rate raises a divergence error naming the step") {
  const ModelSpec spec = linreg(6);
  const DataShard data = helpers::random_shard(64, 6, 1, 81);
  TrainingConfig cfg;
  cfg.learning_rate = 1e12;
  cfg.batch_size = 8;
  cfg.local_epochs = 50;
  cfg.shuffle_seed = 82;
  CHECK_THROWS_WITH_AS(
      fedf::train_local(spec, fedf::init_parameters(spec, 83), data, cfg),
      doctest::Contains("diverged at local epoch"), fedf::DivergenceError);
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  cfg.batch_size = 100;
  CHECK_THROWS_AS(fedf::validate_training_config(cfg, 50),
                  fedf::ValidationError);
  cfg.batch_size = 10;
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(fedf::validate_training_config(cfg, 50),
                  fedf::ValidationError);
  cfg.momentum = 0.5;
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(fedf::validate_training_config(cfg, 50),
                  fedf::ValidationError);
}

TEST_CASE("dimension mismatches raise") {
  const ModelSpec spec = linreg(3);
  const ParameterVector params = helpers::random_params(spec, 91);
  const DataShard wrong = helpers::random_shard(10, 4, 1, 92);
  CHECK_THROWS_AS(fedf::loss(spec, params, wrong), fedf::DimensionError);
  CHECK_THROWS_AS(fedf::gradient(spec, params, wrong), fedf::DimensionError);
}

TEST_CASE("classifier evaluation reports accuracy") {
  const auto blobs = fedf::generate_synthetic(
      fedf::SyntheticKind::kLogisticBlobs, 600, 4, 0.6, 95);
  const ModelSpec spec = logreg(4, 1, LossKind::kCrossEntropy);
  TrainingConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.batch_size = 32;
  cfg.local_epochs = 40;
  cfg.shuffle_seed = 96;
  const auto outcome = fedf::train_local(
      spec, fedf::init_parameters(spec, 97), blobs.shard, cfg);
  const auto metrics = fedf::evaluate(spec, outcome.params, blobs.shard);
  REQUIRE(metrics.accuracy.has_value());
  CHECK(*metrics.accuracy > 0.95);  // well-separated blobs
  // Regression models report no accuracy.
  CHECK_FALSE(fedf::evaluate(linreg(3), helpers::random_params(linreg(3), 98),
                             helpers::random_shard(10, 3, 1, 99))
                  .accuracy.has_value());
}
