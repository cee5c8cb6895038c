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

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedf/data.hpp"
#include "fedf/parameters.hpp"
#include "fedf/rng.hpp"

namespace fedf {

enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp1h };
enum class LossKind { kMse, kCrossEntropy };
enum class OptimizerKind { kSgd, kSgdMomentum };

// Architecture of the small differentiable models that stand in for the
// training algorithm on each worker. The parameter count M and the flat
// layout are deterministic functions of the spec:
//
//   linear / logistic   W row-major (output x input), then biases
//   mlp-1h              W1 (hidden x input), b1, W2 (output x hidden), b2
//
// Hidden activation is tanh; the output stage is identity for mse models and
// sigmoid (output_dim == 1) or softmax otherwise for cross-entropy models.
// Logistic regression always applies its sigmoid/softmax output stage.
struct ModelSpec {
  ModelKind kind = ModelKind::kLinearRegression;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::size_t hidden_dim = 0;  // mlp only
  LossKind loss = LossKind::kMse;
};

void validate_spec(const ModelSpec& spec);
std::size_t param_count(const ModelSpec& spec);
std::string layout_id(const ModelSpec& spec);

// Width of a target row this spec trains against: output_dim values for mse,
// one class-index column for cross-entropy.
std::size_t target_width(const ModelSpec& spec);

// Whether evaluate() reports classification accuracy for this spec.
bool is_classifier(const ModelSpec& spec);

// A worker's private hyperparameters. Never serialized onto the transport.
struct TrainingConfig {
  double learning_rate = 0.01;  // alpha_k
  std::size_t batch_size = 32;
  std::size_t local_epochs = 1;
  std::uint64_t shuffle_seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double momentum = 0.0;
};

void validate_training_config(const TrainingConfig& cfg,
                              std::size_t sample_count);

// Copy of cfg with the shuffle seed re-derived for one global epoch, so
// mini-batch orders differ across protocol rounds while staying reproducible.
TrainingConfig config_for_global_epoch(const TrainingConfig& cfg,
                                       std::size_t global_epoch);

// Uniform values in [-0.5, 0.5] scaled by 1/sqrt(fan_in) per layer slot,
// drawn in layout order. Deterministic for a fixed seed.
ParameterVector init_parameters(const ModelSpec& spec, std::uint64_t seed);

// Mean loss over all samples. Per-sample losses are summed in sample order.
double loss(const ModelSpec& spec, const ParameterVector& params,
            const DataShard& data);

// Analytic mean gradient over the batch, same length as params.
ParameterVector gradient(const ModelSpec& spec, const ParameterVector& params,
                         const DataShard& batch);

struct TrainOutcome {
  ParameterVector params;
  double cost = 0.0;  // loss of params on the full shard
};

// cfg.local_epochs passes of shuffled mini-batch SGD from start. The last
// mini-batch of an epoch may be smaller than batch_size. Throws
// DivergenceError naming the step if a non-finite value appears.
TrainOutcome train_local(const ModelSpec& spec, const ParameterVector& start,
                         const DataShard& data, const TrainingConfig& cfg);

struct Metrics {
  double loss = 0.0;
  std::optional<double> accuracy;  // present for classifiers
};

Metrics evaluate(const ModelSpec& spec, const ParameterVector& params,
                 const DataShard& data);

// Serial reference implementations for the parallel kernels above; used by
// tests and the kernel benchmark. Bit-identical to the public entry points.
namespace serial {
double loss(const ModelSpec& spec, const ParameterVector& params,
            const DataShard& data);
ParameterVector gradient(const ModelSpec& spec, const ParameterVector& params,
                         const DataShard& batch);
}  // namespace serial

}  // namespace fedf
