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
#include <string>
#include <utility>
#include <vector>

#include "fedf/errors.hpp"

namespace fedf {

// A dataset (or a worker's private portion of one). Features and targets are
// stored row-major. Classification targets use one column holding the class
// index as a double.
struct DataShard {
  std::size_t feature_dim = 0;
  std::size_t target_dim = 0;
  std::vector<double> features;  // sample_count x feature_dim
  std::vector<double> targets;   // sample_count x target_dim

  std::size_t sample_count() const {
    return feature_dim == 0 ? 0 : features.size() / feature_dim;
  }
  const double* feature_row(std::size_t i) const {
    return features.data() + i * feature_dim;
  }
  const double* target_row(std::size_t i) const {
    return targets.data() + i * target_dim;
  }
};

// Randomized split into n_parts shards with controlled imbalance: fractions
// are drawn from a symmetric Dirichlet (concentration 5.0), floored at
// min_fraction, and renormalized.
struct SplitSpec {
  std::size_t n_parts = 1;
  double min_fraction = 0.0;
  std::uint64_t seed = 0;
};

enum class SyntheticKind { kLinear, kLogisticBlobs, kQuadratic };

struct SyntheticManifest {
  SyntheticKind kind = SyntheticKind::kLinear;
  std::size_t n = 0;
  std::size_t dim = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // Ground truth: weights/bias for linear and quadratic, the two class
  // centers (flattened 2 x dim) for logistic blobs.
  std::vector<double> true_weights;
  double true_bias = 0.0;
  std::vector<double> blob_centers;
};

struct SyntheticData {
  DataShard shard;
  SyntheticManifest manifest;
};

// Deterministic synthetic datasets.
//   linear          y = w.x + b + eps,           w_i, b ~ U(-1,1), x ~ U(-1,1)
//   logistic-blobs  two classes at -+1 per axis, x = center + sigma * N(0,1)
//   quadratic       y = (w.x + b)^2 + eps
// eps ~ N(0, noise_sigma). Ground truth is recorded in the manifest.
SyntheticData generate_synthetic(SyntheticKind kind, std::size_t n,
                                 std::size_t dim, double noise_sigma,
                                 std::uint64_t seed);

// Exact partition of the samples: disjoint, covering, every shard at least
// ceil(min_fraction * S) samples. n_parts == 1 returns the input unchanged.
std::vector<DataShard> split(const DataShard& data, const SplitSpec& spec);

// Shuffled (train, test) cut used for held-out evaluation. test_fraction in
// [0, 1); the test shard may be empty.
std::pair<DataShard, DataShard> holdout_split(const DataShard& data,
                                              double test_fraction,
                                              std::uint64_t seed);

struct CsvSchema {
  std::size_t feature_cols = 0;
  std::size_t target_cols = 1;
  bool has_header = false;
};

// Rows become samples; the first feature_cols columns are features, the next
// target_cols columns are targets. Parse failures name the offending line.
DataShard load_csv(const std::string& path, const CsvSchema& schema);

// Values written with full round-trip precision.
void save_csv(const std::string& path, const DataShard& shard);

DataShard take_rows(const DataShard& data,
                    const std::vector<std::size_t>& rows);

}  // namespace fedf
