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
//
// Independent oracles used by the tests. Nothing here reuses the library's
// gradient/solver code paths.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fedf/data.hpp"
#include "fedf/model.hpp"
#include "fedf/parameters.hpp"

namespace oracles {

// Central finite differences of the library loss at step h.
inline fedf::ParameterVector finite_difference_gradient(
    const fedf::ModelSpec& spec, const fedf::ParameterVector& params,
    const fedf::DataShard& batch, double h) {
  fedf::ParameterVector grad;
  grad.layout_id = params.layout_id;
  grad.values.resize(params.values.size());
  fedf::ParameterVector probe = params;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const double saved = probe.values[i];
    probe.values[i] = saved + h;
    const double up = fedf::loss(spec, probe, batch);
    probe.values[i] = saved - h;
    const double down = fedf::loss(spec, probe, batch);
    probe.values[i] = saved;
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double relative_error(const std::vector<double>& a,
                             const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// Dense Gaussian elimination with partial pivoting; small systems only.
inline std::vector<double> solve_linear_system(std::vector<double> a,
                                               std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (std::fabs(a[pivot * n + col]) < 1e-14) {
      throw std::runtime_error("normal equations singular");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
      }
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

struct LeastSquaresFit {
  std::vector<double> weights;  // dim entries
  double bias = 0.0;
  double mse = 0.0;  // mean squared residual of the fit
};

// Closed-form least squares on [X 1] via the normal equations; the oracle for
// convex-training checks. Single-output shards only.
inline LeastSquaresFit least_squares(const fedf::DataShard& data) {
  if (data.target_dim != 1) {
    throw std::runtime_error("least_squares oracle expects one target column");
  }
  const std::size_t d = data.feature_dim + 1;
  const std::size_t n = data.sample_count();
  std::vector<double> ata(d * d, 0.0);
  std::vector<double> aty(d, 0.0);
  std::vector<double> row(d, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < data.feature_dim; ++i) {
      row[i] = data.feature_row(j)[i];
    }
    row[d - 1] = 1.0;
    const double y = data.target_row(j)[0];
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) ata[r * d + c] += row[r] * row[c];
      aty[r] += row[r] * y;
    }
  }
  const std::vector<double> x = solve_linear_system(ata, aty);
  LeastSquaresFit fit;
  fit.weights.assign(x.begin(), x.end() - 1);
  fit.bias = x.back();
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double pred = fit.bias;
    for (std::size_t i = 0; i < data.feature_dim; ++i) {
      pred += fit.weights[i] * data.feature_row(j)[i];
    }
    const double r = data.target_row(j)[0] - pred;
    acc += r * r;
  }
  fit.mse = acc / static_cast<double>(n);
  return fit;
}

}  // namespace oracles
