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

#include "fedf/model.hpp"

#include <algorithm>
#include <cmath>

#include "fedf/parallel.hpp"

namespace fedf {

namespace {

enum class OutputStage { kIdentity, kSigmoid, kSoftmax };

OutputStage output_stage(const ModelSpec& spec) {
  const bool probabilistic = spec.kind == ModelKind::kLogisticRegression ||
                             spec.loss == LossKind::kCrossEntropy;
  if (!probabilistic) return OutputStage::kIdentity;
  return spec.output_dim == 1 ? OutputStage::kSigmoid : OutputStage::kSoftmax;
}

// Flat layout offsets; see ModelSpec docs for the ordering.
struct Layout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

Layout layout(const ModelSpec& spec) {
  Layout l;
  if (spec.kind == ModelKind::kMlp1h) {
    l.w1 = 0;
    l.b1 = spec.hidden_dim * spec.input_dim;
    l.w2 = l.b1 + spec.hidden_dim;
    l.b2 = l.w2 + spec.output_dim * spec.hidden_dim;
  } else {
    l.w1 = 0;
    l.b1 = spec.output_dim * spec.input_dim;
  }
  return l;
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

std::size_t class_index(double y, std::size_t n_classes) {
  const std::size_t c = static_cast<std::size_t>(y);
  if (y < 0.0 || y != std::floor(y) || c >= n_classes) {
    throw ValidationError("class target " + std::to_string(y) +
                          " is not an integer in [0, " +
                          std::to_string(n_classes) + ")");
  }
  return c;
}

// Per-sample scratch shared by the serial and parallel paths so both compute
// every intermediate with literally the same expressions.
struct SampleScratch {
  std::vector<double> z;    // output pre-activations
  std::vector<double> p;    // softmax probabilities
  std::vector<double> hid;  // mlp hidden activations (tanh)
  std::vector<double> dz;   // dLoss/dz
  std::vector<double> da;   // mlp dLoss/d(hidden pre-activation)

  explicit SampleScratch(const ModelSpec& spec)
      : z(spec.output_dim),
        p(spec.output_dim),
        hid(spec.hidden_dim),
        dz(spec.output_dim),
        da(spec.hidden_dim) {}
};

void forward(const ModelSpec& spec, const double* w, const double* x,
             SampleScratch& s) {
  const Layout l = layout(spec);
  if (spec.kind == ModelKind::kMlp1h) {
    for (std::size_t h = 0; h < spec.hidden_dim; ++h) {
      double a = w[l.b1 + h];
      const double* row = w + l.w1 + h * spec.input_dim;
      for (std::size_t i = 0; i < spec.input_dim; ++i) a += row[i] * x[i];
      s.hid[h] = std::tanh(a);
    }
    for (std::size_t o = 0; o < spec.output_dim; ++o) {
      double z = w[l.b2 + o];
      const double* row = w + l.w2 + o * spec.hidden_dim;
      for (std::size_t h = 0; h < spec.hidden_dim; ++h) z += row[h] * s.hid[h];
      s.z[o] = z;
    }
  } else {
    for (std::size_t o = 0; o < spec.output_dim; ++o) {
      double z = w[l.b1 + o];
      const double* row = w + l.w1 + o * spec.input_dim;
      for (std::size_t i = 0; i < spec.input_dim; ++i) z += row[i] * x[i];
      s.z[o] = z;
    }
  }
}

void softmax_probs(SampleScratch& s, std::size_t out) {
  double zmax = s.z[0];
  for (std::size_t o = 1; o < out; ++o) zmax = std::max(zmax, s.z[o]);
  double denom = 0.0;
  for (std::size_t o = 0; o < out; ++o) {
    s.p[o] = std::exp(s.z[o] - zmax);
    denom += s.p[o];
  }
  for (std::size_t o = 0; o < out; ++o) s.p[o] /= denom;
}

double sample_loss(const ModelSpec& spec, const double* y, SampleScratch& s) {
  const std::size_t out = spec.output_dim;
  switch (output_stage(spec)) {
    case OutputStage::kIdentity: {
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        const double r = y[o] - s.z[o];
        acc += r * r;
      }
      return acc;
    }
    case OutputStage::kSigmoid: {
      const double z = s.z[0];
      if (spec.loss == LossKind::kCrossEntropy) {
        // Stable binary cross-entropy with logits.
        return std::max(z, 0.0) - y[0] * z + std::log1p(std::exp(-std::abs(z)));
      }
      const double r = y[0] - sigmoid(z);
      return r * r;
    }
    case OutputStage::kSoftmax: {
      if (spec.loss == LossKind::kCrossEntropy) {
        const std::size_t c = class_index(y[0], out);
        double zmax = s.z[0];
        for (std::size_t o = 1; o < out; ++o) zmax = std::max(zmax, s.z[o]);
        double denom = 0.0;
        for (std::size_t o = 0; o < out; ++o) denom += std::exp(s.z[o] - zmax);
        return zmax + std::log(denom) - s.z[c];
      }
      softmax_probs(s, out);
      const std::size_t c = class_index(y[0], out);
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        const double t = (o == c) ? 1.0 : 0.0;
        const double r = t - s.p[o];
        acc += r * r;
      }
      return acc;
    }
  }
  return 0.0;  // unreachable
}

// Fills s.dz (and s.da for the mlp) for one sample.
void backward_dz(const ModelSpec& spec, const double* w, const double* y,
                 SampleScratch& s) {
  const std::size_t out = spec.output_dim;
  switch (output_stage(spec)) {
    case OutputStage::kIdentity:
      for (std::size_t o = 0; o < out; ++o) s.dz[o] = 2.0 * (s.z[o] - y[o]);
      break;
    case OutputStage::kSigmoid: {
      const double p = sigmoid(s.z[0]);
      if (spec.loss == LossKind::kCrossEntropy) {
        s.dz[0] = p - y[0];
      } else {
        s.dz[0] = 2.0 * (p - y[0]) * p * (1.0 - p);
      }
      break;
    }
    case OutputStage::kSoftmax: {
      softmax_probs(s, out);
      const std::size_t c = class_index(y[0], out);
      if (spec.loss == LossKind::kCrossEntropy) {
        for (std::size_t o = 0; o < out; ++o) {
          s.dz[o] = s.p[o] - ((o == c) ? 1.0 : 0.0);
        }
      } else {
        double mix = 0.0;
        for (std::size_t o = 0; o < out; ++o) {
          const double t = (o == c) ? 1.0 : 0.0;
          mix += (s.p[o] - t) * s.p[o];
        }
        for (std::size_t o = 0; o < out; ++o) {
          const double t = (o == c) ? 1.0 : 0.0;
          s.dz[o] = 2.0 * s.p[o] * ((s.p[o] - t) - mix);
        }
      }
      break;
    }
  }
  if (spec.kind == ModelKind::kMlp1h) {
    const Layout l = layout(spec);
    for (std::size_t h = 0; h < spec.hidden_dim; ++h) {
      double dh = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        dh += s.dz[o] * w[l.w2 + o * spec.hidden_dim + h];
      }
      s.da[h] = dh * (1.0 - s.hid[h] * s.hid[h]);
    }
  }
}

void check_data(const ModelSpec& spec, const ParameterVector& params,
                const DataShard& data, const char* context) {
  if (params.values.size() != param_count(spec)) {
    throw DimensionError(std::string(context) + ": expected " +
                         std::to_string(param_count(spec)) +
                         " parameters, got " +
                         std::to_string(params.values.size()));
  }
  if (data.sample_count() == 0) {
    throw ValidationError(std::string(context) + ": empty data shard");
  }
  if (data.feature_dim != spec.input_dim) {
    throw DimensionError(std::string(context) + ": feature dim " +
                         std::to_string(data.feature_dim) +
                         " does not match input dim " +
                         std::to_string(spec.input_dim));
  }
  if (data.target_dim != target_width(spec)) {
    throw DimensionError(std::string(context) + ": target dim " +
                         std::to_string(data.target_dim) + " does not match " +
                         std::to_string(target_width(spec)));
  }
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
  if (spec.input_dim == 0 || spec.output_dim == 0) {
    throw ValidationError("model dims must be positive");
  }
  if (spec.kind == ModelKind::kMlp1h) {
    if (spec.hidden_dim == 0) {
      throw ValidationError("mlp-1h requires hidden_dim >= 1");
    }
  } else if (spec.hidden_dim != 0) {
    throw ValidationError("hidden_dim is only valid for mlp-1h");
  }
  if (spec.kind == ModelKind::kLinearRegression &&
      spec.loss == LossKind::kCrossEntropy) {
    throw ValidationError(
        "cross-entropy is undefined for linear-regression outputs");
  }
}

std::size_t param_count(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kMlp1h) {
    return spec.hidden_dim * spec.input_dim + spec.hidden_dim +
           spec.output_dim * spec.hidden_dim + spec.output_dim;
  }
  return spec.output_dim * spec.input_dim + spec.output_dim;
}

std::string layout_id(const ModelSpec& spec) {
  const char* loss = spec.loss == LossKind::kMse ? "mse" : "ce";
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
      return "linreg:in=" + std::to_string(spec.input_dim) +
             ",out=" + std::to_string(spec.output_dim) + ",loss=" + loss;
    case ModelKind::kLogisticRegression:
      return "logreg:in=" + std::to_string(spec.input_dim) +
             ",out=" + std::to_string(spec.output_dim) + ",loss=" + loss;
    case ModelKind::kMlp1h:
      return "mlp1h:in=" + std::to_string(spec.input_dim) +
             ",hid=" + std::to_string(spec.hidden_dim) +
             ",out=" + std::to_string(spec.output_dim) + ",loss=" + loss;
  }
  return "invalid";
}

std::size_t target_width(const ModelSpec& spec) {
  return spec.loss == LossKind::kMse ? spec.output_dim : 1;
}

bool is_classifier(const ModelSpec& spec) {
  return output_stage(spec) != OutputStage::kIdentity;
}

void validate_training_config(const TrainingConfig& cfg,
                              std::size_t sample_count) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ValidationError("learning_rate must be positive and finite");
  }
  if (cfg.batch_size == 0) {
    throw ValidationError("batch_size must be >= 1");
  }
  if (cfg.batch_size > sample_count) {
    throw ValidationError("batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds shard size " +
                          std::to_string(sample_count));
  }
  if (cfg.local_epochs == 0) {
    throw ValidationError("local_epochs must be >= 1");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw ValidationError("momentum must be in [0, 1)");
  }
}

TrainingConfig config_for_global_epoch(const TrainingConfig& cfg,
                                       std::size_t global_epoch) {
  TrainingConfig out = cfg;
  out.shuffle_seed = derive_seed(cfg.shuffle_seed, global_epoch);
  return out;
}

ParameterVector init_parameters(const ModelSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  ParameterVector p;
  p.layout_id = layout_id(spec);
  p.values.reserve(param_count(spec));
  Rng64 rng(seed);
  auto draw_block = [&](std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      p.values.push_back(rng.uniform(-0.5, 0.5) * scale);
    }
  };
  if (spec.kind == ModelKind::kMlp1h) {
    draw_block(spec.hidden_dim * spec.input_dim, spec.input_dim);
    draw_block(spec.hidden_dim, spec.input_dim);
    draw_block(spec.output_dim * spec.hidden_dim, spec.hidden_dim);
    draw_block(spec.output_dim, spec.hidden_dim);
  } else {
    draw_block(spec.output_dim * spec.input_dim, spec.input_dim);
    draw_block(spec.output_dim, spec.input_dim);
  }
  return p;
}

double loss(const ModelSpec& spec, const ParameterVector& params,
            const DataShard& data) {
  check_data(spec, params, data, "loss");
  const std::size_t n = data.sample_count();
  const double* w = params.values.data();
  std::vector<double> per_sample(n);
#if defined(_OPENMP)
#pragma omp parallel if (n >= kParallelGrain)
#endif
  {
    SampleScratch scratch(spec);
#if defined(_OPENMP)
#pragma omp for schedule(static)
#endif
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
      forward(spec, w, data.feature_row(j), scratch);
      per_sample[j] = sample_loss(spec, data.target_row(j), scratch);
    }
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += per_sample[j];
  return acc / static_cast<double>(n);
}

ParameterVector gradient(const ModelSpec& spec, const ParameterVector& params,
                         const DataShard& batch) {
  check_data(spec, params, batch, "gradient");
  const std::size_t n = batch.sample_count();
  const std::size_t out = spec.output_dim;
  const std::size_t hid = spec.hidden_dim;
  const std::size_t in = spec.input_dim;
  const double* w = params.values.data();
  const Layout l = layout(spec);

  // Stage 1: per-sample pre-activation gradients (disjoint writes).
  std::vector<double> dz(n * out);
  std::vector<double> hidbuf;
  std::vector<double> da;
  if (spec.kind == ModelKind::kMlp1h) {
    hidbuf.resize(n * hid);
    da.resize(n * hid);
  }
#if defined(_OPENMP)
#pragma omp parallel if (n >= kParallelGrain)
#endif
  {
    SampleScratch scratch(spec);
#if defined(_OPENMP)
#pragma omp for schedule(static)
#endif
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
      forward(spec, w, batch.feature_row(j), scratch);
      backward_dz(spec, w, batch.target_row(j), scratch);
      std::copy(scratch.dz.begin(), scratch.dz.end(), dz.begin() + j * out);
      if (spec.kind == ModelKind::kMlp1h) {
        std::copy(scratch.hid.begin(), scratch.hid.end(),
                  hidbuf.begin() + j * hid);
        std::copy(scratch.da.begin(), scratch.da.end(), da.begin() + j * hid);
      }
    }
  }

  // Stage 2: per-parameter sums over samples, always in sample order so the
  // result matches the serial reference bit for bit.
  ParameterVector g;
  g.layout_id = params.layout_id;
  g.values.assign(params.values.size(), 0.0);
  double* gv = g.values.data();
  if (spec.kind == ModelKind::kMlp1h) {
    FEDF_PARALLEL_FOR(hid* n)
    for (std::int64_t h = 0; h < static_cast<std::int64_t>(hid); ++h) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = da[j * hid + h];
        const double* x = batch.feature_row(j);
        double* row = gv + l.w1 + h * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
        gv[l.b1 + h] += d;
      }
    }
    FEDF_PARALLEL_FOR(out* n)
    for (std::int64_t o = 0; o < static_cast<std::int64_t>(out); ++o) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = dz[j * out + o];
        const double* hrow = hidbuf.data() + j * hid;
        double* row = gv + l.w2 + o * hid;
        for (std::size_t h = 0; h < hid; ++h) row[h] += d * hrow[h];
        gv[l.b2 + o] += d;
      }
    }
  } else {
    FEDF_PARALLEL_FOR(out* n)
    for (std::int64_t o = 0; o < static_cast<std::int64_t>(out); ++o) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = dz[j * out + o];
        const double* x = batch.feature_row(j);
        double* row = gv + l.w1 + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
        gv[l.b1 + o] += d;
      }
    }
  }
  const double denom = static_cast<double>(n);
  FEDF_PARALLEL_FOR(g.values.size())
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(g.values.size());
       ++i) {
    gv[i] /= denom;
  }
  return g;
}

TrainOutcome train_local(const ModelSpec& spec, const ParameterVector& start,
                         const DataShard& data, const TrainingConfig& cfg) {
  check_data(spec, start, data, "train_local");
  validate_training_config(cfg, data.sample_count());
  const std::size_t n = data.sample_count();
  const std::size_t n_batches = (n + cfg.batch_size - 1) / cfg.batch_size;

  ParameterVector params = start;
  std::vector<double> velocity;
  if (cfg.optimizer == OptimizerKind::kSgdMomentum) {
    velocity.assign(params.values.size(), 0.0);
  }
  DataShard batch;
  batch.feature_dim = data.feature_dim;
  batch.target_dim = data.target_dim;

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::vector<std::size_t> order =
        shuffled_indices(n, derive_seed(cfg.shuffle_seed, epoch));
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      std::vector<std::size_t> idx(order.begin() + begin, order.begin() + end);
      // Sorted so the accumulation order is the shard order; a full batch
      // then reproduces gradient(data) exactly.
      std::sort(idx.begin(), idx.end());
      batch.features.assign(idx.size() * data.feature_dim, 0.0);
      batch.targets.assign(idx.size() * data.target_dim, 0.0);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy(data.feature_row(idx[r]),
                  data.feature_row(idx[r]) + data.feature_dim,
                  batch.features.begin() + r * data.feature_dim);
        std::copy(data.target_row(idx[r]),
                  data.target_row(idx[r]) + data.target_dim,
                  batch.targets.begin() + r * data.target_dim);
      }
      ParameterVector g = gradient(spec, params, batch);
      if (cfg.optimizer == OptimizerKind::kSgdMomentum) {
        for (std::size_t i = 0; i < params.values.size(); ++i) {
          velocity[i] = cfg.momentum * velocity[i] + g.values[i];
          params.values[i] -= cfg.learning_rate * velocity[i];
        }
      } else {
        for (std::size_t i = 0; i < params.values.size(); ++i) {
          params.values[i] -= cfg.learning_rate * g.values[i];
        }
      }
      for (double v : params.values) {
        if (!std::isfinite(v)) {
          throw DivergenceError(
              "train_local: diverged at local epoch " + std::to_string(epoch) +
              ", batch " + std::to_string(b));
        }
      }
    }
  }
  TrainOutcome outcome;
  outcome.cost = loss(spec, params, data);
  if (!std::isfinite(outcome.cost)) {
    throw DivergenceError("train_local: non-finite final cost");
  }
  outcome.params = std::move(params);
  return outcome;
}

Metrics evaluate(const ModelSpec& spec, const ParameterVector& params,
                 const DataShard& data) {
  Metrics m;
  m.loss = loss(spec, params, data);
  if (!is_classifier(spec)) return m;
  const std::size_t n = data.sample_count();
  SampleScratch scratch(spec);
  std::size_t correct = 0;
  for (std::size_t j = 0; j < n; ++j) {
    forward(spec, params.values.data(), data.feature_row(j), scratch);
    std::size_t pred = 0;
    if (spec.output_dim == 1) {
      pred = scratch.z[0] >= 0.0 ? 1 : 0;
    } else {
      for (std::size_t o = 1; o < spec.output_dim; ++o) {
        if (scratch.z[o] > scratch.z[pred]) pred = o;
      }
    }
    const std::size_t truth = class_index(data.target_row(j)[0],
                                          spec.output_dim == 1 ? 2
                                                               : spec.output_dim);
    if (pred == truth) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return m;
}

namespace serial {

double loss(const ModelSpec& spec, const ParameterVector& params,
            const DataShard& data) {
  check_data(spec, params, data, "loss");
  const std::size_t n = data.sample_count();
  SampleScratch scratch(spec);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    forward(spec, params.values.data(), data.feature_row(j), scratch);
    acc += sample_loss(spec, data.target_row(j), scratch);
  }
  return acc / static_cast<double>(n);
}

ParameterVector gradient(const ModelSpec& spec, const ParameterVector& params,
                         const DataShard& batch) {
  check_data(spec, params, batch, "gradient");
  const std::size_t n = batch.sample_count();
  const std::size_t out = spec.output_dim;
  const std::size_t hid = spec.hidden_dim;
  const std::size_t in = spec.input_dim;
  const double* w = params.values.data();
  const Layout l = layout(spec);

  ParameterVector g;
  g.layout_id = params.layout_id;
  g.values.assign(params.values.size(), 0.0);
  double* gv = g.values.data();
  SampleScratch scratch(spec);
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = batch.feature_row(j);
    forward(spec, w, x, scratch);
    backward_dz(spec, w, batch.target_row(j), scratch);
    if (spec.kind == ModelKind::kMlp1h) {
      for (std::size_t h = 0; h < hid; ++h) {
        const double d = scratch.da[h];
        double* row = gv + l.w1 + h * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
        gv[l.b1 + h] += d;
      }
      for (std::size_t o = 0; o < out; ++o) {
        const double d = scratch.dz[o];
        double* row = gv + l.w2 + o * hid;
        for (std::size_t h = 0; h < hid; ++h) row[h] += d * scratch.hid[h];
        gv[l.b2 + o] += d;
      }
    } else {
      for (std::size_t o = 0; o < out; ++o) {
        const double d = scratch.dz[o];
        double* row = gv + l.w1 + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
        gv[l.b1 + o] += d;
      }
    }
  }
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    gv[i] /= static_cast<double>(n);
  }
  return g;
}

}  // namespace serial

}  // namespace fedf
