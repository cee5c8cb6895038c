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

#include "fedf/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "fedf/checkpoint.hpp"
#include "fedf/ternary.hpp"

namespace fedf {

namespace {

double packing_ratio(unsigned width_bits) {
  // 2 bits per trit.
  return static_cast<double>(width_bits) / 2.0;
}

}  // namespace

void validate_comm_model(const CommModel& cm) {
  if (!(cm.model_size_v > 0.0)) {
    throw ValidationError("comm model: V must be positive");
  }
  if (cm.n_workers < 1) {
    throw ValidationError("comm model: N must be >= 1");
  }
  if (cm.batches_b < 1) {
    throw ValidationError("comm model: B must be >= 1");
  }
  if (cm.width_bits != 32 && cm.width_bits != 64) {
    throw ValidationError("comm model: width must be 32 or 64 bits");
  }
}

double comm_fedf(const CommModel& cm) {
  validate_comm_model(cm);
  const double v = cm.model_size_v;
  const double n = static_cast<double>(cm.n_workers);
  return v * (n + 1.0) + v * (n - 1.0) / packing_ratio(cm.width_bits);
}

double comm_phong(const CommModel& cm) {
  validate_comm_model(cm);
  return 2.0 * cm.model_size_v * static_cast<double>(cm.n_workers);
}

double comm_terngrad(const CommModel& cm) {
  validate_comm_model(cm);
  return static_cast<double>(cm.batches_b) * cm.model_size_v /
         packing_ratio(cm.width_bits);
}

std::uint64_t comm_fedf_exact_bytes(std::uint64_t m, unsigned width_bits,
                                    std::size_t n_workers) {
  if (width_bits % 8 != 0) {
    throw ValidationError("width_bits must be a whole number of bytes");
  }
  const std::uint64_t model_bytes = m * (width_bits / 8);
  const std::uint64_t ternary_bytes = packed_byte_count(m);
  return model_bytes * (n_workers + 1) + ternary_bytes * (n_workers - 1);
}

std::map<std::uint64_t, EpochBytes> account_transcript(
    const std::vector<TranscriptEntry>& entries, unsigned width_bits) {
  if (width_bits % 8 != 0) {
    throw ValidationError("width_bits must be a whole number of bytes");
  }
  std::map<std::uint64_t, EpochBytes> out;
  for (const TranscriptEntry& e : entries) {
    EpochBytes& slot = out[e.epoch];
    slot.control_bytes += kFrameHeaderBytes;
    switch (e.kind) {
      case MessageKind::kStartEpoch:
      case MessageKind::kModel: {
        const std::uint64_t m =
            model_param_count(e.payload.data(), e.payload.size());
        const std::uint64_t counted = m * (width_bits / 8);
        slot.model_bytes += counted;
        // Encoding overhead beyond the raw 64-bit values is control plane,
        // as is the difference between the stored and the counted width.
        slot.control_bytes += e.payload.size() - 8 * m;
        break;
      }
      case MessageKind::kTernary: {
        if (e.payload.size() < 8) {
          throw ParseError("TERNARY payload shorter than its length header");
        }
        slot.ternary_bytes += e.payload.size() - 8;
        slot.control_bytes += 8;
        break;
      }
      default:
        slot.control_bytes += e.payload.size();
        break;
    }
  }
  return out;
}

CentralizedResult run_centralized(const ModelSpec& spec, const DataShard& data,
                                  const TrainingConfig& cfg, std::size_t epochs,
                                  std::uint64_t seed) {
  if (epochs == 0) throw ValidationError("run_centralized: epochs must be >= 1");
  CentralizedResult result;
  result.params = init_parameters(spec, seed);
  for (std::size_t t = 1; t <= epochs; ++t) {
    TrainOutcome outcome = train_local(spec, result.params, data,
                                       config_for_global_epoch(cfg, t));
    result.params = std::move(outcome.params);
    result.train_loss = outcome.cost;
  }
  return result;
}

SimulatedTiming simulate_timing(const std::vector<std::uint64_t>& shard_sizes,
                                std::size_t central_epochs,
                                std::size_t federated_epochs,
                                const TimingModel& tm) {
  if (shard_sizes.empty()) {
    throw ValidationError("simulate_timing: no shard sizes");
  }
  if (!(tm.per_sample_cost > 0.0) || tm.epoch_overhead < 0.0) {
    throw ValidationError("simulate_timing: invalid timing model");
  }
  std::uint64_t total = 0;
  std::uint64_t largest = 0;
  for (std::uint64_t s : shard_sizes) {
    total += s;
    largest = std::max(largest, s);
  }
  SimulatedTiming timing;
  timing.federated_epoch =
      tm.per_sample_cost * static_cast<double>(largest) + tm.epoch_overhead;
  timing.federated_total =
      static_cast<double>(federated_epochs) * timing.federated_epoch;
  timing.centralized_total = static_cast<double>(central_epochs) *
                             tm.per_sample_cost * static_cast<double>(total);
  return timing;
}

double speedup(const SimulatedTiming& timing) {
  if (!(timing.federated_total > 0.0) || !(timing.centralized_total > 0.0)) {
    throw ValidationError("speedup: timings missing");
  }
  return timing.centralized_total / timing.federated_total;
}

double approximation_gap(double fed_metric, double central_metric) {
  if (central_metric == 0.0) {
    throw ValidationError("approximation_gap: central metric is zero");
  }
  return (central_metric - fed_metric) / central_metric;
}

}  // namespace fedf
