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
#include <map>
#include <optional>
#include <vector>

#include "fedf/master.hpp"
#include "fedf/model.hpp"
#include "fedf/transcript.hpp"

namespace fedf {

// Analytic per-epoch communication volume. V is a model-instance size in any
// unit (the result keeps the unit); width_bits sets the ternary compression
// ratio: 2 bits per trit gives 16x at 32-bit parameters, 32x at 64-bit.
struct CommModel {
  double model_size_v = 0.0;
  std::size_t n_workers = 1;
  std::size_t batches_b = 1;  // TernGrad only
  unsigned width_bits = 32;
};

void validate_comm_model(const CommModel& cm);

// D = V(N+1) + V(N-1)/ratio: N downloads, one pilot upload, N-1 ternaries.
double comm_fedf(const CommModel& cm);

// Every worker downloads and uploads a full instance: 2VN.
double comm_phong(const CommModel& cm);

// One ternary per mini-batch: B * V / ratio.
double comm_terngrad(const CommModel& cm);

// Byte-exact form of D for a concrete model: packing works on whole bytes,
// so each ternary upload is ceil(M/4) bytes regardless of width.
std::uint64_t comm_fedf_exact_bytes(std::uint64_t m, unsigned width_bits,
                                    std::size_t n_workers);

// Byte accounting over a transcript. Data-plane bytes count model transfers
// at the configured parameter width and ternary transfers as their packed
// buffers; framing, cost scalars, and session messages are control plane.
struct EpochBytes {
  std::uint64_t model_bytes = 0;    // START_EPOCH + MODEL at width_bits
  std::uint64_t ternary_bytes = 0;  // packed buffers only
  std::uint64_t control_bytes = 0;  // frame headers + everything else
  std::uint64_t data_plane() const { return model_bytes + ternary_bytes; }
};

// Keyed by epoch; session-level traffic lands in epoch 0.
std::map<std::uint64_t, EpochBytes> account_transcript(
    const std::vector<TranscriptEntry>& entries, unsigned width_bits);

struct CentralizedResult {
  ParameterVector params;
  double train_loss = 0.0;
};

// Plain mini-batch SGD on the pooled dataset: `epochs` rounds of train_local
// from init_parameters(spec, seed), with the same per-round seed derivation
// the workers use. Matches run_master with N = 1 bit for bit under matched
// configs.
CentralizedResult run_centralized(const ModelSpec& spec, const DataShard& data,
                                  const TrainingConfig& cfg, std::size_t epochs,
                                  std::uint64_t seed);

// Simulated clock: a worker's epoch costs per_sample_cost * S_k plus a fixed
// per-epoch coordination overhead; the centralized baseline costs
// per_sample_cost * S per epoch with no overhead.
struct TimingModel {
  double per_sample_cost = 1.0;
  double epoch_overhead = 0.0;
};

struct SimulatedTiming {
  double centralized_total = 0.0;
  double federated_total = 0.0;
  double federated_epoch = 0.0;
};

SimulatedTiming simulate_timing(const std::vector<std::uint64_t>& shard_sizes,
                                std::size_t central_epochs,
                                std::size_t federated_epochs,
                                const TimingModel& tm);

// T_central / T_federated under the simulated clock.
double speedup(const SimulatedTiming& timing);

// Relative metric shortfall (central - fed) / central; negative when the
// federated model wins.
double approximation_gap(double fed_metric, double central_metric);

}  // namespace fedf
