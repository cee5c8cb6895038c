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
#include <string>
#include <vector>

#include "fedf/model.hpp"
#include "fedf/parameters.hpp"
#include "fedf/ternary.hpp"
#include "fedf/transcript.hpp"
#include "fedf/transport.hpp"

namespace fedf {

// Inputs of the goodness function for one worker at one epoch.
struct GoodnessInput {
  WorkerId worker_id = 0;
  double cost_t = 0.0;                  // C_k^t
  std::optional<double> cost_prev;      // C_k^{t-1}, present iff t > 1
  std::uint64_t data_size = 0;          // S_k
};

struct MasterConfig {
  double alpha0 = 0.1;                  // master learning rate
  double beta = 0.2;                    // shared significance threshold
  std::map<WorkerId, double> per_worker_beta;  // optional overrides
  std::size_t global_epochs = 1;
  std::uint64_t seed = 0;
  std::string checkpoint_dir;           // empty disables checkpoints
};

void validate_master_config(const MasterConfig& cfg);
double beta_for(const MasterConfig& cfg, WorkerId id);

struct MasterState {
  ParameterVector p_current;  // P^{t-1} at the start of epoch t
  ParameterVector p_prev;     // P^{t-2}; meaningful for t >= 2
  std::size_t epoch = 0;      // completed epochs
  std::map<WorkerId, double> prev_costs;
  std::vector<WorkerId> pilot_history;
};

// Goodness of one worker's local instance:
//   t = 1   S_k / C_k^1          (+inf when the cost is exactly zero)
//   t > 1   S_k (C_k^{t-1} - C_k^t), negative when the cost regressed
double goodness(const GoodnessInput& input, std::size_t t);

// Worker with maximal goodness; ties go to the smallest worker id.
WorkerId select_pilot(const std::map<WorkerId, double>& goodness_values);

// Global update. The non-pilot workers are exactly the keys of `ternaries`;
// `proportions` holds p_k = S_k/S for every worker and must sum to 1 within
// 1e-12. Summation runs in ascending worker-id order.
//
//   t = 1   P_i = Q_i - alpha0 * sum_k p_k T_{k,i}
//   t > 1   P_i = Q_i - sum_k p_k beta_k T_{k,i} (P_i^{t-1} - P_i^{t-2})
ParameterVector update_global(const MasterState& state,
                              const ParameterVector& pilot_model,
                              const std::map<WorkerId, TernaryVector>& ternaries,
                              const std::map<WorkerId, double>& proportions,
                              const MasterConfig& cfg);

namespace serial {
ParameterVector update_global(const MasterState& state,
                              const ParameterVector& pilot_model,
                              const std::map<WorkerId, TernaryVector>& ternaries,
                              const std::map<WorkerId, double>& proportions,
                              const MasterConfig& cfg);
}  // namespace serial

// A worker as seen by the master after registration.
struct RegisteredWorker {
  WorkerId id = 0;
  std::uint64_t data_size = 0;
  double beta = 0.0;
  Connection* conn = nullptr;
};

// Performs the registration handshake on every connection: reads one
// REGISTER each, validates protocol versions and id uniqueness, then records
// requests and sends replies in ascending worker-id order. Returns workers
// sorted by id.
std::vector<RegisteredWorker> master_register_workers(
    const std::vector<Connection*>& conns, const ModelSpec& spec,
    const MasterConfig& cfg, Transcript& transcript);

struct EpochRecord {
  std::size_t epoch = 0;
  std::map<WorkerId, double> costs;
  std::map<WorkerId, double> goodness;
  WorkerId pilot = 0;
};

struct MasterRunResult {
  ParameterVector final_model;
  std::vector<EpochRecord> epochs;
};

// The synchronous epoch loop: broadcast the current instance, wait for all
// costs, pick the pilot, collect its model and everyone else's ternary
// vector, apply the global update. All-or-nothing per epoch; any worker
// failure or timeout aborts the run with an epoch-level error.
MasterRunResult run_master(const std::vector<RegisteredWorker>& workers,
                           const ModelSpec& spec, const MasterConfig& cfg,
                           Transcript& transcript);

}  // namespace fedf
