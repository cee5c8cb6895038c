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

#include "fedf/data.hpp"
#include "fedf/message.hpp"
#include "fedf/model.hpp"
#include "fedf/parameters.hpp"
#include "fedf/transport.hpp"

namespace fedf {

// A worker's identity and private hyperparameters. The training config never
// crosses the transport; beta_k arrives from the master at registration.
struct WorkerProfile {
  WorkerId worker_id = 0;
  std::uint64_t data_size = 0;  // S_k, must equal the shard's sample count
  double beta_k = 0.0;
  TrainingConfig training;
};

// The two-epoch history of master instances needed by the ternarization,
// plus the latest local training outcome.
struct WorkerState {
  ParameterVector p_recv_prev;   // master instance received at epoch t   (P^{t-1})
  ParameterVector p_recv_prev2;  // master instance received at epoch t-1 (P^{t-2})
  ParameterVector q_local;
  double last_cost = 0.0;
  std::size_t epoch = 0;  // completed epochs
};

// One round of local work: shifts the received-instance history, trains from
// the incoming instance with this epoch's derived shuffle seed, and returns
// the cost of the result on the full shard.
double run_epoch(WorkerState& state, const ParameterVector& incoming,
                 const WorkerProfile& profile, const DataShard& shard,
                 const ModelSpec& spec);

enum class WorkerCommand { kSendModel, kSendTernary };

// Builds the reply for the master's command at epoch t: the full local model
// when selected as pilot, otherwise the packed ternary vector
// (first-epoch rule at t = 1, two-epoch history rule afterwards).
Message respond(const WorkerState& state, const WorkerProfile& profile,
                WorkerCommand command, std::uint64_t t);

// Full worker runtime over an established connection: registers, then serves
// epochs until END_RUN. The master's registration reply supplies beta_k and
// the model spec.
void worker_loop(Connection& conn, const WorkerProfile& profile,
                 const DataShard& shard);

}  // namespace fedf
