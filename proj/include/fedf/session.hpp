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
#include <functional>
#include <string>
#include <vector>

#include "fedf/master.hpp"
#include "fedf/worker.hpp"

namespace fedf {

struct WorkerSetup {
  WorkerProfile profile;
  DataShard shard;
};

// A worker-side task given its connection to the master. The default task is
// worker_loop; tests inject scripted behaviors through this hook.
using WorkerTask = std::function<void(Connection&)>;

struct FederatedRunResult {
  ParameterVector final_model;
  std::vector<EpochRecord> epochs;
  std::vector<TranscriptEntry> transcript;
};

// Runs master and workers in one process over the deterministic in-process
// transport. Worker tasks run concurrently; all aggregation happens at the
// master's barrier in ascending worker-id order.
FederatedRunResult run_federated_sim(const ModelSpec& spec,
                                     const MasterConfig& cfg,
                                     const std::vector<WorkerSetup>& workers,
                                     int timeout_ms = kDefaultTimeoutMs);

// Same, with caller-supplied worker tasks (connection handed to each task).
FederatedRunResult run_federated_sim_tasks(const ModelSpec& spec,
                                           const MasterConfig& cfg,
                                           const std::vector<WorkerTask>& tasks,
                                           int timeout_ms = kDefaultTimeoutMs);

// Runs the identical protocol over framed TCP on the given host, with the
// workers as in-process threads connecting through real sockets. port 0
// picks an ephemeral port.
FederatedRunResult run_federated_tcp(const ModelSpec& spec,
                                     const MasterConfig& cfg,
                                     const std::vector<WorkerSetup>& workers,
                                     const std::string& host = "127.0.0.1",
                                     std::uint16_t port = 0,
                                     int timeout_ms = kDefaultTimeoutMs);

}  // namespace fedf
