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

#include <optional>
#include <string>
#include <vector>

#include "fedf/config.hpp"
#include "fedf/session.hpp"

namespace fedf {

// Everything derived deterministically from a config before any training:
// the pooled train set, the held-out test set, and the per-worker setups.
struct PreparedData {
  DataShard train_pool;
  DataShard test;
  std::vector<WorkerSetup> workers;
  std::vector<std::uint64_t> shard_sizes;
  std::optional<SyntheticManifest> manifest;
};

PreparedData prepare_data(const RunConfig& config);

struct RunOptions {
  bool with_centralized = true;
  // Epoch count of the centralized reference used for the simulated-speedup
  // ratio; defaults to the federated epoch count.
  std::optional<std::size_t> central_epochs;
};

struct RunOutput {
  ParameterVector federated_model;
  std::vector<EpochRecord> epochs;
  std::vector<TranscriptEntry> transcript;
  std::vector<std::uint64_t> shard_sizes;

  Metrics fed_train;
  std::optional<Metrics> fed_test;
  std::optional<CentralizedResult> central;
  std::optional<Metrics> central_train;
  std::optional<Metrics> central_test;
  std::optional<double> accuracy_gap;
  std::optional<double> loss_gap;

  SimulatedTiming timing;
  double speedup_value = 0.0;

  std::optional<SyntheticManifest> manifest;
  nlohmann::json report;  // nondeterministic fields confined to report["env"]
};

// Full experiment: federated run (sim, or single-process TCP with worker
// threads over localhost sockets), centralized baseline, metrics, report.
RunOutput execute_run(const RunConfig& config,
                      const RunOptions& options = RunOptions{});

// Multi-process TCP operation.
void run_worker_process(const RunConfig& config, WorkerId worker_id);
RunOutput run_master_process(const RunConfig& config);

// Writes report.json, transcript.jsonl, and manifest.json (synthetic data
// only) into a fresh directory <output_dir>/<UTC timestamp>-seed<seed>.
// Returns the directory path.
std::string write_run_outputs(const RunConfig& config, const RunOutput& output,
                              const std::optional<SyntheticManifest>& manifest);

}  // namespace fedf
