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

#include <json.hpp>

#include "fedf/data.hpp"
#include "fedf/experiment.hpp"
#include "fedf/master.hpp"
#include "fedf/model.hpp"

namespace fedf {

struct DatasetSource {
  enum class Kind { kSynthetic, kCsv };
  Kind source = Kind::kSynthetic;
  // synthetic
  SyntheticKind synthetic_kind = SyntheticKind::kLinear;
  std::size_t n = 0;
  std::size_t dim = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // csv
  std::string path;
  CsvSchema schema;
};

struct TransportConfig {
  enum class Mode { kSim, kTcp };
  Mode mode = Mode::kSim;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  int timeout_ms = kDefaultTimeoutMs;
};

// A full declarative run: every random seed is explicit, so a config names
// one reproducible experiment. Worker k (1-based) trains on shard k-1 with
// workers[k-1].
struct RunConfig {
  ModelSpec model;
  DatasetSource dataset;
  double test_fraction = 0.2;
  SplitSpec split;
  std::vector<TrainingConfig> workers;
  MasterConfig master;
  std::optional<TrainingConfig> centralized;  // defaults to workers[0]
  TransportConfig transport;
  unsigned comm_width_bits = 32;
  TimingModel sim_time;
  std::string output_dir = "runs";
};

// Throws ValidationError naming the offending field path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Deterministic echo of the parsed config, embedded in reports.
nlohmann::json run_config_to_json(const RunConfig& config);

const char* synthetic_kind_name(SyntheticKind kind);
const char* model_kind_name(ModelKind kind);
const char* loss_kind_name(LossKind loss);
const char* optimizer_name(OptimizerKind opt);

}  // namespace fedf
