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

#include "fedf/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace fedf {

namespace {

using nlohmann::json;

// Stream index for the held-out cut; split() itself uses streams 0 and 1 of
// the same seed.
constexpr std::uint64_t kHoldoutStream = 2;

DataShard build_full_dataset(const RunConfig& config,
                             std::optional<SyntheticManifest>& manifest) {
  if (config.dataset.source == DatasetSource::Kind::kSynthetic) {
    SyntheticData data = generate_synthetic(
        config.dataset.synthetic_kind, config.dataset.n, config.dataset.dim,
        config.dataset.noise_sigma, config.dataset.seed);
    manifest = std::move(data.manifest);
    return std::move(data.shard);
  }
  manifest.reset();
  return load_csv(config.dataset.path, config.dataset.schema);
}

double wall_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

json metrics_to_json(const Metrics& m) {
  json j;
  j["loss"] = m.loss;
  if (m.accuracy.has_value()) {
    j["accuracy"] = *m.accuracy;
  } else {
    j["accuracy"] = nullptr;
  }
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Metrics, baseline, timing model, and the report document; everything after
// the protocol itself, shared by the sim, single-process TCP, and
// master-process paths.
void finalize_run(const RunConfig& config, const PreparedData& prepared,
                  const RunOptions& options, double fed_wall, RunOutput& out) {
  out.shard_sizes = prepared.shard_sizes;
  out.manifest = prepared.manifest;
  out.fed_train =
      evaluate(config.model, out.federated_model, prepared.train_pool);
  if (prepared.test.sample_count() > 0) {
    out.fed_test = evaluate(config.model, out.federated_model, prepared.test);
  }

  double central_wall = 0.0;
  if (options.with_centralized) {
    const TrainingConfig central_cfg =
        config.centralized.value_or(config.workers.front());
    const auto central_start = std::chrono::steady_clock::now();
    out.central = run_centralized(config.model, prepared.train_pool,
                                  central_cfg, config.master.global_epochs,
                                  config.master.seed);
    central_wall = wall_seconds(central_start);
    out.central_train =
        evaluate(config.model, out.central->params, prepared.train_pool);
    if (prepared.test.sample_count() > 0) {
      out.central_test =
          evaluate(config.model, out.central->params, prepared.test);
    }
    const Metrics& fed_m =
        out.fed_test.has_value() ? *out.fed_test : out.fed_train;
    const Metrics& cen_m =
        out.central_test.has_value() ? *out.central_test : *out.central_train;
    if (fed_m.accuracy.has_value() && cen_m.accuracy.has_value() &&
        *cen_m.accuracy != 0.0) {
      out.accuracy_gap = approximation_gap(*fed_m.accuracy, *cen_m.accuracy);
    }
    if (cen_m.loss != 0.0) {
      out.loss_gap = (fed_m.loss - cen_m.loss) / cen_m.loss;
    }
  }

  const std::size_t central_epochs =
      options.central_epochs.value_or(config.master.global_epochs);
  out.timing = simulate_timing(out.shard_sizes, central_epochs,
                               config.master.global_epochs, config.sim_time);
  out.speedup_value = speedup(out.timing);

  json report;
  report["schema_version"] = 1;
  report["config"] = run_config_to_json(config);
  json dataset;
  dataset["train_samples"] = prepared.train_pool.sample_count();
  dataset["test_samples"] = prepared.test.sample_count();
  dataset["shard_sizes"] = out.shard_sizes;
  report["dataset"] = dataset;

  const auto bytes = account_transcript(out.transcript, config.comm_width_bits);
  json epochs = json::array();
  std::uint64_t data_plane_total = 0;
  std::uint64_t control_total = 0;
  for (const EpochRecord& e : out.epochs) {
    json je;
    je["epoch"] = e.epoch;
    json costs = json::object();
    for (const auto& [id, c] : e.costs) costs[std::to_string(id)] = c;
    je["costs"] = costs;
    json scores = json::object();
    for (const auto& [id, g] : e.goodness) {
      // +inf (zero first-epoch cost) is not representable in JSON numbers.
      if (std::isinf(g)) {
        scores[std::to_string(id)] = "inf";
      } else {
        scores[std::to_string(id)] = g;
      }
    }
    je["goodness"] = scores;
    je["pilot"] = e.pilot;
    const auto it = bytes.find(e.epoch);
    if (it != bytes.end()) {
      je["model_bytes"] = it->second.model_bytes;
      je["ternary_bytes"] = it->second.ternary_bytes;
      je["control_bytes"] = it->second.control_bytes;
      data_plane_total += it->second.data_plane();
      control_total += it->second.control_bytes;
    }
    epochs.push_back(je);
  }
  report["epochs"] = epochs;
  const auto session = bytes.find(0);
  if (session != bytes.end()) control_total += session->second.control_bytes;
  json totals;
  totals["data_plane_bytes"] = data_plane_total;
  totals["control_plane_bytes"] = control_total;
  totals["comm_fedf_exact_bytes_per_epoch"] = comm_fedf_exact_bytes(
      param_count(config.model), config.comm_width_bits,
      prepared.workers.size());
  report["totals"] = totals;

  json final_section;
  final_section["federated"] = {{"train", metrics_to_json(out.fed_train)}};
  if (out.fed_test.has_value()) {
    final_section["federated"]["test"] = metrics_to_json(*out.fed_test);
  }
  if (out.central.has_value()) {
    final_section["centralized"] = {
        {"train", metrics_to_json(*out.central_train)}};
    if (out.central_test.has_value()) {
      final_section["centralized"]["test"] = metrics_to_json(*out.central_test);
    }
  }
  if (out.accuracy_gap.has_value()) {
    final_section["approximation_gap_accuracy"] = *out.accuracy_gap;
  }
  if (out.loss_gap.has_value()) {
    final_section["approximation_gap_loss"] = *out.loss_gap;
  }
  report["final"] = final_section;

  json timing;
  timing["simulated"] = {{"centralized_total", out.timing.centralized_total},
                         {"federated_total", out.timing.federated_total},
                         {"federated_epoch", out.timing.federated_epoch},
                         {"speedup", out.speedup_value}};
  report["timing"] = timing;

  json env;
  env["started_at_utc"] = utc_timestamp();
  env["wall_seconds_federated"] = fed_wall;
  env["wall_seconds_centralized"] = central_wall;
  report["env"] = env;
  out.report = std::move(report);
}

}  // namespace

PreparedData prepare_data(const RunConfig& config) {
  PreparedData prepared;
  DataShard full = build_full_dataset(config, prepared.manifest);

  if (full.feature_dim != config.model.input_dim) {
    throw ValidationError("dataset feature dim " +
                          std::to_string(full.feature_dim) +
                          " does not match model.input_dim " +
                          std::to_string(config.model.input_dim));
  }
  if (full.target_dim != target_width(config.model)) {
    throw ValidationError("dataset target dim " +
                          std::to_string(full.target_dim) +
                          " does not match the model's expected width " +
                          std::to_string(target_width(config.model)));
  }

  auto [train_pool, test] =
      holdout_split(full, config.test_fraction,
                    derive_seed(config.split.seed, kHoldoutStream));
  prepared.train_pool = std::move(train_pool);
  prepared.test = std::move(test);

  std::vector<DataShard> shards = split(prepared.train_pool, config.split);
  prepared.workers.reserve(shards.size());
  for (std::size_t k = 0; k < shards.size(); ++k) {
    const std::string path = "workers[" + std::to_string(k) + "]";
    if (config.workers[k].batch_size > shards[k].sample_count()) {
      throw ValidationError(
          "config: " + path + ".batch_size " +
          std::to_string(config.workers[k].batch_size) +
          " exceeds shard size " + std::to_string(shards[k].sample_count()));
    }
    WorkerSetup setup;
    setup.profile.worker_id = static_cast<WorkerId>(k + 1);
    setup.profile.data_size = shards[k].sample_count();
    setup.profile.training = config.workers[k];
    setup.shard = std::move(shards[k]);
    prepared.shard_sizes.push_back(setup.profile.data_size);
    prepared.workers.push_back(std::move(setup));
  }
  return prepared;
}

RunOutput execute_run(const RunConfig& config, const RunOptions& options) {
  PreparedData prepared = prepare_data(config);

  const auto fed_start = std::chrono::steady_clock::now();
  FederatedRunResult fed;
  if (config.transport.mode == TransportConfig::Mode::kSim) {
    fed = run_federated_sim(config.model, config.master, prepared.workers,
                            config.transport.timeout_ms);
  } else {
    fed = run_federated_tcp(config.model, config.master, prepared.workers,
                            config.transport.host, config.transport.port,
                            config.transport.timeout_ms);
  }
  const double fed_wall = wall_seconds(fed_start);

  RunOutput out;
  out.federated_model = std::move(fed.final_model);
  out.epochs = std::move(fed.epochs);
  out.transcript = std::move(fed.transcript);
  finalize_run(config, prepared, options, fed_wall, out);
  return out;
}

void run_worker_process(const RunConfig& config, WorkerId worker_id) {
  if (worker_id == 0 || worker_id > config.workers.size()) {
    throw ValidationError("worker id must be in [1, " +
                          std::to_string(config.workers.size()) + "]");
  }
  if (config.transport.mode != TransportConfig::Mode::kTcp) {
    throw ValidationError("worker role requires transport.mode = tcp");
  }
  if (config.transport.port == 0) {
    throw ValidationError("worker role requires an explicit transport.port");
  }
  PreparedData prepared = prepare_data(config);
  const WorkerSetup& setup = prepared.workers[worker_id - 1];
  auto conn = tcp_connect(config.transport.host, config.transport.port,
                          config.transport.timeout_ms);
  worker_loop(*conn, setup.profile, setup.shard);
}

RunOutput run_master_process(const RunConfig& config) {
  if (config.transport.mode != TransportConfig::Mode::kTcp) {
    throw ValidationError("master role requires transport.mode = tcp");
  }
  if (config.transport.port == 0) {
    throw ValidationError("master role requires an explicit transport.port");
  }
  PreparedData prepared = prepare_data(config);

  const auto fed_start = std::chrono::steady_clock::now();
  TcpListener listener(config.transport.host, config.transport.port);
  std::vector<std::unique_ptr<Connection>> conns;
  for (std::size_t k = 0; k < prepared.workers.size(); ++k) {
    conns.push_back(listener.accept(config.transport.timeout_ms));
  }
  Transcript transcript;
  std::vector<Connection*> raw;
  raw.reserve(conns.size());
  for (auto& c : conns) raw.push_back(c.get());
  const std::vector<RegisteredWorker> workers =
      master_register_workers(raw, config.model, config.master, transcript);
  MasterRunResult run =
      run_master(workers, config.model, config.master, transcript);

  RunOutput out;
  out.federated_model = std::move(run.final_model);
  out.epochs = std::move(run.epochs);
  out.transcript = transcript.snapshot();
  finalize_run(config, prepared, RunOptions{}, wall_seconds(fed_start), out);
  return out;
}

std::string write_run_outputs(const RunConfig& config, const RunOutput& output,
                              const std::optional<SyntheticManifest>& manifest) {
  namespace fs = std::filesystem;
  const std::string base = config.output_dir + "/" + utc_timestamp() +
                           "-seed" + std::to_string(config.master.seed);
  std::string dir = base;
  for (int k = 2; fs::exists(dir); ++k) {
    dir = base + "-" + std::to_string(k);
  }
  fs::create_directories(dir);

  {
    std::ofstream out(dir + "/report.json");
    if (!out) throw ValidationError("cannot write " + dir + "/report.json");
    out << output.report.dump(2) << '\n';
  }
  write_transcript_jsonl(dir + "/transcript.jsonl", output.transcript);
  if (manifest.has_value()) {
    json j;
    j["kind"] = synthetic_kind_name(manifest->kind);
    j["n"] = manifest->n;
    j["dim"] = manifest->dim;
    j["noise_sigma"] = manifest->noise_sigma;
    j["seed"] = manifest->seed;
    j["true_weights"] = manifest->true_weights;
    j["true_bias"] = manifest->true_bias;
    j["blob_centers"] = manifest->blob_centers;
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw ValidationError("cannot write " + dir + "/manifest.json");
    out << j.dump(2) << '\n';
  }
  return dir;
}

}  // namespace fedf
