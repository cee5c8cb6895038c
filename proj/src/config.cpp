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

#include "fedf/config.hpp"

#include <fstream>
#include <limits>

namespace fedf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ValidationError("config: " + path + ": " + why);
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(path, "wrong type");
  }
}

template <typename T>
T req(const json& j, const std::string& path, const char* key) {
  return get_as<T>(member(j, path, key), path + "." + key);
}

template <typename T>
T opt(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  return get_as<T>(*it, path + "." + key);
}

ModelKind parse_model_kind(const std::string& s, const std::string& path) {
  if (s == "linear-regression") return ModelKind::kLinearRegression;
  if (s == "logistic-regression") return ModelKind::kLogisticRegression;
  if (s == "mlp-1h") return ModelKind::kMlp1h;
  fail(path, "unknown model kind '" + s + "'");
}

LossKind parse_loss(const std::string& s, const std::string& path) {
  if (s == "mse") return LossKind::kMse;
  if (s == "cross-entropy") return LossKind::kCrossEntropy;
  fail(path, "unknown loss '" + s + "'");
}

OptimizerKind parse_optimizer(const std::string& s, const std::string& path) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "sgd-momentum") return OptimizerKind::kSgdMomentum;
  fail(path, "unknown optimizer '" + s + "'");
}

SyntheticKind parse_synthetic_kind(const std::string& s,
                                   const std::string& path) {
  if (s == "linear") return SyntheticKind::kLinear;
  if (s == "logistic-blobs") return SyntheticKind::kLogisticBlobs;
  if (s == "quadratic") return SyntheticKind::kQuadratic;
  fail(path, "unknown synthetic kind '" + s + "'");
}

TrainingConfig parse_training(const json& j, const std::string& path) {
  TrainingConfig cfg;
  cfg.learning_rate = req<double>(j, path, "learning_rate");
  cfg.batch_size = req<std::size_t>(j, path, "batch_size");
  cfg.local_epochs = req<std::size_t>(j, path, "local_epochs");
  cfg.shuffle_seed = req<std::uint64_t>(j, path, "shuffle_seed");
  cfg.optimizer =
      parse_optimizer(opt<std::string>(j, path, "optimizer", "sgd"),
                      path + ".optimizer");
  cfg.momentum = opt<double>(j, path, "momentum", 0.0);
  return cfg;
}

json training_to_json(const TrainingConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"local_epochs", cfg.local_epochs},
          {"shuffle_seed", cfg.shuffle_seed},
          {"optimizer", optimizer_name(cfg.optimizer)},
          {"momentum", cfg.momentum}};
}

}  // namespace

const char* synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kLinear:
      return "linear";
    case SyntheticKind::kLogisticBlobs:
      return "logistic-blobs";
    case SyntheticKind::kQuadratic:
      return "quadratic";
  }
  return "invalid";
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression:
      return "linear-regression";
    case ModelKind::kLogisticRegression:
      return "logistic-regression";
    case ModelKind::kMlp1h:
      return "mlp-1h";
  }
  return "invalid";
}

const char* loss_kind_name(LossKind loss) {
  return loss == LossKind::kMse ? "mse" : "cross-entropy";
}

const char* optimizer_name(OptimizerKind opt) {
  return opt == OptimizerKind::kSgd ? "sgd" : "sgd-momentum";
}

RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig config;

  const json& model = member(j, "config", "model");
  config.model.kind = parse_model_kind(
      req<std::string>(model, "model", "kind"), "model.kind");
  config.model.input_dim = req<std::size_t>(model, "model", "input_dim");
  config.model.output_dim = req<std::size_t>(model, "model", "output_dim");
  config.model.hidden_dim = opt<std::size_t>(model, "model", "hidden_dim", 0);
  config.model.loss =
      parse_loss(req<std::string>(model, "model", "loss"), "model.loss");
  try {
    validate_spec(config.model);
  } catch (const ValidationError& e) {
    fail("model", e.what());
  }

  const json& dataset = member(j, "config", "dataset");
  const std::string source = req<std::string>(dataset, "dataset", "source");
  if (source == "synthetic") {
    config.dataset.source = DatasetSource::Kind::kSynthetic;
    config.dataset.synthetic_kind = parse_synthetic_kind(
        req<std::string>(dataset, "dataset", "kind"), "dataset.kind");
    config.dataset.n = req<std::size_t>(dataset, "dataset", "n");
    config.dataset.dim = req<std::size_t>(dataset, "dataset", "dim");
    config.dataset.noise_sigma = req<double>(dataset, "dataset", "noise_sigma");
    config.dataset.seed = req<std::uint64_t>(dataset, "dataset", "seed");
    if (config.dataset.dim != config.model.input_dim) {
      fail("dataset.dim", "must equal model.input_dim");
    }
  } else if (source == "csv") {
    config.dataset.source = DatasetSource::Kind::kCsv;
    config.dataset.path = req<std::string>(dataset, "dataset", "path");
    config.dataset.schema.feature_cols =
        req<std::size_t>(dataset, "dataset", "feature_cols");
    config.dataset.schema.target_cols =
        req<std::size_t>(dataset, "dataset", "target_cols");
    config.dataset.schema.has_header =
        opt<bool>(dataset, "dataset", "has_header", false);
  } else {
    fail("dataset.source", "must be 'synthetic' or 'csv'");
  }

  config.test_fraction = opt<double>(j, "config", "test_fraction", 0.2);
  if (!(config.test_fraction >= 0.0 && config.test_fraction < 1.0)) {
    fail("test_fraction", "must be in [0, 1)");
  }

  const json& split = member(j, "config", "split");
  config.split.n_parts = req<std::size_t>(split, "split", "parts");
  config.split.min_fraction = req<double>(split, "split", "min_fraction");
  config.split.seed = req<std::uint64_t>(split, "split", "seed");
  if (config.split.n_parts == 0) fail("split.parts", "must be >= 1");

  const json& workers = member(j, "config", "workers");
  if (!workers.is_array() || workers.empty()) {
    fail("workers", "must be a non-empty array");
  }
  for (std::size_t k = 0; k < workers.size(); ++k) {
    const std::string path = "workers[" + std::to_string(k) + "]";
    config.workers.push_back(parse_training(workers[k], path));
    try {
      validate_training_config(config.workers.back(),
                               std::numeric_limits<std::size_t>::max());
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }
  if (config.workers.size() != config.split.n_parts) {
    fail("workers", "entry count " + std::to_string(config.workers.size()) +
                        " must equal split.parts " +
                        std::to_string(config.split.n_parts));
  }

  const json& master = member(j, "config", "master");
  config.master.alpha0 = req<double>(master, "master", "alpha0");
  config.master.beta = req<double>(master, "master", "beta");
  config.master.global_epochs =
      req<std::size_t>(master, "master", "global_epochs");
  config.master.seed = req<std::uint64_t>(master, "master", "seed");
  if (master.contains("per_worker_beta")) {
    const json& overrides = master["per_worker_beta"];
    if (!overrides.is_object()) fail("master.per_worker_beta", "expected map");
    for (const auto& [key, value] : overrides.items()) {
      config.master.per_worker_beta[static_cast<WorkerId>(
          std::stoul(key))] = get_as<double>(value,
                                             "master.per_worker_beta." + key);
    }
  }
  try {
    validate_master_config(config.master);
  } catch (const ValidationError& e) {
    fail("master", e.what());
  }

  if (j.contains("centralized")) {
    config.centralized = parse_training(j["centralized"], "centralized");
  }

  if (j.contains("transport")) {
    const json& transport = j["transport"];
    const std::string mode = req<std::string>(transport, "transport", "mode");
    if (mode == "sim") {
      config.transport.mode = TransportConfig::Mode::kSim;
    } else if (mode == "tcp") {
      config.transport.mode = TransportConfig::Mode::kTcp;
      config.transport.host =
          opt<std::string>(transport, "transport", "host", "127.0.0.1");
      config.transport.port = static_cast<std::uint16_t>(
          opt<unsigned>(transport, "transport", "port", 0));
    } else {
      fail("transport.mode", "must be 'sim' or 'tcp'");
    }
    config.transport.timeout_ms =
        opt<int>(transport, "transport", "timeout_ms", kDefaultTimeoutMs);
    if (config.transport.timeout_ms <= 0) {
      fail("transport.timeout_ms", "must be positive");
    }
  }

  config.comm_width_bits = opt<unsigned>(j, "config", "comm_width_bits", 32);
  if (config.comm_width_bits != 32 && config.comm_width_bits != 64) {
    fail("comm_width_bits", "must be 32 or 64");
  }

  if (j.contains("sim_time")) {
    const json& st = j["sim_time"];
    config.sim_time.per_sample_cost =
        opt<double>(st, "sim_time", "per_sample_cost", 1.0);
    config.sim_time.epoch_overhead =
        opt<double>(st, "sim_time", "epoch_overhead", 0.0);
    if (!(config.sim_time.per_sample_cost > 0.0) ||
        config.sim_time.epoch_overhead < 0.0) {
      fail("sim_time", "per_sample_cost must be > 0 and epoch_overhead >= 0");
    }
  }

  config.output_dir = opt<std::string>(j, "config", "output_dir", "runs");
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config: " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  json j;
  j["model"] = {{"kind", model_kind_name(config.model.kind)},
                {"input_dim", config.model.input_dim},
                {"output_dim", config.model.output_dim},
                {"hidden_dim", config.model.hidden_dim},
                {"loss", loss_kind_name(config.model.loss)}};
  if (config.dataset.source == DatasetSource::Kind::kSynthetic) {
    j["dataset"] = {{"source", "synthetic"},
                    {"kind", synthetic_kind_name(config.dataset.synthetic_kind)},
                    {"n", config.dataset.n},
                    {"dim", config.dataset.dim},
                    {"noise_sigma", config.dataset.noise_sigma},
                    {"seed", config.dataset.seed}};
  } else {
    j["dataset"] = {{"source", "csv"},
                    {"path", config.dataset.path},
                    {"feature_cols", config.dataset.schema.feature_cols},
                    {"target_cols", config.dataset.schema.target_cols},
                    {"has_header", config.dataset.schema.has_header}};
  }
  j["test_fraction"] = config.test_fraction;
  j["split"] = {{"parts", config.split.n_parts},
                {"min_fraction", config.split.min_fraction},
                {"seed", config.split.seed}};
  json workers = json::array();
  for (const TrainingConfig& w : config.workers) {
    workers.push_back(training_to_json(w));
  }
  j["workers"] = workers;
  json master = {{"alpha0", config.master.alpha0},
                 {"beta", config.master.beta},
                 {"global_epochs", config.master.global_epochs},
                 {"seed", config.master.seed}};
  if (!config.master.per_worker_beta.empty()) {
    json overrides = json::object();
    for (const auto& [id, b] : config.master.per_worker_beta) {
      overrides[std::to_string(id)] = b;
    }
    master["per_worker_beta"] = overrides;
  }
  j["master"] = master;
  if (config.centralized.has_value()) {
    j["centralized"] = training_to_json(*config.centralized);
  }
  j["transport"] = {
      {"mode",
       config.transport.mode == TransportConfig::Mode::kSim ? "sim" : "tcp"},
      {"host", config.transport.host},
      {"port", config.transport.port},
      {"timeout_ms", config.transport.timeout_ms}};
  j["comm_width_bits"] = config.comm_width_bits;
  j["sim_time"] = {{"per_sample_cost", config.sim_time.per_sample_cost},
                   {"epoch_overhead", config.sim_time.epoch_overhead}};
  j["output_dir"] = config.output_dir;
  return j;
}

}  // namespace fedf
