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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedf/experiment.hpp"
#include "fedf/session.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using fedf::DataShard;
using fedf::FederatedRunResult;
using fedf::MasterConfig;
using fedf::ModelSpec;
using fedf::WorkerSetup;

namespace {

ModelSpec linreg(std::size_t in) {
  ModelSpec spec;
  spec.kind = fedf::ModelKind::kLinearRegression;
  spec.input_dim = in;
  spec.output_dim = 1;
  spec.loss = fedf::LossKind::kMse;
  return spec;
}

WorkerSetup make_worker(fedf::WorkerId id, DataShard shard, double lr,
                        std::size_t batch, std::uint64_t seed) {
  WorkerSetup w;
  w.profile.worker_id = id;
  w.profile.data_size = shard.sample_count();
  w.profile.training.learning_rate = lr;
  w.profile.training.batch_size = batch;
  w.profile.training.local_epochs = 1;
  w.profile.training.shuffle_seed = seed;
  w.shard = std::move(shard);
  return w;
}

std::vector<WorkerSetup> three_workers(std::uint64_t data_seed) {
  const auto synth =
      fedf::generate_synthetic(fedf::SyntheticKind::kLinear, 300, 4, 0.1,
                               data_seed);
  fedf::SplitSpec split;
  split.n_parts = 3;
  split.min_fraction = 0.2;
  split.seed = data_seed + 1;
  auto shards = fedf::split(synth.shard, split);
  std::vector<WorkerSetup> workers;
  workers.push_back(make_worker(1, std::move(shards[0]), 0.05, 16, 11));
  workers.push_back(make_worker(2, std::move(shards[1]), 0.04, 12, 12));
  workers.push_back(make_worker(3, std::move(shards[2]), 0.05, 20, 13));
  return workers;
}

bool same_transcript_modulo_time(const std::vector<fedf::TranscriptEntry>& a,
                                 const std::vector<fedf::TranscriptEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seq != b[i].seq || a[i].sender != b[i].sender ||
        a[i].receiver != b[i].receiver || a[i].kind != b[i].kind ||
        a[i].epoch != b[i].epoch || a[i].payload != b[i].payload) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("single worker: the global model is the worker's local model") {
  const auto synth =
      fedf::generate_synthetic(fedf::SyntheticKind::kLinear, 120, 4, 0.1, 41);
  MasterConfig cfg;
  cfg.global_epochs = 3;
  cfg.seed = 5;
  std::vector<WorkerSetup> workers;
  workers.push_back(make_worker(1, synth.shard, 0.05, 15, 21));
  const FederatedRunResult fed =
      fedf::run_federated_sim(linreg(4), cfg, workers);

  // Replaying the worker's exact training steps must land on the same model.
  const auto central = fedf::run_centralized(
      linreg(4), synth.shard, workers[0].profile.training, 3, 5);
  CHECK(fed.final_model.values == central.params.values);
  CHECK(fed.epochs.size() == 3);
  for (const auto& e : fed.epochs) {
    CHECK(e.pilot == 1);
    CHECK(e.costs.size() == 1);
  }
}

TEST_CASE("three workers: determinism across repeated sim runs") {
  MasterConfig cfg;
  cfg.global_epochs = 5;
  cfg.seed = 17;
  const FederatedRunResult a =
      fedf::run_federated_sim(linreg(4), cfg, three_workers(101));
  const FederatedRunResult b =
      fedf::run_federated_sim(linreg(4), cfg, three_workers(101));
  CHECK(a.final_model.values == b.final_model.values);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].pilot == b.epochs[i].pilot);
    CHECK(a.epochs[i].costs == b.epochs[i].costs);
    CHECK(a.epochs[i].goodness == b.epochs[i].goodness);
  }
  CHECK(same_transcript_modulo_time(a.transcript, b.transcript));
}

TEST_CASE("three workers on convex least squares approach the optimum") {
  const auto synth =
      fedf::generate_synthetic(fedf::SyntheticKind::kLinear, 600, 4, 0.1, 61);
  fedf::SplitSpec split;
  split.n_parts = 3;
  split.min_fraction = 0.25;
  split.seed = 62;
  auto shards = fedf::split(synth.shard, split);
  std::vector<WorkerSetup> workers;
  for (std::size_t k = 0; k < 3; ++k) {
    workers.push_back(make_worker(static_cast<fedf::WorkerId>(k + 1),
                                  std::move(shards[k]), 0.05, 24, 70 + k));
  }
  MasterConfig cfg;
  cfg.global_epochs = 80;
  cfg.seed = 63;
  const FederatedRunResult fed =
      fedf::run_federated_sim(linreg(4), cfg, workers);
  const auto fit = oracles::least_squares(synth.shard);
  const double final_loss =
      fedf::loss(linreg(4), fed.final_model, synth.shard);
  CHECK(final_loss <= 1.05 * fit.mse);
}

TEST_CASE("identical shards and configs make the smallest id pilot forever") {
  const auto synth =
      fedf::generate_synthetic(fedf::SyntheticKind::kLinear, 90, 4, 0.1, 71);
  std::vector<WorkerSetup> workers;
  for (fedf::WorkerId id : {1u, 2u, 3u}) {
    workers.push_back(make_worker(id, synth.shard, 0.05, 15, 99));
  }
  MasterConfig cfg;
  cfg.global_epochs = 4;
  cfg.seed = 72;
  const FederatedRunResult fed =
      fedf::run_federated_sim(linreg(4), cfg, workers);
  for (const auto& e : fed.epochs) {
    CHECK(e.pilot == 1);
  }
}

TEST_CASE("epoch records: one pilot and a full cost map per epoch") {
  MasterConfig cfg;
  cfg.global_epochs = 6;
  cfg.seed = 73;
  const FederatedRunResult fed =
      fedf::run_federated_sim(linreg(4), cfg, three_workers(102));
  CHECK(fed.epochs.size() == 6);
  for (const auto& e : fed.epochs) {
    CHECK(e.costs.size() == 3);
    CHECK(e.goodness.size() == 3);
    CHECK((e.pilot >= 1 && e.pilot <= 3));
  }
}

TEST_CASE("sim and tcp transports produce bit-identical runs") {
  for (std::uint64_t seed : {201ull, 202ull, 203ull}) {
    MasterConfig cfg;
    cfg.global_epochs = 4;
    cfg.seed = seed;
    const FederatedRunResult sim =
        fedf::run_federated_sim(linreg(4), cfg, three_workers(seed));
    const FederatedRunResult tcp =
        fedf::run_federated_tcp(linreg(4), cfg, three_workers(seed));
    CHECK(sim.final_model.values == tcp.final_model.values);
    CHECK(same_transcript_modulo_time(sim.transcript, tcp.transcript));
  }
}

TEST_CASE("wide model crossing the parallel grain stays deterministic") {
  // M = 4097 puts the per-parameter kernels on the OpenMP path while eight
  // worker threads train concurrently.
  const auto synth =
      fedf::generate_synthetic(fedf::SyntheticKind::kLinear, 64, 4096, 0.1, 88);
  fedf::SplitSpec split;
  split.n_parts = 8;
  split.min_fraction = 0.05;
  split.seed = 89;
  auto shards = fedf::split(synth.shard, split);
  auto build = [&] {
    std::vector<WorkerSetup> workers;
    for (std::size_t k = 0; k < 8; ++k) {
      workers.push_back(make_worker(static_cast<fedf::WorkerId>(k + 1),
                                    shards[k], 0.01, 2, 90 + k));
    }
    return workers;
  };
  MasterConfig cfg;
  cfg.global_epochs = 3;
  cfg.seed = 91;
  const ModelSpec spec = linreg(4096);
  const FederatedRunResult a = fedf::run_federated_sim(spec, cfg, build());
  const FederatedRunResult b = fedf::run_federated_sim(spec, cfg, build());
  CHECK(a.final_model.size() == 4097);
  CHECK(a.final_model.values == b.final_model.values);
  const auto bytes = fedf::account_transcript(a.transcript, 32);
  CHECK(bytes.at(1).data_plane() ==
        fedf::comm_fedf_exact_bytes(4097, 32, 8));
}

TEST_CASE("worker failure aborts the run with an epoch-level error") {
  MasterConfig cfg;
  cfg.global_epochs = 2;
  cfg.seed = 74;
  std::vector<fedf::WorkerTask> tasks;
  auto workers = three_workers(103);
  // Two honest workers, one that registers and then disappears.
  for (std::size_t k = 0; k < 2; ++k) {
    tasks.push_back([w = workers[k]](fedf::Connection& conn) {
      fedf::worker_loop(conn, w.profile, w.shard);
    });
  }
  tasks.push_back([w = workers[2]](fedf::Connection& conn) {
    fedf::RegisterRequest req;
    req.worker_id = w.profile.worker_id;
    req.data_size = w.profile.data_size;
    conn.send(fedf::make_register_request(req));
    (void)conn.recv();  // REGISTER reply
    (void)conn.recv();  // START_EPOCH, then quit without a cost
  });
  CHECK_THROWS_WITH_AS(
      fedf::run_federated_sim_tasks(linreg(4), cfg, tasks, 500),
      doctest::Contains("epoch 1"), fedf::ProtocolError);
}

TEST_CASE("protocol version mismatch is rejected at registration") {
  MasterConfig cfg;
  cfg.global_epochs = 1;
  cfg.seed = 75;
  auto workers = three_workers(104);
  std::vector<fedf::WorkerTask> tasks;
  tasks.push_back([w = workers[0]](fedf::Connection& conn) {
    fedf::RegisterRequest req;
    req.protocol_version = 999;
    req.worker_id = w.profile.worker_id;
    req.data_size = w.profile.data_size;
    conn.send(fedf::make_register_request(req));
    try {
      (void)conn.recv();
    } catch (const fedf::Error&) {
    }
  });
  CHECK_THROWS_WITH_AS(fedf::run_federated_sim_tasks(linreg(4), cfg, tasks, 500),
                       doctest::Contains("protocol version"),
                       fedf::ProtocolError);
}
