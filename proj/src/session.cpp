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

#include "fedf/session.hpp"

#include <exception>
#include <memory>
#include <thread>

namespace fedf {

namespace {

struct WorkerThread {
  std::thread thread;
  std::string error;
};

FederatedRunResult run_with_connections(
    const ModelSpec& spec, const MasterConfig& cfg,
    std::vector<std::unique_ptr<Connection>> master_side,
    std::vector<WorkerThread>& threads) {
  Transcript transcript;
  std::exception_ptr master_error;
  FederatedRunResult result;
  try {
    std::vector<Connection*> conns;
    conns.reserve(master_side.size());
    for (auto& c : master_side) conns.push_back(c.get());
    const std::vector<RegisteredWorker> workers =
        master_register_workers(conns, spec, cfg, transcript);
    MasterRunResult run = run_master(workers, spec, cfg, transcript);
    result.final_model = std::move(run.final_model);
    result.epochs = std::move(run.epochs);
  } catch (...) {
    master_error = std::current_exception();
    // Unblock workers still waiting on the master.
    for (auto& c : master_side) c->close();
  }
  for (WorkerThread& wt : threads) {
    if (wt.thread.joinable()) wt.thread.join();
  }
  if (master_error) std::rethrow_exception(master_error);
  for (const WorkerThread& wt : threads) {
    if (!wt.error.empty()) {
      throw ProtocolError("worker task failed: " + wt.error);
    }
  }
  result.transcript = transcript.snapshot();
  return result;
}

std::vector<WorkerTask> default_tasks(const std::vector<WorkerSetup>& workers) {
  std::vector<WorkerTask> tasks;
  tasks.reserve(workers.size());
  for (const WorkerSetup& w : workers) {
    tasks.push_back([profile = w.profile, shard = w.shard](Connection& conn) {
      worker_loop(conn, profile, shard);
    });
  }
  return tasks;
}

void launch(WorkerThread& slot, WorkerTask task,
            std::shared_ptr<Connection> conn) {
  slot.thread = std::thread([&slot, task = std::move(task),
                             conn = std::move(conn)]() {
    try {
      task(*conn);
    } catch (const std::exception& e) {
      slot.error = e.what();
      conn->close();
    }
  });
}

}  // namespace

FederatedRunResult run_federated_sim_tasks(const ModelSpec& spec,
                                           const MasterConfig& cfg,
                                           const std::vector<WorkerTask>& tasks,
                                           int timeout_ms) {
  std::vector<std::unique_ptr<Connection>> master_side;
  std::vector<WorkerThread> threads(tasks.size());
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    auto [master_end, worker_end] = make_in_process_link(timeout_ms);
    master_side.push_back(std::move(master_end));
    launch(threads[k], tasks[k],
           std::shared_ptr<Connection>(std::move(worker_end)));
  }
  return run_with_connections(spec, cfg, std::move(master_side), threads);
}

FederatedRunResult run_federated_sim(const ModelSpec& spec,
                                     const MasterConfig& cfg,
                                     const std::vector<WorkerSetup>& workers,
                                     int timeout_ms) {
  return run_federated_sim_tasks(spec, cfg, default_tasks(workers), timeout_ms);
}

FederatedRunResult run_federated_tcp(const ModelSpec& spec,
                                     const MasterConfig& cfg,
                                     const std::vector<WorkerSetup>& workers,
                                     const std::string& host,
                                     std::uint16_t port, int timeout_ms) {
  TcpListener listener(host, port);
  const std::uint16_t bound = listener.port();
  std::vector<WorkerTask> tasks = default_tasks(workers);
  std::vector<WorkerThread> threads(tasks.size());
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    launch(threads[k], tasks[k],
           std::shared_ptr<Connection>(tcp_connect(host, bound, timeout_ms)));
  }
  std::vector<std::unique_ptr<Connection>> master_side;
  master_side.reserve(workers.size());
  try {
    for (std::size_t k = 0; k < workers.size(); ++k) {
      master_side.push_back(listener.accept(timeout_ms));
    }
  } catch (...) {
    // Workers waiting on a reply hit their own timeout and exit.
    for (WorkerThread& wt : threads) {
      if (wt.thread.joinable()) wt.thread.join();
    }
    throw;
  }
  return run_with_connections(spec, cfg, std::move(master_side), threads);
}

}  // namespace fedf
