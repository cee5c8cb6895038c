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

#include "fedf/master.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fedf/checkpoint.hpp"
#include "fedf/parallel.hpp"

namespace fedf {

namespace {

struct NonPilotTerm {
  double coeff = 0.0;  // p_k (t = 1) or p_k * beta_k (t > 1)
  const std::int8_t* trits = nullptr;
};

void check_proportions(const std::map<WorkerId, double>& proportions) {
  if (proportions.empty()) {
    throw ValidationError("update_global: empty proportions");
  }
  double sum = 0.0;
  for (const auto& [id, p] : proportions) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw ValidationError("update_global: proportion of worker " +
                            std::to_string(id) + " must be positive");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("update_global: proportions sum to " +
                          std::to_string(sum) + ", expected 1");
  }
}

Message recv_from(const RegisteredWorker& w, MessageKind expected,
                  std::uint64_t epoch) {
  Message msg;
  try {
    msg = w.conn->recv();
  } catch (const Error& e) {
    throw ProtocolError("epoch " + std::to_string(epoch) + ": worker " +
                        std::to_string(w.id) + ": " + e.what());
  }
  if (msg.kind != expected || msg.epoch != epoch) {
    throw ProtocolError("epoch " + std::to_string(epoch) + ": worker " +
                        std::to_string(w.id) + ": expected " +
                        message_kind_name(expected) + ", got " +
                        message_kind_name(msg.kind) + " for epoch " +
                        std::to_string(msg.epoch));
  }
  return msg;
}

}  // namespace

void validate_master_config(const MasterConfig& cfg) {
  if (!(cfg.alpha0 > 0.0) || !std::isfinite(cfg.alpha0)) {
    throw ValidationError("alpha0 must be positive and finite");
  }
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
    throw ValidationError("beta must be in (0, 1)");
  }
  for (const auto& [id, b] : cfg.per_worker_beta) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ValidationError("beta for worker " + std::to_string(id) +
                            " must be in (0, 1)");
    }
  }
  if (cfg.global_epochs == 0) {
    throw ValidationError("global_epochs must be >= 1");
  }
}

double beta_for(const MasterConfig& cfg, WorkerId id) {
  const auto it = cfg.per_worker_beta.find(id);
  return it == cfg.per_worker_beta.end() ? cfg.beta : it->second;
}

double goodness(const GoodnessInput& input, std::size_t t) {
  if (t == 0) throw ValidationError("goodness: epochs are 1-based");
  if (!std::isfinite(input.cost_t)) {
    throw ValidationError("goodness: non-finite cost for worker " +
                          std::to_string(input.worker_id));
  }
  if (input.data_size == 0) {
    throw ValidationError("goodness: data size of worker " +
                          std::to_string(input.worker_id) + " must be positive");
  }
  const double s = static_cast<double>(input.data_size);
  if (t == 1) {
    if (input.cost_t == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    return s / input.cost_t;
  }
  if (!input.cost_prev.has_value()) {
    throw ValidationError("goodness: missing previous cost for worker " +
                          std::to_string(input.worker_id) + " at t > 1");
  }
  return s * (*input.cost_prev - input.cost_t);
}

WorkerId select_pilot(const std::map<WorkerId, double>& goodness_values) {
  if (goodness_values.empty()) {
    throw ValidationError("select_pilot: no goodness values");
  }
  WorkerId best_id = 0;
  double best = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& [id, g] : goodness_values) {
    if (std::isnan(g)) {
      throw ValidationError("select_pilot: NaN goodness for worker " +
                            std::to_string(id));
    }
    if (first || g > best) {
      best = g;
      best_id = id;
      first = false;
    }
  }
  return best_id;
}

namespace {

ParameterVector update_global_impl(const MasterState& state,
                                   const ParameterVector& pilot_model,
                                   const std::map<WorkerId, TernaryVector>& ternaries,
                                   const std::map<WorkerId, double>& proportions,
                                   const MasterConfig& cfg, bool parallel) {
  check_proportions(proportions);
  if (proportions.size() != ternaries.size() + 1) {
    throw ValidationError(
        "update_global: ternaries must cover exactly the non-pilot workers");
  }
  const std::size_t m = pilot_model.size();
  const std::size_t t = state.epoch + 1;

  std::vector<NonPilotTerm> terms;
  terms.reserve(ternaries.size());
  for (const auto& [id, tern] : ternaries) {  // std::map: ascending ids
    if (proportions.find(id) == proportions.end()) {
      throw ValidationError("update_global: ternary from unknown worker " +
                            std::to_string(id));
    }
    if (tern.size() != m) {
      throw DimensionError("update_global: ternary of worker " +
                           std::to_string(id) + " has " +
                           std::to_string(tern.size()) + " trits, expected " +
                           std::to_string(m));
    }
    const double p = proportions.at(id);
    terms.push_back({t == 1 ? p : p * beta_for(cfg, id), tern.trits.data()});
  }

  const double* delta_cur = nullptr;
  const double* delta_prev = nullptr;
  if (t > 1 && !terms.empty()) {
    if (state.p_current.size() != m || state.p_prev.size() != m) {
      throw ValidationError(
          "update_global: master history P^{t-1}, P^{t-2} required for t > 1");
    }
    delta_cur = state.p_current.values.data();
    delta_prev = state.p_prev.values.data();
  }

  ParameterVector out;
  out.layout_id = pilot_model.layout_id;
  out.values.resize(m);
  const double* q = pilot_model.values.data();
  double* dst = out.values.data();
  const double alpha0 = cfg.alpha0;
  const NonPilotTerm* tp = terms.data();
  const std::size_t n_terms = terms.size();

  if (t == 1) {
    if (parallel) {
      FEDF_PARALLEL_FOR(m)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_terms; ++k) {
          acc += tp[k].coeff * static_cast<double>(tp[k].trits[i]);
        }
        dst[i] = q[i] - alpha0 * acc;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_terms; ++k) {
          acc += tp[k].coeff * static_cast<double>(tp[k].trits[i]);
        }
        dst[i] = q[i] - alpha0 * acc;
      }
    }
  } else {
    if (parallel) {
      FEDF_PARALLEL_FOR(m)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        const double step =
            n_terms == 0 ? 0.0 : delta_cur[i] - delta_prev[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < n_terms; ++k) {
          acc += tp[k].coeff * static_cast<double>(tp[k].trits[i]) * step;
        }
        dst[i] = q[i] - acc;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        const double step =
            n_terms == 0 ? 0.0 : delta_cur[i] - delta_prev[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < n_terms; ++k) {
          acc += tp[k].coeff * static_cast<double>(tp[k].trits[i]) * step;
        }
        dst[i] = q[i] - acc;
      }
    }
  }
  ensure_finite(out, "update_global");
  return out;
}

}  // namespace

ParameterVector update_global(const MasterState& state,
                              const ParameterVector& pilot_model,
                              const std::map<WorkerId, TernaryVector>& ternaries,
                              const std::map<WorkerId, double>& proportions,
                              const MasterConfig& cfg) {
  return update_global_impl(state, pilot_model, ternaries, proportions, cfg,
                            true);
}

namespace serial {
ParameterVector update_global(const MasterState& state,
                              const ParameterVector& pilot_model,
                              const std::map<WorkerId, TernaryVector>& ternaries,
                              const std::map<WorkerId, double>& proportions,
                              const MasterConfig& cfg) {
  return update_global_impl(state, pilot_model, ternaries, proportions, cfg,
                            false);
}
}  // namespace serial

std::vector<RegisteredWorker> master_register_workers(
    const std::vector<Connection*>& conns, const ModelSpec& spec,
    const MasterConfig& cfg, Transcript& transcript) {
  validate_spec(spec);
  validate_master_config(cfg);
  if (conns.empty()) {
    throw ValidationError("register: at least one worker required");
  }
  struct Pending {
    RegisterRequest req;
    Connection* conn;
    Message raw;
  };
  std::vector<Pending> pending;
  pending.reserve(conns.size());
  for (Connection* conn : conns) {
    Message msg = conn->recv();
    if (msg.kind != MessageKind::kRegister) {
      throw ProtocolError("register: expected REGISTER, got " +
                          std::string(message_kind_name(msg.kind)));
    }
    Pending p;
    p.req = parse_register_request(msg);
    p.conn = conn;
    p.raw = std::move(msg);
    if (p.req.protocol_version != kProtocolVersion) {
      throw ProtocolError("register: worker " + std::to_string(p.req.worker_id) +
                          " speaks protocol version " +
                          std::to_string(p.req.protocol_version) +
                          ", master requires " +
                          std::to_string(kProtocolVersion));
    }
    if (p.req.worker_id == kMasterId) {
      throw ProtocolError("register: worker id 0 is reserved for the master");
    }
    if (p.req.data_size == 0) {
      throw ProtocolError("register: worker " + std::to_string(p.req.worker_id) +
                          " declared an empty dataset");
    }
    pending.push_back(std::move(p));
  }
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) {
              return a.req.worker_id < b.req.worker_id;
            });
  for (std::size_t i = 1; i < pending.size(); ++i) {
    if (pending[i].req.worker_id == pending[i - 1].req.worker_id) {
      throw ProtocolError("register: duplicate worker id " +
                          std::to_string(pending[i].req.worker_id));
    }
  }
  std::vector<RegisteredWorker> workers;
  workers.reserve(pending.size());
  for (const Pending& p : pending) {
    transcript.record(p.req.worker_id, kMasterId, p.raw);
    RegisterReply reply;
    reply.beta = beta_for(cfg, p.req.worker_id);
    reply.spec = spec;
    const Message reply_msg = make_register_reply(reply);
    p.conn->send(reply_msg);
    transcript.record(kMasterId, p.req.worker_id, reply_msg);
    workers.push_back({p.req.worker_id, p.req.data_size, reply.beta, p.conn});
  }
  return workers;
}

MasterRunResult run_master(const std::vector<RegisteredWorker>& workers,
                           const ModelSpec& spec, const MasterConfig& cfg,
                           Transcript& transcript) {
  validate_spec(spec);
  validate_master_config(cfg);
  if (workers.empty()) {
    throw ValidationError("run_master: at least one worker required");
  }

  std::uint64_t total = 0;
  for (const RegisteredWorker& w : workers) total += w.data_size;
  std::map<WorkerId, double> proportions;
  for (const RegisteredWorker& w : workers) {
    proportions[w.id] = static_cast<double>(w.data_size) /
                        static_cast<double>(total);
  }

  MasterState state;
  state.p_current = init_parameters(spec, cfg.seed);
  const std::size_t m = state.p_current.size();

  MasterRunResult result;
  result.epochs.reserve(cfg.global_epochs);

  for (std::size_t t = 1; t <= cfg.global_epochs; ++t) {
    // Broadcast P^{t-1}.
    Message start;
    start.kind = MessageKind::kStartEpoch;
    start.epoch = t;
    start.payload = model_to_bytes(state.p_current);
    for (const RegisteredWorker& w : workers) {
      w.conn->send(start);
      transcript.record(kMasterId, w.id, start);
    }

    // Barrier: one cost per worker.
    std::map<WorkerId, double> costs;
    for (const RegisteredWorker& w : workers) {
      const Message msg = recv_from(w, MessageKind::kCost, t);
      transcript.record(w.id, kMasterId, msg);
      const double c = parse_cost(msg);
      if (!std::isfinite(c)) {
        throw ProtocolError("epoch " + std::to_string(t) + ": worker " +
                            std::to_string(w.id) + " reported non-finite cost");
      }
      costs[w.id] = c;
    }

    std::map<WorkerId, double> scores;
    for (const RegisteredWorker& w : workers) {
      GoodnessInput in;
      in.worker_id = w.id;
      in.cost_t = costs[w.id];
      if (t > 1) in.cost_prev = state.prev_costs.at(w.id);
      in.data_size = w.data_size;
      scores[w.id] = goodness(in, t);
    }
    const WorkerId pilot = select_pilot(scores);

    for (const RegisteredWorker& w : workers) {
      Message cmd;
      cmd.kind = w.id == pilot ? MessageKind::kCmdSendModel
                               : MessageKind::kCmdSendTernary;
      cmd.epoch = t;
      w.conn->send(cmd);
      transcript.record(kMasterId, w.id, cmd);
    }

    ParameterVector pilot_model;
    std::map<WorkerId, TernaryVector> ternaries;
    for (const RegisteredWorker& w : workers) {
      if (w.id == pilot) {
        const Message msg = recv_from(w, MessageKind::kModel, t);
        transcript.record(w.id, kMasterId, msg);
        pilot_model = model_from_bytes(msg.payload.data(), msg.payload.size());
        if (pilot_model.size() != m) {
          throw ProtocolError("epoch " + std::to_string(t) + ": pilot model has " +
                              std::to_string(pilot_model.size()) +
                              " parameters, expected " + std::to_string(m));
        }
      } else {
        const Message msg = recv_from(w, MessageKind::kTernary, t);
        transcript.record(w.id, kMasterId, msg);
        ternaries[w.id] =
            unpack(packed_from_bytes(msg.payload.data(), msg.payload.size()));
      }
    }

    ParameterVector next =
        update_global(state, pilot_model, ternaries, proportions, cfg);

    if (!cfg.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%04zu.fedf", t);
      save_model(cfg.checkpoint_dir + "/" + name, next);
    }

    state.p_prev = std::move(state.p_current);
    state.p_current = std::move(next);
    state.epoch = t;
    state.prev_costs = costs;
    state.pilot_history.push_back(pilot);

    EpochRecord record;
    record.epoch = t;
    record.costs = std::move(costs);
    record.goodness = std::move(scores);
    record.pilot = pilot;
    result.epochs.push_back(std::move(record));
  }

  Message end;
  end.kind = MessageKind::kEndRun;
  end.epoch = 0;
  for (const RegisteredWorker& w : workers) {
    w.conn->send(end);
    transcript.record(kMasterId, w.id, end);
  }
  result.final_model = std::move(state.p_current);
  return result;
}

}  // namespace fedf
