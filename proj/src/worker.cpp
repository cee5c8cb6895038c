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

#include "fedf/worker.hpp"

#include "fedf/checkpoint.hpp"
#include "fedf/ternary.hpp"

namespace fedf {

double run_epoch(WorkerState& state, const ParameterVector& incoming,
                 const WorkerProfile& profile, const DataShard& shard,
                 const ModelSpec& spec) {
  if (incoming.size() != param_count(spec)) {
    throw DimensionError("run_epoch: incoming instance has " +
                         std::to_string(incoming.size()) +
                         " parameters, expected " +
                         std::to_string(param_count(spec)));
  }
  const std::size_t t = state.epoch + 1;
  state.p_recv_prev2 = std::move(state.p_recv_prev);
  state.p_recv_prev = incoming;
  const TrainingConfig cfg = config_for_global_epoch(profile.training, t);
  TrainOutcome outcome = train_local(spec, incoming, shard, cfg);
  state.q_local = std::move(outcome.params);
  state.last_cost = outcome.cost;
  state.epoch = t;
  return state.last_cost;
}

Message respond(const WorkerState& state, const WorkerProfile& profile,
                WorkerCommand command, std::uint64_t t) {
  if (t != state.epoch || state.epoch == 0) {
    throw ProtocolError("respond: command for epoch " + std::to_string(t) +
                        " but worker completed epoch " +
                        std::to_string(state.epoch));
  }
  Message msg;
  msg.epoch = t;
  if (command == WorkerCommand::kSendModel) {
    msg.kind = MessageKind::kModel;
    msg.payload = model_to_bytes(state.q_local);
    return msg;
  }
  TernaryVector tern;
  if (t == 1) {
    tern = ternary_first_epoch(state.q_local, state.p_recv_prev,
                               profile.training.learning_rate);
  } else {
    if (state.p_recv_prev2.size() != state.q_local.size()) {
      throw ProtocolError(
          "respond: ternary requested without two epochs of history");
    }
    tern = ternary_subsequent(state.q_local, state.p_recv_prev,
                              state.p_recv_prev2, profile.beta_k);
  }
  msg.kind = MessageKind::kTernary;
  msg.payload = packed_to_bytes(pack(tern));
  return msg;
}

void worker_loop(Connection& conn, const WorkerProfile& profile,
                 const DataShard& shard) {
  if (profile.data_size != shard.sample_count()) {
    throw ValidationError("worker " + std::to_string(profile.worker_id) +
                          ": declared data size " +
                          std::to_string(profile.data_size) +
                          " does not match shard size " +
                          std::to_string(shard.sample_count()));
  }
  RegisterRequest req;
  req.protocol_version = kProtocolVersion;
  req.worker_id = profile.worker_id;
  req.data_size = profile.data_size;
  conn.send(make_register_request(req));

  Message reply = conn.recv();
  if (reply.kind != MessageKind::kRegister) {
    throw ProtocolError("worker: expected REGISTER reply, got " +
                        std::string(message_kind_name(reply.kind)));
  }
  const RegisterReply reg = parse_register_reply(reply);
  validate_spec(reg.spec);
  WorkerProfile prof = profile;
  prof.beta_k = reg.beta;

  WorkerState state;
  for (;;) {
    const Message msg = conn.recv();
    switch (msg.kind) {
      case MessageKind::kStartEpoch: {
        if (msg.epoch != state.epoch + 1) {
          throw ProtocolError("worker: START_EPOCH for epoch " +
                              std::to_string(msg.epoch) + " after epoch " +
                              std::to_string(state.epoch));
        }
        const ParameterVector incoming =
            model_from_bytes(msg.payload.data(), msg.payload.size());
        const double cost = run_epoch(state, incoming, prof, shard, reg.spec);
        conn.send(make_cost(msg.epoch, cost));
        break;
      }
      case MessageKind::kCmdSendModel:
        conn.send(respond(state, prof, WorkerCommand::kSendModel, msg.epoch));
        break;
      case MessageKind::kCmdSendTernary:
        conn.send(respond(state, prof, WorkerCommand::kSendTernary, msg.epoch));
        break;
      case MessageKind::kEndRun:
        return;
      default:
        throw ProtocolError("worker: unexpected message kind " +
                            std::string(message_kind_name(msg.kind)));
    }
  }
}

}  // namespace fedf
