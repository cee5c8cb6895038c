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

#include "fedf/message.hpp"

#include <bit>
#include <cstring>

namespace fedf {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void expect_payload(const Message& msg, std::size_t size, const char* what) {
  if (msg.payload.size() != size) {
    throw ProtocolError(std::string(what) + ": expected " +
                        std::to_string(size) + " payload bytes, got " +
                        std::to_string(msg.payload.size()));
  }
}

std::uint8_t loss_code(LossKind loss) {
  return loss == LossKind::kMse ? 0 : 1;
}

std::uint8_t kind_code(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression:
      return 0;
    case ModelKind::kLogisticRegression:
      return 1;
    case ModelKind::kMlp1h:
      return 2;
  }
  return 0;
}

}  // namespace

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::kRegister:
      return "REGISTER";
    case MessageKind::kStartEpoch:
      return "START_EPOCH";
    case MessageKind::kCost:
      return "COST";
    case MessageKind::kCmdSendModel:
      return "CMD_SEND_MODEL";
    case MessageKind::kCmdSendTernary:
      return "CMD_SEND_TERNARY";
    case MessageKind::kModel:
      return "MODEL";
    case MessageKind::kTernary:
      return "TERNARY";
    case MessageKind::kEndRun:
      return "END_RUN";
  }
  return "UNKNOWN";
}

MessageKind message_kind_from_name(const std::string& name) {
  for (std::uint8_t code = 1; code <= 8; ++code) {
    const MessageKind kind = static_cast<MessageKind>(code);
    if (name == message_kind_name(kind)) return kind;
  }
  throw ParseError("unknown message kind '" + name + "'");
}

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + msg.payload.size());
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  put_u64(out, msg.epoch);
  put_u64(out, msg.payload.size());
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

FrameHeader decode_frame_header(const std::uint8_t* bytes) {
  const std::uint8_t code = bytes[0];
  if (code < 1 || code > 8) {
    throw ProtocolError("framing violation: unknown message kind byte " +
                        std::to_string(code));
  }
  FrameHeader h;
  h.kind = static_cast<MessageKind>(code);
  h.epoch = get_u64(bytes + 1);
  h.payload_length = get_u64(bytes + 9);
  return h;
}

Message make_register_request(const RegisterRequest& req) {
  Message msg;
  msg.kind = MessageKind::kRegister;
  msg.epoch = 0;
  put_u32(msg.payload, req.protocol_version);
  put_u32(msg.payload, req.worker_id);
  put_u64(msg.payload, req.data_size);
  return msg;
}

RegisterRequest parse_register_request(const Message& msg) {
  expect_payload(msg, 16, "REGISTER request");
  RegisterRequest req;
  req.protocol_version = get_u32(msg.payload.data());
  req.worker_id = get_u32(msg.payload.data() + 4);
  req.data_size = get_u64(msg.payload.data() + 8);
  return req;
}

Message make_register_reply(const RegisterReply& reply) {
  Message msg;
  msg.kind = MessageKind::kRegister;
  msg.epoch = 0;
  put_u64(msg.payload, std::bit_cast<std::uint64_t>(reply.beta));
  msg.payload.push_back(kind_code(reply.spec.kind));
  put_u32(msg.payload, static_cast<std::uint32_t>(reply.spec.input_dim));
  put_u32(msg.payload, static_cast<std::uint32_t>(reply.spec.output_dim));
  put_u32(msg.payload, static_cast<std::uint32_t>(reply.spec.hidden_dim));
  msg.payload.push_back(loss_code(reply.spec.loss));
  return msg;
}

RegisterReply parse_register_reply(const Message& msg) {
  expect_payload(msg, 22, "REGISTER reply");
  RegisterReply reply;
  const std::uint8_t* p = msg.payload.data();
  reply.beta = std::bit_cast<double>(get_u64(p));
  switch (p[8]) {
    case 0:
      reply.spec.kind = ModelKind::kLinearRegression;
      break;
    case 1:
      reply.spec.kind = ModelKind::kLogisticRegression;
      break;
    case 2:
      reply.spec.kind = ModelKind::kMlp1h;
      break;
    default:
      throw ProtocolError("REGISTER reply: unknown model kind code");
  }
  reply.spec.input_dim = get_u32(p + 9);
  reply.spec.output_dim = get_u32(p + 13);
  reply.spec.hidden_dim = get_u32(p + 17);
  reply.spec.loss = p[21] == 0 ? LossKind::kMse : LossKind::kCrossEntropy;
  return reply;
}

Message make_cost(std::uint64_t epoch, double cost) {
  Message msg;
  msg.kind = MessageKind::kCost;
  msg.epoch = epoch;
  put_u64(msg.payload, std::bit_cast<std::uint64_t>(cost));
  return msg;
}

double parse_cost(const Message& msg) {
  expect_payload(msg, 8, "COST");
  return std::bit_cast<double>(get_u64(msg.payload.data()));
}

}  // namespace fedf
