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
#include <string>
#include <vector>

#include "fedf/model.hpp"
#include "fedf/parameters.hpp"

namespace fedf {

inline constexpr std::uint32_t kProtocolVersion = 1;

// The closed protocol message inventory. Nothing else ever crosses the
// transport, which is what the audit checks lean on.
enum class MessageKind : std::uint8_t {
  kRegister = 1,    // worker -> master hello; master -> worker reply
  kStartEpoch = 2,  // master -> worker, payload: model encoding
  kCost = 3,        // worker -> master, payload: f64 little-endian
  kCmdSendModel = 4,
  kCmdSendTernary = 5,
  kModel = 6,    // worker -> master, payload: model encoding
  kTernary = 7,  // worker -> master, payload: packed ternary wire form
  kEndRun = 8,
};

const char* message_kind_name(MessageKind kind);
MessageKind message_kind_from_name(const std::string& name);

// Wire framing: 1 kind byte, epoch as u64 little-endian, payload length as
// u64 little-endian, then the payload. Session-level messages (REGISTER,
// END_RUN) carry epoch 0.
inline constexpr std::size_t kFrameHeaderBytes = 17;

struct Message {
  MessageKind kind = MessageKind::kEndRun;
  std::uint64_t epoch = 0;
  std::vector<std::uint8_t> payload;

  std::size_t payload_bytes() const { return payload.size(); }
  std::size_t frame_bytes() const { return kFrameHeaderBytes + payload.size(); }
};

std::vector<std::uint8_t> encode_frame(const Message& msg);

struct FrameHeader {
  MessageKind kind;
  std::uint64_t epoch;
  std::uint64_t payload_length;
};

// Throws ProtocolError on an unknown kind byte.
FrameHeader decode_frame_header(const std::uint8_t* bytes);

// Registration payloads.
struct RegisterRequest {
  std::uint32_t protocol_version = kProtocolVersion;
  WorkerId worker_id = 0;
  std::uint64_t data_size = 0;
};

struct RegisterReply {
  double beta = 0.0;
  ModelSpec spec;
};

Message make_register_request(const RegisterRequest& req);
RegisterRequest parse_register_request(const Message& msg);
Message make_register_reply(const RegisterReply& reply);
RegisterReply parse_register_reply(const Message& msg);

Message make_cost(std::uint64_t epoch, double cost);
double parse_cost(const Message& msg);

}  // namespace fedf
