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
#include <mutex>
#include <string>
#include <vector>

#include "fedf/message.hpp"
#include "fedf/parameters.hpp"

namespace fedf {

// One protocol message as observed by the master, including the payload so
// that audits can scan actual bytes. wall_ns is the only timing field; every
// other field is deterministic for a deterministic run.
struct TranscriptEntry {
  std::uint64_t seq = 0;
  WorkerId sender = 0;
  WorkerId receiver = 0;
  MessageKind kind = MessageKind::kEndRun;
  std::uint64_t epoch = 0;
  std::vector<std::uint8_t> payload;
  std::int64_t wall_ns = 0;

  std::size_t payload_bytes() const { return payload.size(); }
  std::size_t frame_bytes() const { return kFrameHeaderBytes + payload.size(); }
};

// Ordered log of every message in a run. Appends are serialized; the seq
// number gives the total order.
class Transcript {
 public:
  void record(WorkerId sender, WorkerId receiver, const Message& msg);
  std::vector<TranscriptEntry> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

// JSON-lines export/import: one message record per line with fields
// seq, wall_ns, kind, epoch, sender, receiver, payload_bytes, payload_hex.
void write_transcript_jsonl(const std::string& path,
                            const std::vector<TranscriptEntry>& entries);

// Parse failures name the line and its starting byte offset.
std::vector<TranscriptEntry> read_transcript_jsonl(const std::string& path);

}  // namespace fedf
