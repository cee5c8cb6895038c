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

#include "fedf/transcript.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

namespace fedf {

namespace {

std::int64_t wall_ns_now() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex,
                                   const std::string& where) {
  if (hex.size() % 2 != 0) {
    throw ParseError(where + ": odd-length payload_hex");
  }
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw ParseError(where + ": invalid hex digit");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace

void Transcript::record(WorkerId sender, WorkerId receiver,
                        const Message& msg) {
  std::lock_guard<std::mutex> lock(mu_);
  TranscriptEntry entry;
  entry.seq = entries_.size();
  entry.sender = sender;
  entry.receiver = receiver;
  entry.kind = msg.kind;
  entry.epoch = msg.epoch;
  entry.payload = msg.payload;
  entry.wall_ns = wall_ns_now();
  entries_.push_back(std::move(entry));
}

std::vector<TranscriptEntry> Transcript::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::size_t Transcript::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

void write_transcript_jsonl(const std::string& path,
                            const std::vector<TranscriptEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  for (const TranscriptEntry& e : entries) {
    nlohmann::json j;
    j["seq"] = e.seq;
    j["wall_ns"] = e.wall_ns;
    j["kind"] = message_kind_name(e.kind);
    j["epoch"] = e.epoch;
    j["sender"] = e.sender;
    j["receiver"] = e.receiver;
    j["payload_bytes"] = e.payload.size();
    j["payload_hex"] = to_hex(e.payload);
    out << j.dump() << '\n';
  }
}

std::vector<TranscriptEntry> read_transcript_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open transcript " + path);
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ": line " + std::to_string(line_no) +
                              " (byte offset " + std::to_string(offset) + ")";
    offset += line.size() + 1;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + ": " + ex.what());
    }
    try {
      TranscriptEntry e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.wall_ns = j.at("wall_ns").get<std::int64_t>();
      e.kind = message_kind_from_name(j.at("kind").get<std::string>());
      e.epoch = j.at("epoch").get<std::uint64_t>();
      e.sender = j.at("sender").get<WorkerId>();
      e.receiver = j.at("receiver").get<WorkerId>();
      e.payload = from_hex(j.at("payload_hex").get<std::string>(), where);
      if (j.at("payload_bytes").get<std::uint64_t>() != e.payload.size()) {
        throw ParseError(where + ": payload_bytes disagrees with payload_hex");
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + ": " + ex.what());
    }
  }
  return entries;
}

}  // namespace fedf
