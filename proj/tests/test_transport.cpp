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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fstream>
#include <thread>

#include "fedf/checkpoint.hpp"
#include "fedf/transcript.hpp"
#include "fedf/transport.hpp"
#include "support/helpers.hpp"

using fedf::Message;
using fedf::MessageKind;
using fedf::ParameterVector;

namespace {

ParameterVector sample_model(std::size_t m) {
  ParameterVector p;
  p.layout_id = "test:m=" + std::to_string(m);
  fedf::Rng64 rng(m);
  for (std::size_t i = 0; i < m; ++i) p.values.push_back(rng.uniform(-2, 2));
  return p;
}

}  // namespace

TEST_CASE("model encoding roundtrip, header fields, and size arithmetic") {
  const ParameterVector p = sample_model(17);
  const auto bytes = fedf::model_to_bytes(p);
  CHECK(bytes.size() == fedf::model_encoding_size(p));
  CHECK(bytes.size() == 4 + 1 + 4 + p.layout_id.size() + 8 + 17 * 8);
  CHECK(bytes[0] == 'F');
  CHECK(bytes[3] == 'F');
  CHECK(fedf::model_param_count(bytes.data(), bytes.size()) == 17);
  const ParameterVector back = fedf::model_from_bytes(bytes.data(), bytes.size());
  CHECK(back.layout_id == p.layout_id);
  CHECK(back.values == p.values);
}

TEST_CASE("model decoding rejects corruption") {
  const auto bytes = fedf::model_to_bytes(sample_model(3));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(fedf::model_from_bytes(bad_magic.data(), bad_magic.size()),
                  fedf::ParseError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(
      fedf::model_from_bytes(bad_version.data(), bad_version.size()),
      fedf::ParseError);
  CHECK_THROWS_AS(fedf::model_from_bytes(bytes.data(), bytes.size() - 3),
                  fedf::ParseError);
}

TEST_CASE("checkpoint file save/load") {
  helpers::TempDir dir("fedf-ckpt");
  const ParameterVector p = sample_model(9);
  fedf::save_model(dir.path() + "/m.fedf", p);
  const ParameterVector back = fedf::load_model(dir.path() + "/m.fedf");
  CHECK(back.values == p.values);
  CHECK(back.layout_id == p.layout_id);
}

TEST_CASE("frame encoding layout") {
  Message msg;
  msg.kind = MessageKind::kCost;
  msg.epoch = 0x0102030405060708ULL;
  msg.payload = {0xAA, 0xBB};
  const auto frame = fedf::encode_frame(msg);
  REQUIRE(frame.size() == fedf::kFrameHeaderBytes + 2);
  CHECK(frame[0] == static_cast<std::uint8_t>(MessageKind::kCost));
  CHECK(frame[1] == 0x08);  // little-endian epoch
  CHECK(frame[8] == 0x01);
  CHECK(frame[9] == 2);  // little-endian length
  const auto header = fedf::decode_frame_header(frame.data());
  CHECK(header.kind == MessageKind::kCost);
  CHECK(header.epoch == msg.epoch);
  CHECK(header.payload_length == 2);

  std::uint8_t junk[fedf::kFrameHeaderBytes] = {0x7F};
  CHECK_THROWS_AS(fedf::decode_frame_header(junk), fedf::ProtocolError);
}

TEST_CASE("registration and cost codecs") {
  fedf::RegisterRequest req;
  req.worker_id = 3;
  req.data_size = 1234;
  const Message m = fedf::make_register_request(req);
  const auto back = fedf::parse_register_request(m);
  CHECK(back.protocol_version == fedf::kProtocolVersion);
  CHECK(back.worker_id == 3);
  CHECK(back.data_size == 1234);

  fedf::RegisterReply reply;
  reply.beta = 0.25;
  reply.spec.kind = fedf::ModelKind::kMlp1h;
  reply.spec.input_dim = 2;
  reply.spec.hidden_dim = 4;
  reply.spec.output_dim = 1;
  reply.spec.loss = fedf::LossKind::kCrossEntropy;
  const auto parsed = fedf::parse_register_reply(fedf::make_register_reply(reply));
  CHECK(parsed.beta == 0.25);
  CHECK(parsed.spec.kind == fedf::ModelKind::kMlp1h);
  CHECK(parsed.spec.hidden_dim == 4);
  CHECK(parsed.spec.loss == fedf::LossKind::kCrossEntropy);

  const Message cost = fedf::make_cost(5, 0.75);
  CHECK(cost.payload_bytes() == 8);
  CHECK(fedf::parse_cost(cost) == 0.75);
}

TEST_CASE("in-process link delivers in order and both directions") {
  auto [a, b] = fedf::make_in_process_link(1000);
  for (int i = 0; i < 5; ++i) {
    Message m;
    m.kind = MessageKind::kCost;
    m.epoch = static_cast<std::uint64_t>(i);
    a->send(m);
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(b->recv().epoch == static_cast<std::uint64_t>(i));
  }
  Message reply;
  reply.kind = MessageKind::kEndRun;
  b->send(reply);
  CHECK(a->recv().kind == MessageKind::kEndRun);
}

TEST_CASE("in-process recv times out and close unblocks the peer") {
  auto [a, b] = fedf::make_in_process_link(50);
  CHECK_THROWS_AS(b->recv(), fedf::TimeoutError);
  a->close();
  CHECK_THROWS_AS(b->recv(), fedf::ProtocolError);
}

TEST_CASE("tcp roundtrip with payload sizes from the protocol") {
  fedf::TcpListener listener("127.0.0.1", 0);
  const auto model_payload = fedf::model_to_bytes(sample_model(17));
  std::thread client([&, port = listener.port()] {
    auto conn = fedf::tcp_connect("127.0.0.1", port, 2000);
    Message m;
    m.kind = MessageKind::kModel;
    m.epoch = 1;
    m.payload = model_payload;
    conn->send(m);
    const Message echo = conn->recv();
    Message back = echo;
    back.kind = MessageKind::kTernary;
    conn->send(back);
  });
  auto server = listener.accept(2000);
  const Message got = server->recv();
  CHECK(got.kind == MessageKind::kModel);
  // Payload equals the model-file encoding for M = 17 parameters.
  CHECK(got.payload.size() == model_payload.size());
  CHECK(got.payload == model_payload);
  Message echo;
  echo.kind = MessageKind::kCmdSendModel;
  echo.epoch = 1;
  server->send(echo);
  const Message last = server->recv();
  CHECK(last.kind == MessageKind::kTernary);
  client.join();
}

TEST_CASE("tcp recv timeout against a silent peer") {
  fedf::TcpListener listener("127.0.0.1", 0);
  auto client = fedf::tcp_connect("127.0.0.1", listener.port(), 100);
  auto server = listener.accept(100);
  CHECK_THROWS_AS(client->recv(), fedf::TimeoutError);
}

TEST_CASE("tcp close at a frame boundary reads as peer departure") {
  fedf::TcpListener listener("127.0.0.1", 0);
  auto client = fedf::tcp_connect("127.0.0.1", listener.port(), 1000);
  auto server = listener.accept(1000);
  Message m;
  m.kind = MessageKind::kModel;
  m.epoch = 1;
  m.payload = {1, 2, 3};
  client->send(m);
  client->close();
  const Message full = server->recv();  // complete frame arrives intact
  CHECK(full.payload.size() == 3);
  CHECK_THROWS_WITH_AS(server->recv(), doctest::Contains("closed"),
                       fedf::ProtocolError);
}

TEST_CASE("tcp stream ending mid-frame is a framing violation") {
  fedf::TcpListener listener("127.0.0.1", 0);
  // Raw client so the stream can be cut inside a frame.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(listener.port());
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  auto server = listener.accept(1000);

  Message lie;
  lie.kind = MessageKind::kModel;
  lie.epoch = 1;
  lie.payload = {1, 2, 3};
  const auto frame = fedf::encode_frame(lie);
  REQUIRE(::send(fd, frame.data(), frame.size() - 2, 0) ==
          static_cast<ssize_t>(frame.size() - 2));
  ::close(fd);
  CHECK_THROWS_WITH_AS(server->recv(), doctest::Contains("mid-frame"),
                       fedf::ProtocolError);
}

TEST_CASE("transcript records a total order and JSONL roundtrips") {
  fedf::Transcript transcript;
  Message m1;
  m1.kind = MessageKind::kStartEpoch;
  m1.epoch = 1;
  m1.payload = fedf::model_to_bytes(sample_model(4));
  transcript.record(fedf::kMasterId, 2, m1);
  Message m2;
  m2.kind = MessageKind::kCost;
  m2.epoch = 1;
  m2.payload = fedf::make_cost(1, 0.5).payload;
  transcript.record(2, fedf::kMasterId, m2);

  const auto entries = transcript.snapshot();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].seq == 0);
  CHECK(entries[1].seq == 1);
  CHECK(entries[0].receiver == 2);
  CHECK(entries[1].sender == 2);
  CHECK(entries[0].frame_bytes() ==
        fedf::kFrameHeaderBytes + entries[0].payload.size());

  helpers::TempDir dir("fedf-transcript");
  const std::string path = dir.path() + "/t.jsonl";
  fedf::write_transcript_jsonl(path, entries);
  const auto back = fedf::read_transcript_jsonl(path);
  REQUIRE(back.size() == entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].seq == entries[i].seq);
    CHECK(back[i].kind == entries[i].kind);
    CHECK(back[i].epoch == entries[i].epoch);
    CHECK(back[i].sender == entries[i].sender);
    CHECK(back[i].receiver == entries[i].receiver);
    CHECK(back[i].payload == entries[i].payload);
    CHECK(back[i].wall_ns == entries[i].wall_ns);
  }
}

TEST_CASE("truncated transcript names the byte offset") {
  helpers::TempDir dir("fedf-trunc");
  const std::string path = dir.path() + "/t.jsonl";
  {
    std::ofstream out(path);
    out << R"({"seq":0,"wall_ns":1,"kind":"COST","epoch":1,"sender":1,)"
        << R"("receiver":0,"payload_bytes":0,"payload_hex":""})" << "\n";
    out << R"({"seq":1,"wall_ns":2,"kind":"COST")";  // truncated line
  }
  CHECK_THROWS_WITH_AS(fedf::read_transcript_jsonl(path),
                       doctest::Contains("byte offset"), fedf::ParseError);
}

TEST_CASE("concurrent transcript appends keep a dense sequence") {
  fedf::Transcript transcript;
  std::vector<std::thread> writers;
  for (int w = 0; w < 4; ++w) {
    writers.emplace_back([&transcript, w] {
      for (int i = 0; i < 250; ++i) {
        Message m;
        m.kind = MessageKind::kCost;
        m.epoch = static_cast<std::uint64_t>(w);
        transcript.record(static_cast<fedf::WorkerId>(w + 1), fedf::kMasterId,
                          m);
      }
    });
  }
  for (auto& t : writers) t.join();
  const auto entries = transcript.snapshot();
  REQUIRE(entries.size() == 1000);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].seq == i);
  }
}
