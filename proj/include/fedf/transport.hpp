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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "fedf/message.hpp"

namespace fedf {

inline constexpr int kDefaultTimeoutMs = 30'000;

// One reliable, ordered duplex stream between the master and one worker.
// recv blocks up to the configured timeout and throws TimeoutError after it.
class Connection {
 public:
  virtual ~Connection() = default;
  virtual void send(const Message& msg) = 0;
  virtual Message recv() = 0;
  virtual void close() = 0;
};

// ---------------------------------------------------------------------------
// Deterministic in-process transport.

namespace detail {

class MessageQueue {
 public:
  void push(Message msg);
  // Returns false when the queue was closed and drained.
  bool pop(Message& out, int timeout_ms);
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> items_;
  bool closed_ = false;
};

}  // namespace detail

// Pair of connected in-process endpoints backed by two message queues.
std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>>
make_in_process_link(int timeout_ms = kDefaultTimeoutMs);

// ---------------------------------------------------------------------------
// Framed TCP transport (see message.hpp for the frame layout).

class TcpConnection : public Connection {
 public:
  explicit TcpConnection(int fd, int timeout_ms = kDefaultTimeoutMs);
  ~TcpConnection() override;
  TcpConnection(const TcpConnection&) = delete;
  TcpConnection& operator=(const TcpConnection&) = delete;

  void send(const Message& msg) override;
  Message recv() override;
  void close() override;

 private:
  void read_exact(std::uint8_t* buffer, std::size_t count);
  int fd_;
  int timeout_ms_;
};

class TcpListener {
 public:
  // port 0 binds an ephemeral port; port() reports the bound one.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Connection> accept(int timeout_ms = kDefaultTimeoutMs);

 private:
  int fd_;
  std::uint16_t port_;
};

std::unique_ptr<Connection> tcp_connect(const std::string& host,
                                        std::uint16_t port,
                                        int timeout_ms = kDefaultTimeoutMs);

}  // namespace fedf
