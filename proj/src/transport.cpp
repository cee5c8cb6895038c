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

#include "fedf/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace fedf {

namespace detail {

void MessageQueue::push(Message msg) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) throw ProtocolError("send on closed connection");
    items_.push_back(std::move(msg));
  }
  cv_.notify_one();
}

bool MessageQueue::pop(Message& out, int timeout_ms) {
  std::unique_lock<std::mutex> lock(mu_);
  const bool got = cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                                [&] { return !items_.empty() || closed_; });
  if (!got) {
    throw TimeoutError("recv timed out after " + std::to_string(timeout_ms) +
                       " ms");
  }
  if (items_.empty()) return false;  // closed and drained
  out = std::move(items_.front());
  items_.pop_front();
  return true;
}

void MessageQueue::close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace detail

namespace {

class QueueConnection : public Connection {
 public:
  QueueConnection(std::shared_ptr<detail::MessageQueue> out,
                  std::shared_ptr<detail::MessageQueue> in, int timeout_ms)
      : out_(std::move(out)), in_(std::move(in)), timeout_ms_(timeout_ms) {}

  ~QueueConnection() override { close(); }

  void send(const Message& msg) override { out_->push(msg); }

  Message recv() override {
    Message msg;
    if (!in_->pop(msg, timeout_ms_)) {
      throw ProtocolError("connection closed by peer");
    }
    return msg;
  }

  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<detail::MessageQueue> out_;
  std::shared_ptr<detail::MessageQueue> in_;
  int timeout_ms_;
};

void throw_errno(const std::string& what) {
  throw ProtocolError(what + ": " + std::strerror(errno));
}

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>>
make_in_process_link(int timeout_ms) {
  auto a2b = std::make_shared<detail::MessageQueue>();
  auto b2a = std::make_shared<detail::MessageQueue>();
  return {std::make_unique<QueueConnection>(a2b, b2a, timeout_ms),
          std::make_unique<QueueConnection>(b2a, a2b, timeout_ms)};
}

// ---------------------------------------------------------------------------

TcpConnection::TcpConnection(int fd, int timeout_ms)
    : fd_(fd), timeout_ms_(timeout_ms) {
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpConnection::~TcpConnection() { close(); }

void TcpConnection::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpConnection::send(const Message& msg) {
  if (fd_ < 0) throw ProtocolError("send on closed connection");
  const std::vector<std::uint8_t> frame = encode_frame(msg);
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent,
                             MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send failed");
    }
    sent += static_cast<std::size_t>(n);
  }
}

void TcpConnection::read_exact(std::uint8_t* buffer, std::size_t count) {
  std::size_t got = 0;
  while (got < count) {
    struct pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms_);
    if (ready == 0) {
      throw TimeoutError("recv timed out after " + std::to_string(timeout_ms_) +
                         " ms");
    }
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw_errno("poll failed");
    }
    const ssize_t n = ::recv(fd_, buffer + got, count - got, 0);
    if (n == 0) {
      throw ProtocolError(got == 0 && count == kFrameHeaderBytes
                              ? "connection closed by peer"
                              : "framing violation: stream ended mid-frame");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv failed");
    }
    got += static_cast<std::size_t>(n);
  }
}

Message TcpConnection::recv() {
  if (fd_ < 0) throw ProtocolError("recv on closed connection");
  std::uint8_t header[kFrameHeaderBytes];
  read_exact(header, kFrameHeaderBytes);
  const FrameHeader h = decode_frame_header(header);
  Message msg;
  msg.kind = h.kind;
  msg.epoch = h.epoch;
  msg.payload.resize(h.payload_length);
  if (h.payload_length > 0) {
    read_exact(msg.payload.data(), msg.payload.size());
  }
  return msg;
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port)
    : fd_(-1), port_(0) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw_errno("socket failed");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw ValidationError("invalid listen address '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int saved = errno;
    ::close(fd_);
    errno = saved;
    throw_errno("bind to " + host + ":" + std::to_string(port) + " failed");
  }
  if (::listen(fd_, 64) != 0) {
    const int saved = errno;
    ::close(fd_);
    errno = saved;
    throw_errno("listen failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Connection> TcpListener::accept(int timeout_ms) {
  struct pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, timeout_ms);
  if (ready == 0) {
    throw TimeoutError("no worker connected within " +
                       std::to_string(timeout_ms) + " ms");
  }
  if (ready < 0) throw_errno("poll failed");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw_errno("accept failed");
  return std::make_unique<TcpConnection>(fd, timeout_ms);
}

std::unique_ptr<Connection> tcp_connect(const std::string& host,
                                        std::uint16_t port, int timeout_ms) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ValidationError("invalid master address '" + host + "'");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("connect to " + host + ":" + std::to_string(port) + " failed");
  }
  return std::make_unique<TcpConnection>(fd, timeout_ms);
}

}  // namespace fedf
