/*
 * Copyright 2026 The nopsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "nop/link.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <fmt/format.h>

#include "nop/switch.hpp"

namespace nop {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kHelloBytes = 8;
constexpr std::size_t kMaxBuffered = 64 * 1024;

std::string errno_text() { return std::strerror(errno); }

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

Word read_le(const std::uint8_t* p) {
  return Word{p[0]} | Word{p[1]} << 8 | Word{p[2]} << 16 | Word{p[3]} << 24;
}

}  // namespace

LinkPlan plan_links(unsigned first_own_socket, std::span<const unsigned> connect_to) {
  if (connect_to.size() > kExternalLinks)
    throw LinkError(fmt::format("at most {} connect sockets, got {}", kExternalLinks, connect_to.size()));
  LinkPlan plan;
  for (unsigned k = 0; k < kExternalLinks; ++k) {
    const bool connect = k < connect_to.size();
    const unsigned port = connect ? connect_to[k] : first_own_socket + k;
    if (port == 0 || port > 0xFFFF) throw LinkError(fmt::format("socket number {} out of range", port));
    plan[k] = {connect ? LinkRole::Mode::Connect : LinkRole::Mode::Accept, static_cast<std::uint16_t>(port)};
  }
  return plan;
}

LinkTransport::LinkTransport(Word own_id, LinkPlan plan, std::ostream* log)
    : own_id_(own_id), plan_(plan), log_(log) {}

LinkTransport::~LinkTransport() {
  for (unsigned k = 0; k < kExternalLinks; ++k) {
    close_link(k);
    if (links_[k].listener >= 0) ::close(links_[k].listener);
  }
}

void LinkTransport::log(const std::string& text) const {
  if (log_) *log_ << fmt::format("n{} {}\n", own_id_, text) << std::flush;
}

void LinkTransport::close_link(unsigned k) {
  if (links_[k].fd >= 0) ::close(links_[k].fd);
  links_[k].fd = -1;
}

void LinkTransport::send_hello(unsigned k) {
  std::vector<std::uint8_t> hello;
  for (const Word w : {kLinkMagic, own_id_})
    for (unsigned i = 0; i < 4; ++i) hello.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  std::size_t sent = 0;
  while (sent < hello.size()) {
    const ssize_t n = ::send(links_[k].fd, hello.data() + sent, hello.size() - sent, MSG_NOSIGNAL);
    if (n > 0) {
      sent += static_cast<std::size_t>(n);
    } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    } else {
      throw LinkError(fmt::format("link {}: handshake send failed: {}", k, errno_text()));
    }
  }
}

void LinkTransport::read_hello(unsigned k) {
  auto& link = links_[k];
  std::uint8_t buf[kHelloBytes];
  const ssize_t n = ::recv(link.fd, buf, kHelloBytes - link.hello.size(), MSG_DONTWAIT);
  if (n == 0) throw LinkError(fmt::format("link {}: peer closed during handshake", k));
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return;
    throw LinkError(fmt::format("link {}: handshake receive failed: {}", k, errno_text()));
  }
  link.hello.insert(link.hello.end(), buf, buf + n);
  if (link.hello.size() < kHelloBytes) return;
  if (read_le(link.hello.data()) != kLinkMagic)
    throw LinkError(fmt::format("link {}: bad handshake magic 0x{:08x}", k, read_le(link.hello.data())));
  link.peer_id = read_le(link.hello.data() + 4);
  log(fmt::format("link{} up, peer n{}", k, *link.peer_id));
}

bool LinkTransport::try_connect(unsigned k) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw LinkError(fmt::format("socket: {}", errno_text()));
  const sockaddr_in addr = loopback(plan_[k].port);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd);
    if (err == ECONNREFUSED || err == ETIMEDOUT || err == EINTR) return false;
    errno = err;
    throw LinkError(fmt::format("link {}: connect to {} failed: {}", k, plan_[k].port, errno_text()));
  }
  set_nonblocking(fd);
  set_nodelay(fd);
  links_[k].fd = fd;
  send_hello(k);
  return true;
}

bool LinkTransport::try_accept(unsigned k) {
  auto& link = links_[k];
  const int fd = ::accept(link.listener, nullptr, nullptr);
  if (fd < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR || errno == ECONNABORTED) return false;
    throw LinkError(fmt::format("link {}: accept failed: {}", k, errno_text()));
  }
  ::close(link.listener);
  link.listener = -1;
  set_nonblocking(fd);
  set_nodelay(fd);
  link.fd = fd;
  send_hello(k);
  return true;
}

void LinkTransport::bring_up(std::optional<std::chrono::milliseconds> timeout) {
  const auto deadline = timeout ? std::optional(Clock::now() + *timeout) : std::nullopt;

  for (unsigned k = 0; k < kExternalLinks; ++k) {
    if (plan_[k].mode != LinkRole::Mode::Accept) continue;
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw LinkError(fmt::format("socket: {}", errno_text()));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const sockaddr_in addr = loopback(plan_[k].port);
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 1) != 0) {
      const std::string why = errno_text();
      ::close(fd);
      throw LinkError(fmt::format("link {}: cannot listen on {}: {}", k, plan_[k].port, why));
    }
    set_nonblocking(fd);
    links_[k].listener = fd;
  }

  std::array<Clock::time_point, kExternalLinks> next_try{};
  std::array<std::chrono::milliseconds, kExternalLinks> backoff{};
  backoff.fill(std::chrono::milliseconds(10));

  for (;;) {
    bool all_up = true;
    for (unsigned k = 0; k < kExternalLinks; ++k) {
      auto& link = links_[k];
      if (link.fd < 0) {
        if (plan_[k].mode == LinkRole::Mode::Accept) {
          try_accept(k);
        } else if (Clock::now() >= next_try[k] && !try_connect(k)) {
          next_try[k] = Clock::now() + backoff[k];
          backoff[k] = std::min(backoff[k] * 2, std::chrono::milliseconds(320));
        }
      }
      if (link.fd >= 0 && !link.peer_id) read_hello(k);
      all_up = all_up && link.peer_id.has_value();
    }
    if (all_up) return;
    if (deadline && Clock::now() >= *deadline) throw LinkError("timed out waiting for all four links");

    std::vector<pollfd> fds;
    for (const auto& link : links_) {
      if (link.listener >= 0) fds.push_back({link.listener, POLLIN, 0});
      if (link.fd >= 0 && !link.peer_id) fds.push_back({link.fd, POLLIN, 0});
    }
    ::poll(fds.data(), fds.size(), 5);
  }
}

std::size_t LinkTransport::exchange(Switch& sw) {
  std::size_t moved = 0;
  for (unsigned k = 0; k < kExternalLinks; ++k) {
    auto& link = links_[k];
    sw.set_link_up(k, link.fd >= 0);
    if (link.fd < 0) continue;

    auto& queue = sw.link_outbound(k);
    while (!queue.empty() && link.out.size() - link.out_pos < kMaxBuffered) {
      encode(queue.front(), link.out);
      queue.pop_front();
      ++moved;
    }
    while (link.out_pos < link.out.size()) {
      const ssize_t n = ::send(link.fd, link.out.data() + link.out_pos, link.out.size() - link.out_pos,
                               MSG_NOSIGNAL | MSG_DONTWAIT);
      if (n > 0) {
        link.out_pos += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
        break;
      } else {
        log(fmt::format("link{} fault: send failed: {}", k, errno_text()));
        close_link(k);
        break;
      }
    }
    if (link.out_pos == link.out.size()) {
      link.out.clear();
      link.out_pos = 0;
    }
    if (link.fd < 0) {
      sw.set_link_up(k, false);
      continue;
    }

    std::uint8_t buf[4096];
    std::vector<Frame> frames;
    for (;;) {
      const ssize_t n = ::recv(link.fd, buf, sizeof buf, MSG_DONTWAIT);
      if (n > 0) {
        try {
          link.decoder.feed({buf, static_cast<std::size_t>(n)}, frames);
        } catch (const FrameError& e) {
          log(fmt::format("link{} fault: {}", k, e.what()));
          close_link(k);
          break;
        }
        continue;
      }
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) break;
      if (n == 0 && link.decoder.buffered() == 0) {
        log(fmt::format("link{} closed by peer", k));
      } else if (n == 0) {
        log(fmt::format("link{} fault: peer closed inside a frame", k));
      } else {
        log(fmt::format("link{} fault: receive failed: {}", k, errno_text()));
      }
      close_link(k);
      break;
    }
    for (const Frame& f : frames) sw.receive_frame(k, f);
    moved += frames.size();
    if (link.fd < 0) sw.set_link_up(k, false);
  }
  return moved;
}

bool LinkTransport::sending() const {
  for (const auto& link : links_)
    if (link.fd >= 0 && link.out_pos < link.out.size()) return true;
  return false;
}

void LinkTransport::flush(Switch& sw, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    exchange(sw);
    bool queued = sending();
    for (unsigned k = 0; k < kExternalLinks; ++k)
      queued = queued || (links_[k].fd >= 0 && !sw.link_outbound(k).empty());
    if (!queued || Clock::now() >= deadline) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

}  // namespace nop
