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


#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "nop/frame.hpp"
#include "nop/isa.hpp"

namespace nop {

class Switch;

inline constexpr Word kLinkMagic = 0x4B4E4C4E;

class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How one external link is established.
struct LinkRole {
  enum class Mode : std::uint8_t { Connect, Accept };
  Mode mode = Mode::Accept;
  std::uint16_t port = 0;  // peer port for Connect, own listening port for Accept

  friend bool operator==(LinkRole, LinkRole) = default;
};

using LinkPlan = std::array<LinkRole, kExternalLinks>;

/// Links 0..n-1 connect to the given peers; links n..3 accept on first + k.
/// Throws LinkError for more than four peers or ports past 65535.
LinkPlan plan_links(unsigned first_own_socket, std::span<const unsigned> connect_to);

/// TCP transport of the four external links of one processor.
class LinkTransport {
 public:
  LinkTransport(Word own_id, LinkPlan plan, std::ostream* log = nullptr);
  ~LinkTransport();
  LinkTransport(const LinkTransport&) = delete;
  LinkTransport& operator=(const LinkTransport&) = delete;

  /// Opens listeners, connects (retrying refused connections with backoff),
  /// accepts, and exchanges handshakes. Returns once all four links are up.
  /// Throws LinkError on bind failure, bad handshake, or timeout.
  void bring_up(std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  /// Non-blocking: drains the switch's outbound queues onto the sockets and
  /// hands received frames to the switch. Returns the number of frames moved.
  /// A link fault is logged and closes that link.
  std::size_t exchange(Switch& sw);

  /// True while some bytes wait to be written.
  bool sending() const;
  /// Blocks until queued bytes are written or the deadline passes.
  void flush(Switch& sw, std::chrono::milliseconds timeout);

  std::optional<Word> peer_id(unsigned link) const { return links_[link & 3].peer_id; }
  bool open(unsigned link) const { return links_[link & 3].fd >= 0; }

 private:
  struct Link {
    int fd = -1;
    int listener = -1;
    std::vector<std::uint8_t> hello;  // handshake bytes received so far
    std::optional<Word> peer_id;
    std::vector<std::uint8_t> out;
    std::size_t out_pos = 0;
    FrameDecoder decoder;
  };

  void close_link(unsigned k);
  bool try_connect(unsigned k);
  bool try_accept(unsigned k);
  void send_hello(unsigned k);
  void read_hello(unsigned k);
  void log(const std::string& text) const;

  Word own_id_;
  LinkPlan plan_;
  std::ostream* log_;
  std::array<Link, kExternalLinks> links_;
};

}  // namespace nop
