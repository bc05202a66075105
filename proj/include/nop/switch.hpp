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
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nop/frame.hpp"
#include "nop/isa.hpp"
#include "nop/peripheral.hpp"
#include "nop/thread.hpp"
#include "nop/token.hpp"
#include "nop/trace.hpp"

namespace nop {

/// Tokens an input port buffers before senders are rejected.
inline constexpr std::size_t kInboxCapacity = 1;
/// Frames an external link buffers outbound before senders are rejected.
inline constexpr std::size_t kLinkQueueFrames = 256;

/// A thread-side channel port of this processor.
struct LocalPort {
  unsigned unit = 0;
  unsigned thread = 0;
  unsigned port = 0;

  constexpr unsigned index() const { return (unit * kThreadsPerUnit + thread) * kPortsPerThread + port; }
  static constexpr LocalPort from_index(unsigned i) {
    return {i / (kThreadsPerUnit * kPortsPerThread), (i / kPortsPerThread) % kThreadsPerUnit,
            i % kPortsPerThread};
  }
  friend constexpr bool operator==(LocalPort, LocalPort) = default;
};

inline constexpr unsigned kLocalPorts = kUnits * kThreadsPerUnit * kPortsPerThread;

/// Routing table: processor id -> external link.
class RoutingTable {
 public:
  void set(Word processor_id, unsigned link) { entries_[processor_id & kMaxProcessorId] = link & 3; }
  std::optional<unsigned> lookup(Word processor_id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<Word, unsigned> entries_;
};

/// Per-processor communication switch.
///
/// Every transmission path is a claim from one source on one sink, held from
/// the first token of a message until END or PAUSE. Sinks are thread input
/// ports, peripheral line outputs, the router configuration block, and the
/// outbound side of external links.
class Switch {
 public:
  explicit Switch(Word processor_id, Tracer tracer = {});

  Word processor_id() const { return processor_id_; }
  void set_time(Word time) { time_ = time; }

  // Thread-side interface.
  Word destination(LocalPort p) const { return port(p).dest; }
  void set_destination(LocalPort p, Word dest) { port(p).dest = dest; }
  SendStatus submit(LocalPort src, Token tok);
  bool can_accept(LocalPort src) const;
  std::optional<Token> peek(LocalPort p) const;
  void consume(LocalPort p);
  bool path_open(LocalPort p) const { return port(p).path.has_value(); }

  /// Finalises every open outbound path of a stopping thread with END.
  void abandon_thread(unsigned unit, unsigned thread);
  /// Clears ports and pending switch-owned messages of a restarted slot.
  void reset_thread(unsigned unit, unsigned thread);

  /// Queues a switch-owned message (init image, exception message). When an
  /// owner slot is given the message is dropped if that slot is restarted
  /// before it has been delivered.
  void post_message(Word dest, std::vector<Token> tokens, std::optional<unsigned> owner_slot = {});
  std::size_t pending_messages() const { return streams_.size(); }

  // Router configuration block.
  void apply_config(std::span<const Word> words);
  const RoutingTable& routes() const { return routes_; }
  RoutingTable& routes() { return routes_; }

  // Peripheral lines.
  void attach_line(unsigned line, std::unique_ptr<ByteSource> source, std::unique_ptr<ByteSink> sink);
  std::optional<GlobalPort> line_inbound(unsigned line) const { return lines_[line & 7].inbound_dest; }
  /// True while some configured line may still deliver input.
  bool awaiting_input() const;

  // External links.
  void set_link_up(unsigned link, bool up) { links_[link & 3].up = up; }
  bool link_up(unsigned link) const { return links_[link & 3].up; }
  std::deque<Frame>& link_outbound(unsigned link) { return links_[link & 3].outbound; }
  void receive_frame(unsigned link, Frame f) { links_[link & 3].inbound.push_back(f); }
  std::size_t link_inbound_pending(unsigned link) const { return links_[link & 3].inbound.size(); }

  /// Moves link, peripheral and switch-owned traffic. Returns the number of
  /// tokens moved.
  std::size_t pump();
  /// Tokens moved since construction, including thread submits and consumes.
  std::uint64_t activity() const { return activity_; }

  /// Human-readable summary of held claims and queued tokens.
  std::vector<std::string> describe_blockage() const;

 private:
  struct InputSink {
    unsigned index;
  };
  struct LineSink {
    unsigned line;
  };
  struct ConfigSink {};
  struct LinkSink {
    unsigned link;
    Word header;
  };
  using Sink = std::variant<InputSink, LineSink, ConfigSink, LinkSink>;

  struct SourceKey {
    enum class Kind : std::uint8_t { Port, Link, Line, Stream };
    Kind kind;
    std::uint32_t index;
    friend bool operator==(SourceKey, SourceKey) = default;
  };
  using Claim = std::optional<SourceKey>;

  struct PortState {
    Word dest = 0;
    std::deque<Token> inbox;
    std::optional<Sink> path;
    Claim claimed_by;  // as an input sink
  };
  struct Line {
    std::unique_ptr<ByteSource> source;
    std::unique_ptr<ByteSink> sink;
    std::optional<GlobalPort> inbound_dest;
    std::optional<std::uint8_t> pending;
    bool closed = false;
    std::optional<Sink> path;
    Claim claimed_by;  // as an outbound sink
  };
  struct Link {
    bool up = false;
    std::deque<Frame> outbound;
    std::deque<Frame> inbound;
    Claim claimed_by;
    std::optional<Word> inbound_dest;
    std::optional<Sink> inbound_path;
    bool discarding = false;
  };
  struct Config {
    Claim claimed_by;
    std::vector<Word> words;
  };
  struct Stream {
    std::uint32_t id;
    Word dest;
    std::deque<Token> tokens;
    std::optional<Sink> path;
    std::optional<unsigned> owner;
  };

  PortState& port(LocalPort p) { return ports_[p.index()]; }
  const PortState& port(LocalPort p) const { return ports_[p.index()]; }

  std::optional<Sink> resolve(Word dest) const;
  Claim& claim_of(const Sink& sink);
  const Claim& claim_of(const Sink& sink) const;
  bool has_room(const Sink& sink) const;
  bool can_start(SourceKey src, const std::optional<Sink>& path, Word dest) const;
  SendStatus offer(SourceKey src, std::optional<Sink>& path, Word dest, Token tok);
  void deliver(const Sink& sink, Token tok);
  void release(const Sink& sink);

  std::size_t pump_links();
  std::size_t pump_lines();
  std::size_t pump_streams();
  void orphan(std::optional<Sink>& path);

  void trace_sink(const Sink& sink, Token tok) const;

  Word processor_id_;
  Tracer tracer_;
  Word time_ = 0;
  std::uint64_t activity_ = 0;

  std::vector<PortState> ports_;
  std::array<Line, kPeripheralLines> lines_;
  std::array<Link, kExternalLinks> links_;
  Config config_;
  RoutingTable routes_;
  std::deque<Stream> streams_;
  std::uint32_t next_stream_ = 0;
};

}  // namespace nop
