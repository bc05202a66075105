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

#include "nop/switch.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace nop {

namespace {

// Bound on bytes a single line moves per pump, so one chatty line cannot
// monopolise a round when its destination buffers more than one token.
constexpr unsigned kLineBurst = 64;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string port_name(LocalPort p) { return fmt::format("u{}t{}p{}", p.unit, p.thread, p.port); }

}  // namespace

std::optional<unsigned> RoutingTable::lookup(Word processor_id) const {
  const auto it = entries_.find(processor_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Switch::Switch(Word processor_id, Tracer tracer)
    : processor_id_(processor_id), tracer_(tracer), ports_(kLocalPorts) {
  for (auto& line : lines_) {
    line.source = std::make_unique<NullSource>();
    line.sink = std::make_unique<NullSink>();
  }
}

std::optional<Switch::Sink> Switch::resolve(Word dest) const {
  const GlobalPort p{dest};
  const RouteTarget route = classify_route(p);
  switch (route.kind) {
    case RouteKind::LocalUnit:
      return InputSink{LocalPort{p.unit(), p.thread(), p.port()}.index()};
    case RouteKind::PeripheralLine:
      return LineSink{p.port() & 7};
    case RouteKind::RouterConfig:
      return ConfigSink{};
    case RouteKind::ExternalLink:
      return LinkSink{route.index, p.with_command(kCmdLocalUnit).raw()};
    case RouteKind::Table:
      if (route.index == processor_id_) return InputSink{LocalPort{p.unit(), p.thread(), p.port()}.index()};
      if (const auto link = routes_.lookup(route.index)) return LinkSink{*link, dest};
      return std::nullopt;
    case RouteKind::Illegal:
      break;
  }
  return std::nullopt;
}

Switch::Claim& Switch::claim_of(const Sink& sink) {
  return const_cast<Claim&>(std::as_const(*this).claim_of(sink));
}

const Switch::Claim& Switch::claim_of(const Sink& sink) const {
  return std::visit(Overloaded{
                        [&](const InputSink& s) -> const Claim& { return ports_[s.index].claimed_by; },
                        [&](const LineSink& s) -> const Claim& { return lines_[s.line].claimed_by; },
                        [&](const ConfigSink&) -> const Claim& { return config_.claimed_by; },
                        [&](const LinkSink& s) -> const Claim& { return links_[s.link].claimed_by; },
                    },
                    sink);
}

bool Switch::has_room(const Sink& sink) const {
  return std::visit(Overloaded{
                        [&](const InputSink& s) { return ports_[s.index].inbox.size() < kInboxCapacity; },
                        [&](const LineSink&) { return true; },
                        [&](const ConfigSink&) { return true; },
                        [&](const LinkSink& s) {
                          return links_[s.link].up && links_[s.link].outbound.size() < kLinkQueueFrames;
                        },
                    },
                    sink);
}

bool Switch::can_start(SourceKey src, const std::optional<Sink>& path, Word dest) const {
  if (path) return has_room(*path);
  const auto sink = resolve(dest);
  if (!sink) return false;
  const Claim& owner = claim_of(*sink);
  return (!owner || *owner == src) && has_room(*sink);
}

void Switch::trace_sink(const Sink& sink, Token tok) const {
  std::visit(Overloaded{
                 [&](const InputSink&) {},
                 [&](const LineSink& s) {
                   if (tracer_.external(TraceMasks::kLineBit + s.line))
                     tracer_.external_token(time_, true, fmt::format("line{}", s.line), to_string(tok));
                 },
                 [&](const ConfigSink&) {
                   if (tracer_.external(TraceMasks::kConfigBit))
                     tracer_.external_token(time_, false, "config", to_string(tok));
                 },
                 [&](const LinkSink& s) {
                   if (tracer_.external(TraceMasks::kLinkBit + s.link))
                     tracer_.external_token(time_, true, fmt::format("link{}", s.link), to_string(tok));
                 },
             },
             sink);
}

void Switch::deliver(const Sink& sink, Token tok) {
  trace_sink(sink, tok);
  std::visit(Overloaded{
                 [&](const InputSink& s) {
                   if (!tok.is_pause()) ports_[s.index].inbox.push_back(tok);
                 },
                 [&](const LineSink& s) {
                   auto& line = lines_[s.line];
                   if (tok.is_data()) line.sink->write(static_cast<std::uint8_t>(tok.value & 0xFF));
                   if (tok.is_end()) line.sink->flush();
                 },
                 [&](const ConfigSink&) {
                   if (tok.is_data()) config_.words.push_back(tok.value);
                   if (tok.is_end()) {
                     apply_config(config_.words);
                     config_.words.clear();
                   }
                 },
                 [&](const LinkSink& s) { links_[s.link].outbound.push_back(Frame::from_token(tok)); },
             },
             sink);
}

void Switch::release(const Sink& sink) { claim_of(sink).reset(); }

SendStatus Switch::offer(SourceKey src, std::optional<Sink>& path, Word dest, Token tok) {
  if (tok.is_pause()) {
    if (path) {
      // Only a link forwards PAUSE, so the far switch frees its path too.
      if (std::holds_alternative<LinkSink>(*path)) deliver(*path, tok);
      release(*path);
      path.reset();
    }
    ++activity_;
    return SendStatus::Accepted;
  }
  if (!path) {
    const auto sink = resolve(dest);
    if (!sink) return SendStatus::IllegalRoute;
    Claim& owner = claim_of(*sink);
    if ((owner && *owner != src) || !has_room(*sink)) return SendStatus::Rejected;
    owner = src;
    path = *sink;
    if (const auto* link = std::get_if<LinkSink>(&*path)) {
      links_[link->link].outbound.push_back(Frame::header(link->header));
      if (tracer_.external(TraceMasks::kLinkBit + link->link))
        tracer_.external_token(time_, true, fmt::format("link{}", link->link),
                               to_string(Frame::header(link->header)));
    }
  } else if (!has_room(*path)) {
    return SendStatus::Rejected;
  }
  deliver(*path, tok);
  if (tok.is_end()) {
    release(*path);
    path.reset();
  }
  ++activity_;
  return SendStatus::Accepted;
}

SendStatus Switch::submit(LocalPort src, Token tok) {
  auto& p = port(src);
  const SendStatus s = offer({SourceKey::Kind::Port, src.index()}, p.path, p.dest, tok);
  if (s == SendStatus::Accepted) tracer_.port_token(time_, true, src.unit, src.thread, src.port, tok);
  return s;
}

bool Switch::can_accept(LocalPort src) const {
  const auto& p = port(src);
  return can_start({SourceKey::Kind::Port, src.index()}, p.path, p.dest);
}

std::optional<Token> Switch::peek(LocalPort p) const {
  const auto& inbox = port(p).inbox;
  if (inbox.empty()) return std::nullopt;
  return inbox.front();
}

void Switch::consume(LocalPort p) {
  auto& inbox = port(p).inbox;
  if (inbox.empty()) return;
  tracer_.port_token(time_, false, p.unit, p.thread, p.port, inbox.front());
  inbox.pop_front();
  ++activity_;
}

void Switch::orphan(std::optional<Sink>& path) {
  if (!path) return;
  Stream s{next_stream_++, 0, {Token::end()}, path, std::nullopt};
  claim_of(*path) = SourceKey{SourceKey::Kind::Stream, s.id};
  path.reset();
  streams_.push_back(std::move(s));
}

void Switch::abandon_thread(unsigned unit, unsigned thread) {
  for (unsigned p = 0; p < kPortsPerThread; ++p) orphan(port({unit, thread, p}).path);
}

void Switch::reset_thread(unsigned unit, unsigned thread) {
  abandon_thread(unit, thread);
  for (unsigned p = 0; p < kPortsPerThread; ++p) {
    auto& state = port({unit, thread, p});
    state.dest = 0;
    state.inbox.clear();
  }
  const unsigned slot = unit * kThreadsPerUnit + thread;
  std::deque<Stream> kept;
  for (auto& s : streams_) {
    if (s.owner != slot) {
      kept.push_back(std::move(s));
    } else if (s.path) {
      s.owner.reset();
      s.tokens = {Token::end()};
      kept.push_back(std::move(s));
    }
  }
  streams_ = std::move(kept);
}

void Switch::post_message(Word dest, std::vector<Token> tokens, std::optional<unsigned> owner_slot) {
  Stream s{next_stream_++, dest, {tokens.begin(), tokens.end()}, std::nullopt, owner_slot};
  streams_.push_back(std::move(s));
}

void Switch::apply_config(std::span<const Word> words) {
  for (std::size_t i = 0; i + 3 <= words.size(); i += 3) {
    const Word type = words[i], key = words[i + 1], value = words[i + 2];
    switch (type) {
      case 0:
        routes_.set(key, value & 3);
        tracer_.note(time_, fmt::format("route {} -> link{}", key & kMaxProcessorId, value & 3));
        break;
      case 1:
        lines_[key & 7].inbound_dest = GlobalPort{value};
        break;
      default:
        break;
    }
  }
}

void Switch::attach_line(unsigned line, std::unique_ptr<ByteSource> source, std::unique_ptr<ByteSink> sink) {
  auto& l = lines_[line & 7];
  l.source = source ? std::move(source) : std::make_unique<NullSource>();
  l.sink = sink ? std::move(sink) : std::make_unique<NullSink>();
  l.closed = false;
  l.pending.reset();
}

bool Switch::awaiting_input() const {
  return std::any_of(lines_.begin(), lines_.end(),
                     [](const Line& l) { return l.inbound_dest && !l.closed; });
}

std::size_t Switch::pump_links() {
  std::size_t moved = 0;
  for (unsigned k = 0; k < kExternalLinks; ++k) {
    auto& link = links_[k];
    const SourceKey key{SourceKey::Kind::Link, k};
    while (!link.inbound.empty()) {
      const Frame f = link.inbound.front();
      if (f.tag == Frame::Tag::Header) {
        if (link.inbound_path) orphan(link.inbound_path);
        link.inbound_dest = f.payload;
        link.discarding = false;
        link.inbound.pop_front();
        if (tracer_.external(TraceMasks::kLinkBit + k))
          tracer_.external_token(time_, false, fmt::format("link{}", k), to_string(f));
        continue;
      }
      const Token tok = f.token();
      const bool closes = !tok.is_data();
      if (!link.inbound_dest || link.discarding) {
        link.inbound.pop_front();
        if (closes) {
          link.inbound_dest.reset();
          link.discarding = false;
        }
        continue;
      }
      const SendStatus s = offer(key, link.inbound_path, *link.inbound_dest, tok);
      if (s == SendStatus::Rejected) break;
      if (tracer_.external(TraceMasks::kLinkBit + k))
        tracer_.external_token(time_, false, fmt::format("link{}", k), to_string(f));
      link.inbound.pop_front();
      if (s == SendStatus::IllegalRoute) {
        tracer_.note(time_, fmt::format("link{}: no route for 0x{:08x}, segment dropped", k, *link.inbound_dest));
        link.discarding = !closes;
        if (closes) link.inbound_dest.reset();
        continue;
      }
      ++moved;
      if (closes) link.inbound_dest.reset();
    }
  }
  return moved;
}

std::size_t Switch::pump_lines() {
  std::size_t moved = 0;
  for (unsigned k = 0; k < kPeripheralLines; ++k) {
    auto& line = lines_[k];
    if (!line.inbound_dest || line.closed) continue;
    const SourceKey key{SourceKey::Kind::Line, k};
    const Word dest = line.inbound_dest->raw();
    for (unsigned burst = 0; burst < kLineBurst; ++burst) {
      if (!line.pending) {
        const auto r = line.source->poll();
        if (r.state == ByteSource::State::Byte) {
          line.pending = r.byte;
          if (tracer_.external(TraceMasks::kLineBit + k))
            tracer_.external_token(time_, false, fmt::format("line{}", k), to_string(Token::data(r.byte)));
        } else if (r.state == ByteSource::State::Idle) {
          if (line.path) offer(key, line.path, dest, Token::pause());
          break;
        } else {
          const SendStatus s = offer(key, line.path, dest, Token::end());
          if (s == SendStatus::Rejected) break;
          line.closed = true;
          ++moved;
          break;
        }
      }
      const SendStatus s = offer(key, line.path, dest, Token::data(*line.pending));
      if (s == SendStatus::Rejected) break;
      if (s == SendStatus::IllegalRoute) {
        tracer_.note(time_, fmt::format("line{}: no route for 0x{:08x}, byte dropped", k, dest));
        line.pending.reset();
        break;
      }
      line.pending.reset();
      ++moved;
    }
  }
  return moved;
}

std::size_t Switch::pump_streams() {
  std::size_t moved = 0;
  for (auto it = streams_.begin(); it != streams_.end();) {
    auto& s = *it;
    bool dropped = false;
    while (!s.tokens.empty()) {
      const SendStatus st = offer({SourceKey::Kind::Stream, s.id}, s.path, s.dest, s.tokens.front());
      if (st == SendStatus::Rejected) break;
      if (st == SendStatus::IllegalRoute) {
        tracer_.note(time_, fmt::format("message to 0x{:08x} has no route, dropped", s.dest));
        dropped = true;
        break;
      }
      s.tokens.pop_front();
      ++moved;
    }
    if (dropped || s.tokens.empty()) {
      it = streams_.erase(it);
    } else {
      ++it;
    }
  }
  return moved;
}

std::size_t Switch::pump() {
  std::size_t moved = pump_links();
  moved += pump_streams();
  moved += pump_lines();
  return moved;
}

std::vector<std::string> Switch::describe_blockage() const {
  std::vector<std::string> out;
  for (unsigned i = 0; i < kLocalPorts; ++i) {
    const auto& p = ports_[i];
    const LocalPort lp = LocalPort::from_index(i);
    if (p.path) out.push_back(fmt::format("{} holds a path to 0x{:08x}", port_name(lp), p.dest));
    if (!p.inbox.empty())
      out.push_back(fmt::format("{} has {} unread token(s)", port_name(lp), p.inbox.size()));
  }
  for (unsigned k = 0; k < kExternalLinks; ++k) {
    const auto& l = links_[k];
    if (!l.outbound.empty() || !l.inbound.empty())
      out.push_back(fmt::format("link{}: {} frame(s) out, {} in{}", k, l.outbound.size(), l.inbound.size(),
                                l.up ? "" : " (down)"));
  }
  for (const auto& s : streams_)
    out.push_back(fmt::format("switch message to 0x{:08x}: {} token(s) pending", s.dest, s.tokens.size()));
  return out;
}

}  // namespace nop
