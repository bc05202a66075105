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


#include "support/channel_property.hpp"

#include <random>
#include <vector>

#include <fmt/format.h>

#include "nop/switch.hpp"

namespace noptest {

namespace {

using nop::LocalPort;
using nop::Token;
using nop::Word;

struct Sender {
  LocalPort port;
  std::vector<Token> script;  // DATA / PAUSE / END
  std::size_t next = 0;
};

std::vector<Token> make_script(std::mt19937_64& rng, unsigned who) {
  std::vector<Token> out;
  const unsigned messages = std::uniform_int_distribution<unsigned>(1, 6)(rng);
  Word seq = 0;
  for (unsigned m = 0; m < messages; ++m) {
    const unsigned len = std::uniform_int_distribution<unsigned>(1, 8)(rng);
    for (unsigned i = 0; i < len; ++i) {
      out.push_back(Token::data((who << 24) | seq++));
      if (i + 1 < len && std::bernoulli_distribution(0.15)(rng)) out.push_back(Token::pause());
    }
    out.push_back(Token::end());
  }
  return out;
}

// Returns an empty string when the trial satisfies every property.
std::string trial(std::mt19937_64& rng, ChannelReport& report) {
  nop::Switch sw(8);
  const LocalPort target{1, 0, 5};
  const Word dest = nop::GlobalPort::pack(0, target.unit, target.thread, target.port).raw();
  std::vector<Sender> senders{{{0, 0, 0}, make_script(rng, 1)}, {{2, 3, 7}, make_script(rng, 2)}};
  for (auto& s : senders) sw.set_destination(s.port, dest);

  // Received stream, with the sender of each token.
  std::vector<std::pair<unsigned, Token>> got;
  std::size_t expected = 0;
  for (const auto& s : senders)
    for (const Token& t : s.script) {
      if (t.is_pause()) {
        ++report.pauses_sent;
      } else {
        ++report.tokens_sent;
        ++expected;
      }
    }

  for (unsigned steps = 0; got.size() < expected; ++steps) {
    if (steps > 100000) return "no progress";
    const unsigned action = std::uniform_int_distribution<unsigned>(0, 3)(rng);
    if (action < 2) {
      auto& s = senders[action];
      if (s.next < s.script.size()) {
        const auto st = sw.submit(s.port, s.script[s.next]);
        if (st == nop::SendStatus::IllegalRoute) return "illegal route";
        if (st == nop::SendStatus::Accepted) ++s.next;
      }
    } else if (action == 2) {
      if (const auto tok = sw.peek(target)) {
        if (tok->is_pause()) ++report.pauses_received;
        const unsigned who = tok->is_data() ? tok->value >> 24 : 0;
        got.emplace_back(who, *tok);
        sw.consume(target);
      }
    } else {
      sw.pump();
    }
  }
  if (sw.peek(target)) return "extra token delivered";
  if (report.pauses_received) return "PAUSE delivered";
  report.tokens_received += got.size();

  // Attribute END tokens to the sender whose segment they close, and check
  // each sender's tokens arrive complete and in order.
  std::vector<std::size_t> pos(senders.size(), 0);
  std::optional<unsigned> owner;
  for (const auto& [who_data, tok] : got) {
    unsigned who;
    if (tok.is_data()) {
      who = who_data - 1;
      if (owner && *owner != who) return fmt::format("sender {} interleaved into a segment of sender {}", who, *owner);
    } else {
      if (!owner) return "END outside any segment";
      who = *owner;
    }
    auto& s = senders[who];
    if (pos[who] < s.script.size() && s.script[pos[who]].is_pause()) ++pos[who];
    if (pos[who] >= s.script.size() || s.script[pos[who]] != tok)
      return fmt::format("sender {} token {} out of order", who, pos[who]);
    ++pos[who];
    const bool segment_ends = tok.is_end() || (pos[who] < s.script.size() && s.script[pos[who]].is_pause());
    owner = segment_ends ? std::nullopt : std::optional<unsigned>(who);
  }
  return {};
}

}  // namespace

ChannelReport run_channel_property(std::uint64_t seed, unsigned trials) {
  std::mt19937_64 rng(seed);
  ChannelReport report;
  for (unsigned i = 0; i < trials; ++i) {
    ++report.trials;
    const std::string failure = trial(rng, report);
    if (failure.empty()) {
      ++report.passed;
    } else if (report.first_failure.empty()) {
      report.first_failure = fmt::format("trial {}: {}", i, failure);
    }
  }
  return report;
}

}  // namespace noptest
