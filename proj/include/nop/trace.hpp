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

#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "nop/frame.hpp"
#include "nop/isa.hpp"
#include "nop/token.hpp"

namespace nop {

struct TraceMasks {
  Word instructions = 0;  // bit k: unit k / 8, thread k % 8
  Word internal = 0;      // same layout
  Word external = 0;      // bits 0..3 links, 4..11 peripheral lines, 12 router config

  static constexpr unsigned kLinkBit = 0;
  static constexpr unsigned kLineBit = 4;
  static constexpr unsigned kConfigBit = 12;
  static constexpr Word kExternalAll = 0x1FFF;
};

constexpr unsigned thread_bit(unsigned unit, unsigned thread) { return unit * kThreadsPerUnit + thread; }

/// Writes trace lines. Every line is assembled first and written with a single
/// call, so lines never interleave partially.
///
/// Line formats (time is the global round counter):
///   @<time> n<id> u<unit>t<thread> ip=<hex4> <op> sp=<hex4> tos=<hex8|->
///   @<time> n<id> <tx|rx> <endpoint> <token>
/// Endpoints: u<unit>t<thread>p<port>, link<k>, line<k>, config.
class Tracer {
 public:
  Tracer() = default;
  Tracer(std::ostream& out, Word processor_id, TraceMasks masks)
      : out_(&out), id_(processor_id), masks_(masks) {}

  bool instructions(unsigned unit, unsigned thread) const {
    return out_ && ((masks_.instructions >> thread_bit(unit, thread)) & 1);
  }
  bool internal(unsigned unit, unsigned thread) const {
    return out_ && ((masks_.internal >> thread_bit(unit, thread)) & 1);
  }
  bool external(unsigned bit) const { return out_ && ((masks_.external >> bit) & 1); }

  void instruction(Word time, unsigned unit, unsigned thread, Word ip, Opcode code, Word sp,
                   std::optional<Word> tos) const;
  void port_token(Word time, bool transmit, unsigned unit, unsigned thread, unsigned port,
                  Token tok) const;
  void external_token(Word time, bool transmit, std::string_view endpoint, std::string_view what) const;
  /// Diagnostic line, written when any mask bit is set.
  void note(Word time, std::string_view text) const;

 private:
  void write(const std::string& line) const;

  std::ostream* out_ = nullptr;
  Word id_ = 0;
  TraceMasks masks_;
};

/// Opcode as it appears in traces and listings: mnemonic, decimal immediate,
/// or `.byte 0xNN` for illegal bytes.
std::string opcode_text(Opcode code);

}  // namespace nop
