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

#include "nop/trace.hpp"

#include <fmt/format.h>

namespace nop {

std::string to_string(Token tok) {
  switch (tok.kind) {
    case Token::Kind::Data: return fmt::format("DATA 0x{:08x}", tok.value);
    case Token::Kind::End: return "END";
    case Token::Kind::Pause: return "PAUSE";
  }
  return "?";
}

std::string opcode_text(Opcode code) {
  switch (code.kind()) {
    case OpcodeKind::Immediate: return std::to_string(imm_integer(code));
    case OpcodeKind::Operation: return std::string(mnemonic(code.op()));
    case OpcodeKind::Illegal: break;
  }
  return fmt::format(".byte 0x{:02X}", code.byte);
}

void Tracer::write(const std::string& line) const {
  out_->write(line.data(), static_cast<std::streamsize>(line.size()));
  out_->flush();
}

void Tracer::instruction(Word time, unsigned unit, unsigned thread, Word ip, Opcode code, Word sp,
                         std::optional<Word> tos) const {
  if (!instructions(unit, thread)) return;
  write(fmt::format("@{} n{} u{}t{} ip={:04x} {:<8} sp={:04x} tos={}\n", time, id_, unit, thread, ip,
                    opcode_text(code), sp, tos ? fmt::format("{:08x}", *tos) : std::string("-")));
}

void Tracer::port_token(Word time, bool transmit, unsigned unit, unsigned thread, unsigned port,
                        Token tok) const {
  if (!internal(unit, thread)) return;
  write(fmt::format("@{} n{} {} u{}t{}p{} {}\n", time, id_, transmit ? "tx" : "rx", unit, thread, port,
                    to_string(tok)));
}

void Tracer::external_token(Word time, bool transmit, std::string_view endpoint,
                            std::string_view what) const {
  write(fmt::format("@{} n{} {} {} {}\n", time, id_, transmit ? "tx" : "rx", endpoint, what));
}

void Tracer::note(Word time, std::string_view text) const {
  if (!out_ || (masks_.instructions | masks_.internal | masks_.external) == 0) return;
  write(fmt::format("@{} n{} ! {}\n", time, id_, text));
}

}  // namespace nop
