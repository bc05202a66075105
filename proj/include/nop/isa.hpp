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
#include <optional>
#include <string_view>

namespace nop {

using Word = std::uint32_t;
using SignedWord = std::int32_t;

// Architecture parameters.
inline constexpr unsigned kUnits = 4;
inline constexpr unsigned kThreadsPerUnit = 8;
inline constexpr unsigned kPortsPerThread = 32;
inline constexpr unsigned kMemoryWords = 16384;
inline constexpr unsigned kExternalLinks = 4;
inline constexpr unsigned kPeripheralLines = 8;

inline constexpr Word kBootRomBase = 0x3FC0;
inline constexpr Word kBootRomWords = 64;
/// Offset of the constant pool from lc0 and of the data pool from ld0.
inline constexpr Word kPoolOffset = 64;

inline constexpr Word kTrue = 0xFFFFFFFFu;
inline constexpr Word kFalse = 0;

enum class Op : std::uint8_t {
  NOP = 0x80, ADD, SUB, MUL, UDIV, SDIV, AND, OR, XOR, POP, DUP, EXCH, LDX, SWAP, DECLD, LOG2,
  LEFT = 0x90, RIGHT, SIGN, ZERO, UJP, FJP, LDC, LD, ST, COUNT, STOP, BREAK, START, CALL, JUMP, STX,
  LDINC = 0xA0, GETPORT, SETPORT, OUT, OUTEND, OUTPAUSE, IN, INMORE, EVCLEAR, EVOUT, EVIN, EVEND,
  WAIT, NOW, WAITTMO, POPN,
  ULESS = 0xB0, SLESS, COMBINE, PORT, LDAX, THREADS, THRCYC, CYCLES,
};

inline constexpr unsigned kFirstOperation = 0x80;
inline constexpr unsigned kLastOperation = 0xB7;
inline constexpr unsigned kOperationCount = kLastOperation - kFirstOperation + 1;

enum class OpcodeKind : std::uint8_t { Immediate, Operation, Illegal };

/// One decoded 8-bit opcode.
struct Opcode {
  std::uint8_t byte = 0;

  constexpr OpcodeKind kind() const {
    if (byte < 0x80 || byte >= 0xC0) return OpcodeKind::Immediate;
    if (byte <= kLastOperation) return OpcodeKind::Operation;
    return OpcodeKind::Illegal;
  }
  constexpr bool is_immediate() const { return kind() == OpcodeKind::Immediate; }
  constexpr bool is_operation() const { return kind() == OpcodeKind::Operation; }
  constexpr bool is_illegal() const { return kind() == OpcodeKind::Illegal; }
  constexpr Op op() const { return static_cast<Op>(byte); }

  friend constexpr bool operator==(Opcode, Opcode) = default;
};

constexpr Opcode decode(Word word, unsigned slot) {
  return Opcode{static_cast<std::uint8_t>((word >> (8 * (slot & 3))) & 0xFF)};
}

/// Sign-extended value loaded by an immediate opcode.
constexpr Word imm_value(Opcode op) {
  return static_cast<Word>(static_cast<SignedWord>(static_cast<std::int8_t>(op.byte)));
}

/// Signed integer value (-64..127) an immediate opcode stands for.
constexpr int imm_integer(Opcode op) {
  return op.byte < 0x80 ? static_cast<int>(op.byte) : static_cast<int>(op.byte) - 256;
}

/// Immediate opcode for an integer in -64..127, if it has one.
constexpr std::optional<Opcode> immediate_for(long long value) {
  if (value < -64 || value > 127) return std::nullopt;
  return Opcode{static_cast<std::uint8_t>(value & 0xFF)};
}

std::string_view mnemonic(Op op);
std::optional<Op> op_from_mnemonic(std::string_view name);

/// Static stack effect of an operation: words popped and pushed. POPN pops a
/// further, data-dependent number of words and is flagged `variable`.
struct StackEffect {
  std::uint8_t pops = 0;
  std::uint8_t pushes = 0;
  bool variable = false;
};
StackEffect stack_effect(Opcode op);

/// Operations after which straight-line stack tracking cannot continue.
bool ends_straight_line(Op op);

/// 32-bit global port number: routing command / processor id, unit, thread, port.
class GlobalPort {
 public:
  constexpr GlobalPort() = default;
  constexpr explicit GlobalPort(Word raw) : raw_(raw) {}

  static constexpr GlobalPort pack(Word command, Word unit, Word thread, Word port) {
    return GlobalPort{((command & 0x3FFFFF) << 10) | ((unit & 3) << 8) | ((thread & 7) << 5) |
                      (port & 31)};
  }

  constexpr Word raw() const { return raw_; }
  constexpr Word command() const { return raw_ >> 10; }
  constexpr unsigned unit() const { return (raw_ >> 8) & 3; }
  constexpr unsigned thread() const { return (raw_ >> 5) & 7; }
  constexpr unsigned port() const { return raw_ & 31; }

  constexpr GlobalPort with_command(Word command) const {
    return pack(command, unit(), thread(), port());
  }

  friend constexpr bool operator==(GlobalPort, GlobalPort) = default;

 private:
  Word raw_ = 0;
};

inline constexpr Word kCmdLocalUnit = 0;
inline constexpr Word kCmdPeripheral = 1;
inline constexpr Word kCmdRouterConfig = 2;
inline constexpr Word kCmdFirstLink = 4;
inline constexpr Word kFirstProcessorId = 8;
inline constexpr Word kMaxProcessorId = 0x3FFFFF;

enum class RouteKind : std::uint8_t { LocalUnit, PeripheralLine, RouterConfig, ExternalLink, Table, Illegal };

struct RouteTarget {
  RouteKind kind = RouteKind::Illegal;
  /// Link number for ExternalLink, processor id for Table.
  Word index = 0;

  friend constexpr bool operator==(RouteTarget, RouteTarget) = default;
};

constexpr RouteTarget classify_route(GlobalPort p) {
  const Word cmd = p.command();
  switch (cmd) {
    case kCmdLocalUnit: return {RouteKind::LocalUnit, 0};
    case kCmdPeripheral: return {RouteKind::PeripheralLine, 0};
    case kCmdRouterConfig: return {RouteKind::RouterConfig, 0};
    case 3: return {RouteKind::Illegal, 3};
    case 4: case 5: case 6: case 7: return {RouteKind::ExternalLink, cmd - kCmdFirstLink};
    default: return {RouteKind::Table, cmd};
  }
}

/// Reason codes carried in exception messages; values are part of the wire format.
enum class FaultReason : std::uint8_t {
  ExplicitStop = 0,
  IllegalOpcode = 1,
  IpOutOfRange = 2,
  SpOutOfRange = 3,
  DivideByZero = 4,
  EndOnInput = 5,
  NoThreadAvailable = 6,
  IllegalRoute = 7,
};
inline constexpr unsigned kFaultReasonCount = 8;

std::string_view fault_name(FaultReason reason);

}  // namespace nop
