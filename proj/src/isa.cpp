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

#include "nop/isa.hpp"

namespace nop {

namespace {

struct OpInfo {
  std::string_view name;
  StackEffect effect;
};

// Indexed by opcode - 0x80.
constexpr std::array<OpInfo, kOperationCount> kOps = {{
    {"NOP", {0, 0}},     {"ADD", {2, 1}},     {"SUB", {2, 1}},      {"MUL", {2, 1}},
    {"UDIV", {2, 2}},    {"SDIV", {2, 2}},    {"AND", {2, 1}},      {"OR", {2, 1}},
    {"XOR", {2, 1}},     {"POP", {1, 0}},     {"DUP", {1, 2}},      {"EXCH", {2, 2}},
    {"LDX", {1, 1}},     {"SWAP", {2, 1}},    {"DECLD", {1, 1}},    {"LOG2", {1, 1}},
    {"LEFT", {3, 1}},    {"RIGHT", {3, 1}},   {"SIGN", {1, 1}},     {"ZERO", {1, 1}},
    {"UJP", {1, 0}},     {"FJP", {2, 0}},     {"LDC", {1, 1}},      {"LD", {1, 1}},
    {"ST", {2, 0}},      {"COUNT", {1, 1}},   {"STOP", {0, 0}},     {"BREAK", {0, 0}},
    {"START", {6, 1}},   {"CALL", {1, 1}},    {"JUMP", {1, 0}},     {"STX", {2, 0}},
    {"LDINC", {1, 1}},   {"GETPORT", {1, 1}}, {"SETPORT", {2, 0}},  {"OUT", {2, 0}},
    {"OUTEND", {1, 0}},  {"OUTPAUSE", {1, 0}}, {"IN", {1, 1}},      {"INMORE", {1, 1}},
    {"EVCLEAR", {0, 0}}, {"EVOUT", {2, 0}},   {"EVIN", {2, 0}},     {"EVEND", {2, 0}},
    {"WAIT", {0, 0}},    {"NOW", {0, 1}},     {"WAITTMO", {1, 0}},  {"POPN", {1, 0, true}},
    {"ULESS", {2, 1}},   {"SLESS", {2, 1}},   {"COMBINE", {2, 1}},  {"PORT", {1, 1}},
    {"LDAX", {1, 1}},    {"THREADS", {0, 1}}, {"THRCYC", {0, 1}},   {"CYCLES", {0, 1}},
}};

}  // namespace

std::string_view mnemonic(Op op) {
  const auto b = static_cast<unsigned>(op);
  if (b < kFirstOperation || b > kLastOperation) return {};
  return kOps[b - kFirstOperation].name;
}

std::optional<Op> op_from_mnemonic(std::string_view name) {
  for (unsigned i = 0; i < kOps.size(); ++i) {
    if (kOps[i].name == name) return static_cast<Op>(kFirstOperation + i);
  }
  return std::nullopt;
}

StackEffect stack_effect(Opcode op) {
  switch (op.kind()) {
    case OpcodeKind::Immediate: return {0, 1};
    case OpcodeKind::Operation: return kOps[op.byte - kFirstOperation].effect;
    case OpcodeKind::Illegal: break;
  }
  return {};
}

bool ends_straight_line(Op op) {
  switch (op) {
    case Op::UJP: case Op::FJP: case Op::CALL: case Op::JUMP: case Op::STOP:
    case Op::WAIT: case Op::WAITTMO: case Op::POPN:
      return true;
    default:
      return false;
  }
}

std::string_view fault_name(FaultReason reason) {
  switch (reason) {
    case FaultReason::ExplicitStop: return "stop";
    case FaultReason::IllegalOpcode: return "illegal instruction";
    case FaultReason::IpOutOfRange: return "ip out of range";
    case FaultReason::SpOutOfRange: return "sp out of range";
    case FaultReason::DivideByZero: return "division by zero";
    case FaultReason::EndOnInput: return "end token on input";
    case FaultReason::NoThreadAvailable: return "no thread available";
    case FaultReason::IllegalRoute: return "illegal route";
  }
  return "unknown";
}

}  // namespace nop
