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
#include <optional>

#include "nop/isa.hpp"
#include "nop/token.hpp"

namespace nop {

/// Per-port event vectors of one thread. Vectors are absolute opcode positions.
class EventTable {
 public:
  struct Entry {
    std::optional<std::uint16_t> out;
    std::optional<std::uint16_t> in;
    std::optional<std::uint16_t> end;
  };

  void clear() { entries_ = {}; }
  bool empty() const;

  Entry& operator[](unsigned port) { return entries_[port & 31]; }
  const Entry& operator[](unsigned port) const { return entries_[port & 31]; }

  friend bool operator==(const EventTable&, const EventTable&) = default;

 private:
  std::array<Entry, kPortsPerThread> entries_{};
};

enum class RunState : std::uint8_t { Unstarted, Running, Blocked, Stopped };

/// Register file and bookkeeping of one hardware thread.
struct ThreadContext {
  Word ip = 0;  // opcode granular; word = ip >> 2, slot = ip & 3
  Word sp = 0;  // word index, grows downward
  Word lc0 = 0, lc1 = 0;
  Word ld0 = 0, ld1 = 0;
  Word exc = 0;
  RunState state = RunState::Unstarted;
  std::optional<FaultReason> stop_reason;
  Word cycles = 0;
  EventTable events;

  Word cp() const { return lc0 + kPoolOffset; }
  Word dp() const { return ld0 + kPoolOffset; }

  bool runnable() const { return state == RunState::Running || state == RunState::Blocked; }
  bool free_slot() const { return state == RunState::Unstarted || state == RunState::Stopped; }
};

/// Word-addressable memory seen by a thread. Addresses are physical word indices
/// already checked against the thread's limits and the memory size.
class Memory {
 public:
  virtual ~Memory() = default;
  virtual Word load(Word addr) const = 0;
  virtual void store(Word addr, Word value) = 0;
};

enum class SendStatus : std::uint8_t { Accepted, Rejected, IllegalRoute };

/// The thread's 32 local channel ports, as provided by the communication switch.
class Channels {
 public:
  virtual ~Channels() = default;
  virtual Word destination(unsigned port) const = 0;
  virtual void set_destination(unsigned port, Word dest) = 0;
  virtual SendStatus send(unsigned port, Token tok) = 0;
  /// True when a DATA token sent now would be accepted.
  virtual bool can_send(unsigned port) const = 0;
  virtual std::optional<Token> peek(unsigned port) const = 0;
  virtual void consume(unsigned port) = 0;
};

struct ThreadLaunch {
  Word lc0 = 0, lc1 = 0;
  Word code_start = 0;  // word offset from lc0
  Word ld0 = 0, ld1 = 0;
  Word exc = 0;
};

/// Unit- and processor-level services used by the flow and thread opcodes.
class UnitControl {
 public:
  virtual ~UnitControl() = default;
  virtual Word processor_id() const = 0;
  virtual unsigned unit_number() const = 0;
  virtual unsigned thread_number() const = 0;
  virtual Word time() const = 0;
  virtual Word free_threads() const = 0;
  virtual Word total_cycles() const = 0;
  /// Starts a thread in a free slot of this unit; returns its slot.
  virtual std::optional<unsigned> start_thread(const ThreadLaunch& launch) = 0;
  virtual bool debug() const { return false; }
  virtual void on_break(const ThreadContext&) {}
};

struct ExecEnv {
  Memory& memory;
  Channels& channels;
  UnitControl& unit;
};

enum class StepStatus : std::uint8_t { Continue, Blocked, Stopped };

struct StepResult {
  StepStatus status = StepStatus::Continue;
  FaultReason reason = FaultReason::ExplicitStop;

  static constexpr StepResult ok() { return {}; }
  static constexpr StepResult blocked() { return {StepStatus::Blocked, FaultReason::ExplicitStop}; }
  static constexpr StepResult stopped(FaultReason r) { return {StepStatus::Stopped, r}; }
};

/// Whether `ip` may be fetched by a thread with the given code limits.
bool ip_in_range(const ThreadContext& ctx, Word ip);

/// Executes one instruction of a Running or Blocked thread.
///
/// A blocked instruction leaves the context untouched apart from `state`, so it
/// can be retried from scratch. On a fault the thread is left Stopped with
/// `stop_reason` set; `ip` then names the faulting instruction, or the
/// out-of-range target for IpOutOfRange.
StepResult step(ThreadContext& ctx, ExecEnv& env);

/// Initialises a context as a freshly started thread.
void launch(ThreadContext& ctx, const ThreadLaunch& launch);

}  // namespace nop
