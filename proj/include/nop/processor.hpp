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
#include <functional>
#include <string>
#include <vector>

#include "nop/isa.hpp"
#include "nop/switch.hpp"
#include "nop/thread.hpp"
#include "nop/trace.hpp"

namespace nop {

struct ProcessingUnit {
  std::array<Word, kMemoryWords> memory{};
  std::array<ThreadContext, kThreadsPerUnit> threads{};
  unsigned number = 0;
};

struct StopRecord {
  unsigned unit;
  unsigned thread;
  FaultReason reason;
  Word ip;
};

struct ProcessorConfig {
  Word processor_id = kFirstProcessorId;
  TraceMasks trace;
  std::ostream* trace_out = nullptr;
  bool debug = false;
  /// Called on BREAK in debug mode; the thread resumes when it returns.
  std::function<void(unsigned unit, unsigned thread, const ThreadContext&)> on_break;
};

struct RoundReport {
  unsigned completed = 0;  // instructions executed to completion (or fault)
  unsigned blocked = 0;
  unsigned runnable = 0;   // Running or Blocked threads after the round
  unsigned timed = 0;      // threads blocked in WAITTMO
  std::size_t moved = 0;   // tokens moved by the switch, including thread traffic
  unsigned stopped = 0;

  bool idle() const { return completed == 0 && moved == 0 && timed == 0; }
};

/// One simulated processor: four processing units of eight threads each, a
/// communication switch, and the global time counter.
class Processor {
 public:
  explicit Processor(ProcessorConfig config = {});

  /// Installs the boot ROM in every unit and starts thread 0 of each unit in it.
  void reset();

  /// One scheduler round: switch pump, one step of every runnable thread in
  /// unit/thread order, then time advances by one.
  RoundReport run_round();

  /// Runs rounds until `done` returns true or `max_rounds` elapse; returns the
  /// number of rounds run.
  std::uint64_t run_until(const std::function<bool(const Processor&)>& done, std::uint64_t max_rounds);
  /// Runs until a round is idle and no peripheral input is pending.
  std::uint64_t run_to_quiescence(std::uint64_t max_rounds);

  /// Delivers an init message (position word + code words, END appended) to
  /// unit 0, thread 0, port 0.
  void deliver_init(std::span<const Word> message);

  Word id() const { return config_.processor_id; }
  Word time() const { return time_; }
  Switch& fabric() { return switch_; }
  const Switch& fabric() const { return switch_; }
  ProcessingUnit& unit(unsigned u) { return units_[u]; }
  const ProcessingUnit& unit(unsigned u) const { return units_[u]; }
  ThreadContext& thread(unsigned u, unsigned t) { return units_[u].threads[t]; }
  const ThreadContext& thread(unsigned u, unsigned t) const { return units_[u].threads[t]; }

  const std::vector<StopRecord>& stops() const { return stops_; }
  bool any_faults() const;
  /// Blocked threads and switch claims, for deadlock reports.
  std::vector<std::string> describe_blocked() const;

  /// Words on a thread's stack, top first.
  std::vector<Word> stack(unsigned u, unsigned t) const;

 private:
  friend class ThreadServices;

  void emit_exception(unsigned u, unsigned t);
  std::optional<unsigned> start_thread(unsigned u, const ThreadLaunch& launch);

  ProcessorConfig config_;
  Tracer tracer_;
  Switch switch_;
  std::array<ProcessingUnit, kUnits> units_{};
  Word time_ = 0;
  std::vector<StopRecord> stops_;
};

}  // namespace nop
