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

#include "nop/processor.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "nop/assembler.hpp"

namespace nop {

/// Binds one thread slot to its unit memory, switch ports and unit services.
class ThreadServices final : public Memory, public Channels, public UnitControl {
 public:
  ThreadServices(Processor& proc, unsigned unit, unsigned thread)
      : proc_(proc), unit_(proc.units_[unit]), u_(unit), t_(thread) {}

  Word load(Word addr) const override { return unit_.memory[addr]; }
  void store(Word addr, Word value) override { unit_.memory[addr] = value; }

  Word destination(unsigned port) const override { return proc_.switch_.destination(local(port)); }
  void set_destination(unsigned port, Word dest) override { proc_.switch_.set_destination(local(port), dest); }
  SendStatus send(unsigned port, Token tok) override { return proc_.switch_.submit(local(port), tok); }
  bool can_send(unsigned port) const override { return proc_.switch_.can_accept(local(port)); }
  std::optional<Token> peek(unsigned port) const override { return proc_.switch_.peek(local(port)); }
  void consume(unsigned port) override { proc_.switch_.consume(local(port)); }

  Word processor_id() const override { return proc_.id(); }
  unsigned unit_number() const override { return u_; }
  unsigned thread_number() const override { return t_; }
  Word time() const override { return proc_.time_; }
  Word free_threads() const override {
    return static_cast<Word>(std::count_if(unit_.threads.begin(), unit_.threads.end(),
                                           [](const ThreadContext& c) { return c.free_slot(); }));
  }
  Word total_cycles() const override {
    Word sum = 0;
    for (const auto& c : unit_.threads) sum += c.cycles;
    return sum;
  }
  std::optional<unsigned> start_thread(const ThreadLaunch& launch) override {
    return proc_.start_thread(u_, launch);
  }
  bool debug() const override { return proc_.config_.debug; }
  void on_break(const ThreadContext& ctx) override {
    if (proc_.config_.on_break) proc_.config_.on_break(u_, t_, ctx);
  }

 private:
  LocalPort local(unsigned port) const { return {u_, t_, port & 31}; }

  Processor& proc_;
  ProcessingUnit& unit_;
  unsigned u_;
  unsigned t_;
};

Processor::Processor(ProcessorConfig config)
    : config_(std::move(config)),
      tracer_(config_.trace_out ? Tracer(*config_.trace_out, config_.processor_id, config_.trace) : Tracer()),
      switch_(config_.processor_id, tracer_) {
  for (unsigned u = 0; u < kUnits; ++u) units_[u].number = u;
  reset();
}

void Processor::reset() {
  const auto& rom = boot_rom_image();
  for (unsigned u = 0; u < kUnits; ++u) {
    auto& unit = units_[u];
    unit.memory.fill(0);
    std::copy(rom.begin(), rom.end(), unit.memory.begin() + kBootRomBase);
    for (unsigned t = 0; t < kThreadsPerUnit; ++t) {
      switch_.reset_thread(u, t);
      unit.threads[t] = ThreadContext{};
    }
    ThreadLaunch boot;
    boot.lc0 = 0;
    boot.lc1 = kMemoryWords;
    boot.code_start = kBootRomBase;
    boot.ld0 = 0;
    boot.ld1 = kBootRomBase;
    boot.exc = 0;
    launch(unit.threads[0], boot);
  }
  time_ = 0;
  stops_.clear();
}

std::optional<unsigned> Processor::start_thread(unsigned u, const ThreadLaunch& l) {
  auto& threads = units_[u].threads;
  for (unsigned t = 0; t < kThreadsPerUnit; ++t) {
    if (!threads[t].free_slot()) continue;
    switch_.reset_thread(u, t);
    launch(threads[t], l);
    return t;
  }
  return std::nullopt;
}

void Processor::emit_exception(unsigned u, unsigned t) {
  const auto& ctx = units_[u].threads[t];
  if (ctx.exc == 0) return;
  const Word reason = static_cast<Word>(ctx.stop_reason.value_or(FaultReason::ExplicitStop));
  switch_.post_message(ctx.exc,
                       {Token::data(GlobalPort::pack(id(), u, t, 0).raw()), Token::data(reason),
                        Token::data(ctx.ip), Token::end()},
                       u * kThreadsPerUnit + t);
}

RoundReport Processor::run_round() {
  RoundReport report;
  switch_.set_time(time_);
  const auto activity_before = switch_.activity();
  switch_.pump();

  for (unsigned u = 0; u < kUnits; ++u) {
    for (unsigned t = 0; t < kThreadsPerUnit; ++t) {
      auto& ctx = units_[u].threads[t];
      if (!ctx.runnable()) continue;
      ThreadServices services(*this, u, t);
      ExecEnv env{services, services, services};

      const Word ip = ctx.ip;
      const bool fetchable = ip_in_range(ctx, ip);
      const Opcode code = fetchable ? decode(units_[u].memory[ip >> 2], ip & 3) : Opcode{};
      const StepResult r = step(ctx, env);

      if (r.status == StepStatus::Blocked) {
        ++report.blocked;
        if (code.is_operation() && code.op() == Op::WAITTMO) ++report.timed;
        continue;
      }
      ++report.completed;
      if (fetchable && tracer_.instructions(u, t)) {
        std::optional<Word> tos;
        if (ctx.sp < ctx.ld1 && ctx.sp < kMemoryWords) tos = units_[u].memory[ctx.sp];
        tracer_.instruction(time_, u, t, ip, code, ctx.sp, tos);
      }
      if (r.status == StepStatus::Stopped) {
        ++report.stopped;
        stops_.push_back({u, t, r.reason, ctx.ip});
        if (r.reason != FaultReason::ExplicitStop || tracer_.instructions(u, t))
          tracer_.note(time_, fmt::format("u{}t{} stopped at ip={:04x}: {}", u, t, ctx.ip, fault_name(r.reason)));
        switch_.abandon_thread(u, t);
        emit_exception(u, t);
      }
    }
  }

  for (const auto& unit : units_)
    report.runnable += static_cast<unsigned>(
        std::count_if(unit.threads.begin(), unit.threads.end(), [](const auto& c) { return c.runnable(); }));
  report.moved = static_cast<std::size_t>(switch_.activity() - activity_before);
  ++time_;
  return report;
}

std::uint64_t Processor::run_until(const std::function<bool(const Processor&)>& done, std::uint64_t max_rounds) {
  std::uint64_t n = 0;
  while (n < max_rounds && !done(*this)) {
    run_round();
    ++n;
  }
  return n;
}

std::uint64_t Processor::run_to_quiescence(std::uint64_t max_rounds) {
  std::uint64_t n = 0;
  while (n < max_rounds) {
    const RoundReport r = run_round();
    ++n;
    if (r.idle() && !switch_.awaiting_input()) break;
  }
  return n;
}

void Processor::deliver_init(std::span<const Word> message) {
  std::vector<Token> tokens;
  tokens.reserve(message.size() + 1);
  for (const Word w : message) tokens.push_back(Token::data(w));
  tokens.push_back(Token::end());
  switch_.post_message(GlobalPort::pack(kCmdLocalUnit, 0, 0, 0).raw(), std::move(tokens));
}

bool Processor::any_faults() const {
  return std::any_of(stops_.begin(), stops_.end(),
                     [](const StopRecord& s) { return s.reason != FaultReason::ExplicitStop; });
}

std::vector<std::string> Processor::describe_blocked() const {
  std::vector<std::string> out;
  for (unsigned u = 0; u < kUnits; ++u) {
    for (unsigned t = 0; t < kThreadsPerUnit; ++t) {
      const auto& ctx = units_[u].threads[t];
      if (ctx.state != RunState::Blocked) continue;
      const Opcode code = decode(units_[u].memory[(ctx.ip >> 2) % kMemoryWords], ctx.ip & 3);
      out.push_back(fmt::format("u{}t{} blocked at ip={:04x} on {}", u, t, ctx.ip, opcode_text(code)));
    }
  }
  for (auto& line : switch_.describe_blockage()) out.push_back(std::move(line));
  return out;
}

std::vector<Word> Processor::stack(unsigned u, unsigned t) const {
  const auto& ctx = units_[u].threads[t];
  std::vector<Word> out;
  for (Word a = ctx.sp; a < ctx.ld1 && a < kMemoryWords; ++a) out.push_back(units_[u].memory[a]);
  return out;
}

}  // namespace nop
