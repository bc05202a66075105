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

#include "nop/thread.hpp"

#include <bit>

namespace nop {

bool EventTable::empty() const {
  for (const auto& e : entries_) {
    if (e.out || e.in || e.end) return false;
  }
  return true;
}

bool ip_in_range(const ThreadContext& ctx, Word ip) {
  const std::uint64_t at = ip;
  if (at >= std::uint64_t{kMemoryWords} * 4) return false;
  if (at >= std::uint64_t{ctx.lc0} * 4 && at < std::uint64_t{ctx.lc1} * 4) return true;
  return at >= std::uint64_t{kBootRomBase} * 4;
}

void launch(ThreadContext& ctx, const ThreadLaunch& l) {
  ctx = ThreadContext{};
  ctx.lc0 = l.lc0;
  ctx.lc1 = l.lc1;
  ctx.ld0 = l.ld0;
  ctx.ld1 = l.ld1;
  ctx.exc = l.exc;
  ctx.ip = (l.code_start + l.lc0) * 4;
  ctx.sp = l.ld1;
  ctx.state = RunState::Running;
}

namespace {

struct Fault {
  FaultReason reason;
};

constexpr Word swap_masks[5] = {0x55555555u, 0x33333333u, 0x0F0F0F0Fu, 0x00FF00FFu, 0x0000FFFFu};

Word swap_fields(Word value, Word mask) {
  for (unsigned i = 0; i < 5; ++i) {
    if ((mask >> i) & 1) {
      const unsigned s = 1u << i;
      value = ((value & swap_masks[i]) << s) | ((value >> s) & swap_masks[i]);
    }
  }
  return value;
}

Word funnel_left(Word count, Word rotator, Word shifter) {
  const unsigned n = count & 31;
  const Word source = count < 32 ? shifter : rotator;
  return n == 0 ? source : (source << n) | (rotator >> (32 - n));
}

Word funnel_right(Word count, Word rotator, Word shifter) {
  const unsigned n = count & 31;
  const Word source = count < 32 ? shifter : rotator;
  return n == 0 ? source : (source >> n) | (rotator << (32 - n));
}

// Executes one opcode against a scratch stack pointer; the caller commits.
class Exec {
 public:
  Exec(ThreadContext& ctx, ExecEnv& env) : ctx_(ctx), env_(env), sp_(ctx.sp), next_ip_(ctx.ip + 1) {}

  Word sp() const { return sp_; }
  Word next_ip() const { return next_ip_; }

  StepResult run(Opcode code);

 private:
  [[noreturn]] static void fault(FaultReason r) { throw Fault{r}; }

  bool in_data(std::int64_t addr) const {
    return addr >= ctx_.ld0 && addr < ctx_.ld1 && addr < kMemoryWords;
  }

  Word stack_read(std::int64_t addr) const {
    if (!in_data(addr)) fault(FaultReason::SpOutOfRange);
    return env_.memory.load(static_cast<Word>(addr));
  }
  void data_write(std::int64_t addr, Word value) {
    if (!in_data(addr) || addr >= kBootRomBase) fault(FaultReason::SpOutOfRange);
    env_.memory.store(static_cast<Word>(addr), value);
  }

  Word pop() {
    const Word v = stack_read(sp_);
    ++sp_;
    return v;
  }
  void push(Word v) {
    --sp_;
    data_write(sp_, v);
  }

  std::int64_t data_address(Word index) const {
    return std::int64_t{static_cast<SignedWord>(index)} + ctx_.dp();
  }
  std::int64_t stack_address(Word index) const {
    return std::int64_t{sp_} + static_cast<SignedWord>(index);
  }

  Word load_constant(Word index) const {
    const std::int64_t offset = static_cast<SignedWord>(index);
    const std::int64_t addr = offset + ctx_.cp();
    if (addr >= std::int64_t{ctx_.lc1}) {
      return stack_read(offset - (std::int64_t{ctx_.lc1} - ctx_.lc0) + ctx_.dp());
    }
    if (addr < std::int64_t{ctx_.lc0} || addr >= kMemoryWords) fault(FaultReason::SpOutOfRange);
    return env_.memory.load(static_cast<Word>(addr));
  }

  SendStatus send(unsigned port, Token tok) {
    const SendStatus s = env_.channels.send(port & 31, tok);
    if (s == SendStatus::IllegalRoute) fault(FaultReason::IllegalRoute);
    return s;
  }

  std::optional<std::uint16_t> fired_event() const;

  ThreadContext& ctx_;
  ExecEnv& env_;
  Word sp_;
  Word next_ip_;
};

std::optional<std::uint16_t> Exec::fired_event() const {
  for (unsigned p = 0; p < kPortsPerThread; ++p) {
    const auto& e = ctx_.events[p];
    if (!e.out && !e.in && !e.end) continue;
    if (e.out && env_.channels.can_send(p)) return e.out;
    const auto head = env_.channels.peek(p);
    if (!head) continue;
    if (e.end && head->is_end()) return e.end;
    if (e.in) return e.in;
  }
  return std::nullopt;
}

StepResult Exec::run(Opcode code) {
  if (code.is_immediate()) {
    push(imm_value(code));
    return StepResult::ok();
  }
  if (code.is_illegal()) fault(FaultReason::IllegalOpcode);

  const Word ip = ctx_.ip;
  switch (code.op()) {
    case Op::NOP:
      break;
    case Op::ADD: { Word a = pop(), b = pop(); push(b + a); break; }
    case Op::SUB: { Word a = pop(), b = pop(); push(b - a); break; }
    case Op::MUL: { Word a = pop(), b = pop(); push(b * a); break; }
    case Op::UDIV: {
      const Word a = pop();
      if (a == 0) fault(FaultReason::DivideByZero);
      const Word b = pop();
      const Word q = b / a;
      push(q);
      push(b - q * a);
      break;
    }
    case Op::SDIV: {
      const std::int64_t a = static_cast<SignedWord>(pop());
      if (a == 0) fault(FaultReason::DivideByZero);
      const std::int64_t b = static_cast<SignedWord>(pop());
      std::int64_t r = b % a;
      if (r < 0) r += a < 0 ? -a : a;
      const std::int64_t q = (b - r) / a;
      push(static_cast<Word>(q));
      push(static_cast<Word>(r));
      break;
    }
    case Op::AND: { Word a = pop(), b = pop(); push(b & a); break; }
    case Op::OR: { Word a = pop(), b = pop(); push(b | a); break; }
    case Op::XOR: { Word a = pop(), b = pop(); push(b ^ a); break; }
    case Op::POP:
      ++sp_;
      break;
    case Op::DUP:
      push(stack_read(sp_));
      break;
    case Op::EXCH: { Word a = pop(), b = pop(); push(a); push(b); break; }
    case Op::LDX: {
      const Word a = pop();
      push(stack_read(stack_address(a)));
      break;
    }
    case Op::SWAP: { Word a = pop() & 31, b = pop(); push(swap_fields(b, a)); break; }
    case Op::DECLD: {
      const auto addr = data_address(pop());
      const Word b = stack_read(addr) - 1;
      push(b);
      data_write(addr, b);
      break;
    }
    case Op::LOG2: {
      const Word a = pop();
      push(a == 0 ? kTrue : static_cast<Word>(31 - std::countl_zero(a)));
      break;
    }
    case Op::LEFT: { Word a = pop(), b = pop(), c = pop(); push(funnel_left(a, b, c)); break; }
    case Op::RIGHT: { Word a = pop(), b = pop(), c = pop(); push(funnel_right(a, b, c)); break; }
    case Op::SIGN: push((pop() >> 31) ? kTrue : kFalse); break;
    case Op::ZERO: push(pop() == 0 ? kTrue : kFalse); break;
    case Op::UJP: next_ip_ = ip + pop(); break;
    case Op::FJP: {
      const Word a = pop(), b = pop();
      if (b == 0) next_ip_ = ip + a;
      break;
    }
    case Op::LDC: push(load_constant(pop())); break;
    case Op::LD: push(stack_read(data_address(pop()))); break;
    case Op::ST: {
      const auto addr = data_address(pop());
      data_write(addr, pop());
      break;
    }
    case Op::COUNT: push(static_cast<Word>(std::popcount(pop()))); break;
    case Op::STOP:
      next_ip_ = ip;
      return StepResult::stopped(FaultReason::ExplicitStop);
    case Op::BREAK:
      if (env_.unit.debug()) env_.unit.on_break(ctx_);
      break;
    case Op::START: {
      if (env_.unit.free_threads() == 0) fault(FaultReason::NoThreadAvailable);
      ThreadLaunch l;
      l.exc = pop();
      l.ld1 = pop();
      l.ld0 = pop();
      l.code_start = pop();
      l.lc1 = pop();
      l.lc0 = pop();
      const auto slot = env_.unit.start_thread(l);
      if (!slot) fault(FaultReason::NoThreadAvailable);
      push(GlobalPort::pack(env_.unit.processor_id(), env_.unit.unit_number(), *slot, 0).raw());
      break;
    }
    case Op::CALL: {
      const Word a = pop();
      push(ip + 1 - 4 * ctx_.lc0);
      next_ip_ = ip + a;
      break;
    }
    case Op::JUMP: next_ip_ = pop() + 4 * ctx_.lc0; break;
    case Op::STX: {
      const Word a = pop(), b = pop();
      data_write(stack_address(a), b);
      break;
    }
    case Op::LDINC: {
      const auto addr = data_address(pop());
      const Word b = stack_read(addr);
      push(b);
      data_write(addr, b + 1);
      break;
    }
    case Op::GETPORT: push(env_.channels.destination(pop() & 31)); break;
    case Op::SETPORT: {
      const Word a = pop(), b = pop();
      env_.channels.set_destination(a & 31, b);
      break;
    }
    case Op::OUT: {
      const Word a = pop(), b = pop();
      if (send(a, Token::data(b)) == SendStatus::Rejected) return StepResult::blocked();
      break;
    }
    case Op::OUTEND:
      if (send(pop(), Token::end()) == SendStatus::Rejected) return StepResult::blocked();
      break;
    case Op::OUTPAUSE:
      if (send(pop(), Token::pause()) == SendStatus::Rejected) return StepResult::blocked();
      break;
    case Op::IN: {
      const unsigned a = pop() & 31;
      const auto tok = env_.channels.peek(a);
      if (!tok) return StepResult::blocked();
      env_.channels.consume(a);
      if (tok->is_end()) fault(FaultReason::EndOnInput);
      push(tok->value);
      break;
    }
    case Op::INMORE: {
      const unsigned a = pop() & 31;
      const auto tok = env_.channels.peek(a);
      if (!tok) return StepResult::blocked();
      if (tok->is_end()) {
        env_.channels.consume(a);
        push(kFalse);
      } else {
        push(kTrue);
      }
      break;
    }
    case Op::EVCLEAR: ctx_.events.clear(); break;
    case Op::EVOUT: case Op::EVIN: case Op::EVEND: {
      const Word a = pop(), b = pop();
      const auto vector = static_cast<std::uint16_t>(b + ip);
      auto& e = ctx_.events[a & 31];
      if (code.op() == Op::EVOUT) e.out = vector;
      if (code.op() == Op::EVIN) e.in = vector;
      if (code.op() != Op::EVOUT) e.end = vector;
      break;
    }
    case Op::WAIT: {
      const auto vector = fired_event();
      if (!vector) return StepResult::blocked();
      next_ip_ = *vector;
      break;
    }
    case Op::NOW: push(env_.unit.time()); break;
    case Op::WAITTMO: {
      const Word a = pop();
      if (static_cast<SignedWord>(env_.unit.time() - a) >= 0) break;
      const auto vector = fired_event();
      if (!vector) return StepResult::blocked();
      next_ip_ = *vector;
      break;
    }
    case Op::POPN: {
      const Word a = pop();
      sp_ += a;
      break;
    }
    case Op::ULESS: { Word a = pop(), b = pop(); push(b < a ? kTrue : kFalse); break; }
    case Op::SLESS: {
      const auto a = static_cast<SignedWord>(pop()), b = static_cast<SignedWord>(pop());
      push(b < a ? kTrue : kFalse);
      break;
    }
    case Op::COMBINE: { Word a = pop(), b = pop(); push(b * 192 + a); break; }
    case Op::PORT:
      push(GlobalPort::pack(env_.unit.processor_id(), env_.unit.unit_number(),
                            env_.unit.thread_number(), pop())
               .raw());
      break;
    case Op::LDAX: {
      const Word a = pop();
      push(a + sp_ - ctx_.dp());
      break;
    }
    case Op::THREADS: push(env_.unit.free_threads()); break;
    case Op::THRCYC: push(ctx_.cycles); break;
    case Op::CYCLES: push(env_.unit.total_cycles()); break;
  }
  return StepResult::ok();
}

StepResult stop(ThreadContext& ctx, FaultReason reason) {
  ctx.state = RunState::Stopped;
  ctx.stop_reason = reason;
  return StepResult::stopped(reason);
}

}  // namespace

StepResult step(ThreadContext& ctx, ExecEnv& env) {
  if (!ctx.runnable()) return StepResult::stopped(ctx.stop_reason.value_or(FaultReason::ExplicitStop));

  if (!ip_in_range(ctx, ctx.ip)) {
    ++ctx.cycles;
    return stop(ctx, FaultReason::IpOutOfRange);
  }
  const Opcode code = decode(env.memory.load(ctx.ip >> 2), ctx.ip & 3);

  Exec exec(ctx, env);
  StepResult result;
  try {
    result = exec.run(code);
  } catch (const Fault& f) {
    ++ctx.cycles;
    return stop(ctx, f.reason);
  }

  if (result.status == StepStatus::Blocked) {
    ctx.state = RunState::Blocked;
    return result;
  }
  ++ctx.cycles;
  if (result.status == StepStatus::Stopped) return stop(ctx, result.reason);

  if (exec.sp() < ctx.ld0 || exec.sp() > ctx.ld1) return stop(ctx, FaultReason::SpOutOfRange);
  ctx.sp = exec.sp();
  ctx.ip = exec.next_ip();
  if (!ip_in_range(ctx, ctx.ip)) return stop(ctx, FaultReason::IpOutOfRange);
  ctx.state = RunState::Running;
  return result;
}

}  // namespace nop
