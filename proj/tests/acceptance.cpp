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


// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "nop/assembler.hpp"
#include "nop/image.hpp"
#include "nop/processor.hpp"
#include "reference/ref_eval.hpp"
#include "support/channel_property.hpp"
#include "support/impl_env.hpp"
#include "support/node.hpp"
#include "support/oracle.hpp"
#include "support/ports.hpp"
#include "support/process.hpp"

namespace {

using nop::Word;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs one opcode on a fresh stack holding `args` (last one on top).
struct Bench {
  noptest::Regs regs;
  noptest::World world;

  Bench() {
    regs.lc0 = 0;
    regs.lc1 = 16;
    regs.ld0 = 64;
    regs.ld1 = 256;
  }

  noptest::StepOutcome run(std::uint8_t opcode, std::initializer_list<Word> args) {
    world.mem[0] = 0x80808000u | opcode;
    regs.ip = 0;
    regs.sp = regs.ld1;
    for (Word a : args) world.mem[--regs.sp] = a;
    return noptest::impl_step(regs, world);
  }
  Word at(unsigned depth) const { return world.mem[regs.sp + depth]; }
  unsigned depth() const { return regs.ld1 - regs.sp; }
};

constexpr std::uint8_t op(nop::Op o) { return static_cast<std::uint8_t>(o); }

Verdict isa_oracle() {
  const auto t0 = Clock::now();
  constexpr unsigned kCases = 200;
  unsigned total = 0;
  for (unsigned code = 0x80; code <= 0xB7; ++code) {
    const auto r = noptest::run_oracle(static_cast<std::uint8_t>(code), kCases, 1000 + code);
    total += r.cases;
    if (r.agreed != r.cases)
      return {false, fmt::format("opcode 0x{:02x}: {}/{} agree; {}", code, r.agreed, r.cases, r.first_mismatch)};
  }
  const double s = seconds_since(t0);
  return {s < 10.0, fmt::format("56 opcodes x {} cases, {} agree, {:.2f} s", kCases, total, s)};
}

Verdict immediates() {
  const auto t0 = Clock::now();
  Bench b;
  unsigned ok = 0;
  for (unsigned byte = 0; byte < 256; ++byte) {
    if (byte >= 0x80 && byte < 0xC0) continue;
    const Word expected = byte < 0x80 ? byte : 0xFFFFFF00u | byte;
    const auto o = b.run(static_cast<std::uint8_t>(byte), {});
    if (o.outcome == noptest::Outcome::Continue && b.depth() == 1 && b.at(0) == expected && b.regs.ip == 1) ++ok;
  }
  const double s = seconds_since(t0);
  return {ok == 192 && s < 1.0, fmt::format("{}/192 immediates push their value, {:.3f} s", ok, s)};
}

Verdict euclidean() {
  std::mt19937_64 rng(99);
  Bench b;
  auto pick = [&]() -> Word {
    switch (rng() % 4) {
      case 0: return static_cast<Word>(rng());
      case 1: return static_cast<Word>(static_cast<std::int32_t>(rng() % 201) - 100);
      case 2: return static_cast<Word>(rng() % 2 ? 0x80000000u : 0x7FFFFFFFu);
      default: return static_cast<Word>(static_cast<std::int32_t>(rng() % 2000001) - 1000000);
    }
  };
  unsigned sdiv_ok = 0, udiv_ok = 0, zero_ok = 0;
  constexpr unsigned kCases = 100000;
  for (unsigned i = 0; i < kCases; ++i) {
    const Word bw = pick();
    Word aw;
    do aw = pick(); while (aw == 0);

    if (b.run(op(nop::Op::SDIV), {bw, aw}).outcome == noptest::Outcome::Continue && b.depth() == 2) {
      const auto sb = static_cast<std::int64_t>(static_cast<std::int32_t>(bw));
      const auto sa = static_cast<std::int64_t>(static_cast<std::int32_t>(aw));
      const auto q = static_cast<std::int64_t>(static_cast<std::int32_t>(b.at(1)));
      const auto r = static_cast<std::int64_t>(static_cast<std::int32_t>(b.at(0)));
      // q is exact except for INT_MIN / -1, where it wraps; compare modulo 2^32.
      const bool identity = static_cast<Word>(q * sa + r) == bw;
      const bool range = r >= 0 && r < (sa < 0 ? -sa : sa);
      const bool exact = (sb - r) % sa == 0;
      if (identity && range && exact) ++sdiv_ok;
    }
    if (b.run(op(nop::Op::UDIV), {bw, aw}).outcome == noptest::Outcome::Continue && b.depth() == 2) {
      const std::uint64_t q = b.at(1), r = b.at(0);
      if (q * aw + r == bw && r < aw) ++udiv_ok;
    }
    const auto zs = b.run(op(nop::Op::SDIV), {bw, 0});
    const bool zs_ok = zs.outcome == noptest::Outcome::Stopped && zs.reason == 4;
    const auto zu = b.run(op(nop::Op::UDIV), {bw, 0});
    if (zs_ok && zu.outcome == noptest::Outcome::Stopped && zu.reason == 4) ++zero_ok;
  }
  return {sdiv_ok == kCases && udiv_ok == kCases && zero_ok == kCases,
          fmt::format("SDIV {}/{}, UDIV {}/{}, divide-by-zero faults {}/{}", sdiv_ok, kCases, udiv_ok, kCases,
                      zero_ok, kCases)};
}

Word byte_reverse(Word w) {
  return (w & 0xFF) << 24 | ((w >> 8) & 0xFF) << 16 | ((w >> 16) & 0xFF) << 8 | w >> 24;
}

Verdict bit_ops() {
  std::mt19937 rng(5);
  Bench b;
  unsigned involution = 0, endian = 0, shifts = 0, shift_cases = 0;
  constexpr unsigned kWords = 10000;
  for (unsigned i = 0; i < kWords; ++i) {
    const Word x = rng();
    bool all = true;
    for (Word m = 0; m < 32; ++m) {
      b.run(op(nop::Op::SWAP), {x, m});
      const Word once = b.at(0);
      b.run(op(nop::Op::SWAP), {once, m});
      all = all && b.at(0) == x;
      if (m == 24) endian += once == byte_reverse(x);
    }
    involution += all;
  }
  for (unsigned i = 0; i < 200; ++i) {
    const Word rot = rng(), sh = rng();
    for (Word n = 0; n < 64; ++n) {
      shift_cases += 2;
      b.run(op(nop::Op::LEFT), {sh, rot, n});
      shifts += b.depth() == 1 && b.at(0) == noptest::ref_left(n, rot, sh);
      b.run(op(nop::Op::RIGHT), {sh, rot, n});
      shifts += b.depth() == 1 && b.at(0) == noptest::ref_right(n, rot, sh);
    }
  }
  return {involution == kWords && endian == kWords && shifts == shift_cases,
          fmt::format("SWAP involution {}/{} words x 32 masks, mask 24 byte reversal {}/{}, LEFT/RIGHT {}/{}",
                      involution, kWords, endian, kWords, shifts, shift_cases)};
}

Verdict boot_rom() {
  // The loader as listed, assembled here and compared with what reset installs.
  const nop::Assembly listing = nop::assemble(
      "0 IN -64 0 INMORE 10 FJP DUP 0 IN EXCH ST 1 ADD -12 UJP POP 4 MUL JUMP", nop::kBootRomBase);
  std::vector<std::string> notes;
  bool pass = true;
  for (unsigned k : {0u, 1u, 100u}) {
    nop::Processor p;
    for (std::size_t i = 0; i < listing.words.size(); ++i)
      pass = pass && p.unit(0).memory[nop::kBootRomBase + i] == listing.words[i];
    std::mt19937 rng(k);
    std::vector<Word> words(k);
    for (auto& w : words) w = rng();
    // Entry point: the last loaded word, or a STOP planted at 0x300 when k is 0.
    const Word stop_word = 0x8080809Au;
    Word position = 0x300;
    if (k > 0) {
      words[k - 1] = stop_word;
      position = k - 1;
    } else {
      p.unit(0).memory[position] = stop_word;
    }
    p.unit(0).memory[k] = 0xA5A5A5A5u;
    std::vector<Word> message{position};
    message.insert(message.end(), words.begin(), words.end());
    p.deliver_init(message);
    p.run_until([](const nop::Processor& q) { return !q.stops().empty(); }, 20000);
    bool loaded = p.unit(0).memory[k] == 0xA5A5A5A5u;
    for (unsigned i = 0; i < k; ++i) loaded = loaded && p.unit(0).memory[i] == words[i];
    const bool jumped = p.stops().size() == 1 && p.stops()[0].reason == nop::FaultReason::ExplicitStop &&
                        p.stops()[0].ip == position * 4;
    pass = pass && loaded && jumped;
    notes.push_back(fmt::format("k={}: {}{}", k, loaded ? "loaded" : "NOT loaded", jumped ? ", jumped" : ", NO jump"));
  }
  return {pass, fmt::format("{}", fmt::join(notes, "; "))};
}

Verdict channels() {
  const auto r = noptest::run_channel_property(2024, 2000);
  const bool pass = r.passed == r.trials && r.pauses_received == 0 && r.tokens_sent == r.tokens_received &&
                    r.pauses_sent > 0;
  return {pass, fmt::format("{}/{} schedules ok, tokens {}/{}, pauses sent {} delivered {}{}", r.passed, r.trials,
                            r.tokens_received, r.tokens_sent, r.pauses_sent, r.pauses_received,
                            r.first_failure.empty() ? "" : "; " + r.first_failure)};
}

// --- nopsim process runs ---

const std::string kPrograms = NOP_PROGRAMS_DIR;

std::string build_image(const noptest::TempDir& dir, const std::string& name) {
  const auto r = noptest::run({NOPASM_PATH, kPrograms + "/" + name + ".s", "-o", dir.file(name + ".img")});
  if (r.exit_code != 0) throw std::runtime_error("nopasm " + name + ": " + r.err);
  return dir.file(name + ".img");
}

std::string expected_line_payload() {
  std::string out;
  Word w = 12345;
  for (int i = 0; i < 64; ++i) {
    w = w * 1103515245u + 12345u;
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((w >> (8 * k)) & 0xFF));
  }
  return out;
}

struct LineRun {
  bool ok = false;
  double seconds = 0;
  std::string payload;
  std::array<std::string, 3> traces;  // instruction lines without the time stamp
  std::string problem;
};

std::string instruction_lines(const std::string& err) {
  std::string out;
  std::size_t pos = 0;
  while (pos < err.size()) {
    std::size_t end = err.find('\n', pos);
    if (end == std::string::npos) end = err.size();
    const std::string line = err.substr(pos, end - pos);
    if (!line.empty() && line[0] == '@' && line.find(" ip=") != std::string::npos)
      out += line.substr(line.find(' ') + 1) + "\n";
    pos = end + 1;
  }
  return out;
}

LineRun run_line(bool trace) {
  LineRun run;
  noptest::TempDir dir;
  const std::string a = build_image(dir, "line_a"), b = build_image(dir, "line_b"), c = build_image(dir, "line_c");
  const unsigned pa = noptest::free_port_block(4), pb = noptest::free_port_block(4);
  const unsigned pc = noptest::free_port_block(4);
  if (!pa || !pb || !pc) {
    run.problem = "no free ports";
    return run;
  }
  auto args = [&](const std::string& img, Word id, std::vector<unsigned> sockets) {
    std::vector<std::string> v{NOPSIM_PATH, "-i", img, "--id", std::to_string(id)};
    if (trace) v.push_back("-t");
    for (unsigned s : sockets) v.push_back(std::to_string(s));
    return v;
  };
  const auto t0 = Clock::now();
  noptest::Child na(args(a, 8, {pa}));
  noptest::Child nb(args(b, 9, {pb, pa, pa + 1}));
  noptest::Child nc(args(c, 10, {pc, pb + 2, pb + 3, pa + 2, pa + 3}));
  const bool finished = noptest::wait_all({&na, &nb, &nc}, std::chrono::seconds(20));
  run.seconds = seconds_since(t0);
  run.payload = nc.out();
  run.traces = {instruction_lines(na.err()), instruction_lines(nb.err()), instruction_lines(nc.err())};
  run.ok = finished && na.exit_code() == 0 && nb.exit_code() == 0 && nc.exit_code() == 0;
  if (!run.ok)
    run.problem = fmt::format("exit codes {}/{}/{}{}; stderr of node 10: {}", na.exit_code(), nb.exit_code(),
                              nc.exit_code(), finished ? "" : " (timeout)", nc.err().substr(0, 300));
  return run;
}

Verdict multi_node() {
  const LineRun r = run_line(false);
  const bool intact = r.payload == expected_line_payload();
  return {r.ok && intact && r.seconds < 5.0,
          fmt::format("64 words 8 -> 9 -> 10 {}, {:.2f} s{}", intact ? "intact" : "CORRUPTED", r.seconds,
                      r.problem.empty() ? "" : "; " + r.problem)};
}

Verdict echo() {
  noptest::TempDir dir;
  const std::string img = build_image(dir, "echo");
  std::mt19937 rng(77);
  std::vector<std::string> inputs{"", "hello, world\n", std::string(1, '\0')};
  std::string all_bytes;
  for (int i = 0; i < 256; ++i) all_bytes.push_back(static_cast<char>(i));
  inputs.push_back(all_bytes);
  std::string random(100000, '\0');
  for (auto& ch : random) ch = static_cast<char>(rng());
  inputs.push_back(random);
  unsigned ok = 0;
  std::string problem;
  for (const auto& in : inputs) {
    const auto r = noptest::run({NOPSIM_PATH, "-i", img}, in, std::chrono::seconds(30));
    if (r.exit_code == 0 && r.out == in) ++ok;
    else if (problem.empty())
      problem = fmt::format("; {} bytes: exit {}, {} bytes out", in.size(), r.exit_code, r.out.size());
  }
  return {ok == inputs.size(),
          fmt::format("{}/{} inputs reproduced (up to {} bytes){}", ok, inputs.size(), random.size(), problem)};
}

Verdict determinism() {
  const LineRun first = run_line(true), second = run_line(true);
  bool same = first.ok && second.ok;
  std::size_t lines = 0;
  for (unsigned i = 0; i < 3; ++i) {
    same = same && !first.traces[i].empty() && first.traces[i] == second.traces[i];
    lines += static_cast<std::size_t>(std::count(first.traces[i].begin(), first.traces[i].end(), '\n'));
  }
  return {same, fmt::format("{} trace lines over 3 instances, {}{}", lines, same ? "identical" : "DIFFERENT",
                            first.problem.empty() ? second.problem : first.problem)};
}

Verdict faults() {
  struct Case {
    nop::FaultReason reason;
    const char* child;
    Word child_word;
  };
  const Case cases[] = {
      {nop::FaultReason::ExplicitStop, "1 2 at: STOP", 0},
      {nop::FaultReason::IllegalOpcode, "1 2 at: .byte 0xBB", 0},
      {nop::FaultReason::IpOutOfRange, "0x3000 JUMP", 0},
      {nop::FaultReason::SpOutOfRange, "at: POP", 0},
      {nop::FaultReason::DivideByZero, "7 0 at: UDIV", 0},
      {nop::FaultReason::EndOnInput, "35 2 SETPORT 2 OUTEND 3 at: IN", 0},
      {nop::FaultReason::NoThreadAvailable, "6 IN STOP .align\nloop: 0 256 0 0x3000 0x3100 0 at: START POP @loop UJP",
       1},
      {nop::FaultReason::IllegalRoute, "3072 1 SETPORT 5 1 at: OUT", 0},
  };
  unsigned reported = 0, suppressed = 0;
  std::string problem;
  for (const auto& c : cases) {
    const auto r = noptest::run_child(c.child, c.child_word, noptest::kExceptionPort.port);
    // The jump itself completes; the fetch at its target is what faults.
    const Word ip = c.reason == nop::FaultReason::IpOutOfRange ? 0x3000 : r.at;
    const std::vector<nop::Token> expected{nop::Token::data(nop::GlobalPort::pack(8, 0, r.child_thread, 0).raw()),
                                           nop::Token::data(static_cast<Word>(c.reason)), nop::Token::data(ip),
                                           nop::Token::end()};
    if (r.stop && r.stop->reason == c.reason && r.message == expected) ++reported;
    else if (problem.empty()) problem = fmt::format("; reason {} not reported as expected", static_cast<int>(c.reason));
    const auto quiet = noptest::run_child(c.child, c.child_word, 0);
    if (quiet.stop && quiet.stop->reason == c.reason && quiet.message.empty()) ++suppressed;
  }
  return {reported == 8 && suppressed == 8,
          fmt::format("reasons 0-7 reported {}/8, exc=0 suppressed {}/8{}", reported, suppressed, problem)};
}

Verdict assembler_round_trip() {
  std::mt19937 rng(11);
  constexpr unsigned kImages = 10000;
  unsigned ok = 0;
  for (unsigned i = 0; i < kImages; ++i) {
    std::vector<Word> words(1 + rng() % 64);
    for (auto& w : words) {
      w = 0;
      for (unsigned k = 0; k < 4; ++k) {
        unsigned byte;
        do byte = rng() & 0xFF; while (byte >= 0xB8 && byte <= 0xBF);
        w |= Word{byte} << (8 * k);
      }
    }
    const Word start = rng() % words.size();
    const auto img = nop::make_init_image(words, start);
    const auto message = nop::parse_init_image(img);
    const std::string src = fmt::format(".start {}\n{}", message[0], nop::disassemble(std::span(message).subspan(1)));
    const nop::Assembly a = nop::assemble(src);
    if (nop::make_init_image(a.words, a.start) == img) ++ok;
  }
  return {ok == kImages, fmt::format("{}/{} random images survive disassemble + assemble", ok, kImages)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"ISA oracle agreement", isa_oracle},
      {"immediate completeness", immediates},
      {"Euclidean division", euclidean},
      {"bit-operation properties", bit_ops},
      {"boot ROM end-to-end", boot_rom},
      {"channel semantics", channels},
      {"multi-node routing", multi_node},
      {"stand-alone echo", echo},
      {"determinism", determinism},
      {"fault reporting", faults},
      {"assembler round-trip", assembler_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
