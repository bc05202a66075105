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


// nopsim: simulates one NOP processor, optionally linked to others over TCP.

#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <fmt/format.h>

#include "nop/cli.hpp"
#include "nop/image.hpp"
#include "nop/link.hpp"
#include "nop/peripheral.hpp"
#include "nop/processor.hpp"

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitFault = 3;

constexpr auto kLinkQuiet = std::chrono::milliseconds(500);

void dump_break(nop::Word id, unsigned u, unsigned t, const nop::ThreadContext& c) {
  std::cerr << fmt::format(
      "n{} u{}t{} BREAK ip={:04x} sp={:04x} lc0={:04x} lc1={:04x} ld0={:04x} ld1={:04x} exc={:08x} cycles={}\n", id,
      u, t, c.ip, c.sp, c.lc0, c.lc1, c.ld0, c.ld1, c.exc, c.cycles);
  std::ifstream tty("/dev/tty");
  if (!tty) return;
  std::cerr << "press enter to continue" << std::endl;
  std::string line;
  std::getline(tty, line);
}

bool readable(const std::string& path) { return static_cast<bool>(std::ifstream(path, std::ios::binary)); }

void report_blocked(const nop::Processor& proc) {
  for (unsigned u = 0; u < nop::kUnits; ++u) {
    for (unsigned t = 0; t < nop::kThreadsPerUnit; ++t) {
      const auto& c = proc.thread(u, t);
      // Units still parked in the boot loader are not part of the program.
      if (c.state != nop::RunState::Blocked || (c.ip >> 2) >= nop::kBootRomBase) continue;
      const nop::Opcode code = nop::decode(proc.unit(u).memory[(c.ip >> 2) % nop::kMemoryWords], c.ip & 3);
      std::cerr << fmt::format("nopsim: deadlock: n{} u{}t{} blocked at ip={:04x} on {}\n", proc.id(), u, t, c.ip,
                               nop::opcode_text(code));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  const nop::ParseResult parsed = nop::parse_args({argv + 1, argv + argc});
  if (!parsed.options) {
    std::cerr << "nopsim: " << parsed.error << "\n" << nop::usage_text();
    return kExitUsage;
  }
  const nop::CliOptions& opt = *parsed.options;
  if (opt.help) {
    std::cout << nop::usage_text();
    return kExitOk;
  }
  for (const auto& path : opt.file_paths) {
    if (!readable(path)) {
      std::cerr << fmt::format("nopsim: cannot open --file '{}'\n", path);
      return kExitUsage;
    }
  }

  std::vector<nop::Word> init;
  if (opt.init_path) {
    if (!readable(*opt.init_path)) {
      std::cerr << fmt::format("nopsim: cannot open --init '{}'\n", *opt.init_path);
      return kExitUsage;
    }
    try {
      init = nop::read_init_file(*opt.init_path);
    } catch (const nop::ImageError& e) {
      std::cerr << "nopsim: " << e.what() << "\n";
      return kExitIo;
    }
  }

  nop::ProcessorConfig cfg;
  cfg.processor_id = opt.processor_id;
  cfg.trace = opt.masks;
  cfg.trace_out = &std::cerr;
  cfg.debug = opt.debug;
  if (opt.debug) cfg.on_break = [id = opt.processor_id](unsigned u, unsigned t, const nop::ThreadContext& c) {
    dump_break(id, u, t, c);
  };
  nop::Processor proc(cfg);
  auto& fabric = proc.fabric();

  fabric.attach_line(0, std::make_unique<nop::DescriptorSource>(STDIN_FILENO), std::make_unique<nop::NullSink>());
  fabric.attach_line(1, std::make_unique<nop::NullSource>(), std::make_unique<nop::OstreamSink>(std::cout));
  for (std::size_t i = 0; i < opt.file_paths.size(); ++i) {
    const auto& path = opt.file_paths[i];
    auto source = std::make_unique<nop::FileSource>(path);
    auto sink = std::make_unique<nop::FileSink>(path);
    if (!source->ok() || !sink->ok()) {
      std::cerr << fmt::format("nopsim: cannot open --file '{}' for reading and writing\n", path);
      return kExitUsage;
    }
    fabric.attach_line(static_cast<unsigned>(i + 2), std::move(source), std::move(sink));
  }

  std::unique_ptr<nop::LinkTransport> links;
  if (!opt.standalone()) {
    try {
      links = std::make_unique<nop::LinkTransport>(
          opt.processor_id, nop::plan_links(*opt.first_own_socket, opt.connect_to), opt.masks.external ? &std::cerr : nullptr);
      links->bring_up();
      links->exchange(fabric);
    } catch (const nop::LinkError& e) {
      std::cerr << "nopsim: " << e.what() << "\n";
      return kExitIo;
    }
  }

  if (opt.init_path) proc.deliver_init(init);

  auto last_traffic = Clock::now();
  for (;;) {
    if (links && links->exchange(fabric) > 0) last_traffic = Clock::now();
    const nop::RoundReport r = proc.run_round();
    if (!r.idle()) continue;
    if (links && r.moved > 0) last_traffic = Clock::now();
    if (!fabric.awaiting_input()) {
      if (!links) break;
      bool outbound = links->sending();
      for (unsigned k = 0; k < nop::kExternalLinks; ++k) outbound = outbound || !fabric.link_outbound(k).empty();
      if (!outbound && Clock::now() - last_traffic >= kLinkQuiet) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  if (links) links->flush(fabric, std::chrono::milliseconds(1000));
  std::cout.flush();

  if (opt.debug) report_blocked(proc);
  for (const auto& s : proc.stops()) {
    if (s.reason == nop::FaultReason::ExplicitStop) continue;
    std::cerr << fmt::format("nopsim: n{} u{}t{} faulted at ip={:04x}: {}\n", proc.id(), s.unit, s.thread, s.ip,
                             nop::fault_name(s.reason));
  }
  return proc.any_faults() ? kExitFault : kExitOk;
}
