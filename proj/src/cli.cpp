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


#include "nop/cli.hpp"

#include <getopt.h>

#include <cerrno>
#include <cstdlib>

#include <fmt/format.h>

namespace nop {

namespace {

constexpr int kOptId = 256;

std::optional<unsigned long long> parse_number(const char* text) {
  if (!text || !*text || *text == '-' || *text == '+') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 0);
  if (errno || *end) return std::nullopt;
  return v;
}

std::optional<Word> parse_mask(const char* text, Word limit, std::string& error, const char* what) {
  if (!text) return limit;
  const auto v = parse_number(text);
  if (!v || *v > limit) {
    error = fmt::format("malformed {} mask '{}' (at most 0x{:x})", what, text, limit);
    return std::nullopt;
  }
  return static_cast<Word>(*v);
}

}  // namespace

std::string usage_text() {
  return "usage: nopsim [options] [first-own-socket [connect-to-socket ...]]\n"
         "  -i, --init=FILE      initial code image for unit 0, thread 0, port 0\n"
         "  -f, --file=FILE      bind FILE to the next peripheral line, starting at line 2\n"
         "  -t, --trace[=MASK]   instruction trace of the threads in MASK (default all)\n"
         "  -x, --extern[=MASK]  token trace of links (bits 0-3), lines (4-11), config (12)\n"
         "  -l, --intern[=MASK]  token trace of the thread ports in MASK (default all)\n"
         "  -d, --debug          stop on BREAK and report deadlocks\n"
         "      --id=N           processor id, 8 or above (extension, default 8)\n"
         "  -h, --help           show this text\n"
         "Mask bit k selects unit k/8, thread k%8. Without sockets the processor runs\n"
         "stand-alone; otherwise it listens on first-own-socket..+3, links 0..n-1\n"
         "connect to the given sockets and execution starts once all four are up.\n";
}

ParseResult parse_args(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("nopsim");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);

  static const option kLong[] = {
      {"init", required_argument, nullptr, 'i'},  {"file", required_argument, nullptr, 'f'},
      {"trace", optional_argument, nullptr, 't'}, {"extern", optional_argument, nullptr, 'x'},
      {"intern", optional_argument, nullptr, 'l'}, {"debug", no_argument, nullptr, 'd'},
      {"help", no_argument, nullptr, 'h'},        {"id", required_argument, nullptr, kOptId},
      {nullptr, 0, nullptr, 0},
  };

  CliOptions o;
  std::string error;
  auto fail = [&](std::string msg) { return ParseResult{std::nullopt, std::move(msg)}; };

  optind = 0;
  opterr = 0;
  const int argc = static_cast<int>(storage.size());
  for (;;) {
    const int c = getopt_long(argc, argv.data(), "i:f:t::x::l::dh", kLong, nullptr);
    if (c == -1) break;
    switch (c) {
      case 'i':
        o.init_path = optarg;
        break;
      case 'f':
        if (o.file_paths.size() == kPeripheralLines - 2)
          return fail(fmt::format("at most {} --file options", kPeripheralLines - 2));
        o.file_paths.emplace_back(optarg);
        break;
      case 't':
        if (auto m = parse_mask(optarg, 0xFFFFFFFFu, error, "trace")) o.masks.instructions = *m;
        else return fail(error);
        break;
      case 'x':
        if (auto m = parse_mask(optarg, TraceMasks::kExternalAll, error, "extern")) o.masks.external = *m;
        else return fail(error);
        break;
      case 'l':
        if (auto m = parse_mask(optarg, 0xFFFFFFFFu, error, "intern")) o.masks.internal = *m;
        else return fail(error);
        break;
      case 'd':
        o.debug = true;
        break;
      case 'h':
        o.help = true;
        break;
      case kOptId: {
        const auto v = parse_number(optarg);
        if (!v || *v < kFirstProcessorId || *v > kMaxProcessorId)
          return fail(fmt::format("--id must be {}..{}, got '{}'", kFirstProcessorId, kMaxProcessorId, optarg));
        o.processor_id = static_cast<Word>(*v);
        break;
      }
      default: {
        const std::string opt = optopt ? (optopt < 256 ? fmt::format("-{}", static_cast<char>(optopt))
                                                       : std::string("--id"))
                                       : std::string(argv[optind - 1]);
        return fail(fmt::format("bad or incomplete option '{}'", opt));
      }
    }
  }

  std::vector<unsigned> sockets;
  for (int i = optind; i < argc; ++i) {
    const auto v = parse_number(argv[i]);
    if (!v || *v == 0 || *v > 0xFFFF) return fail(fmt::format("bad socket number '{}'", argv[i]));
    sockets.push_back(static_cast<unsigned>(*v));
  }
  if (sockets.size() > 1 + kExternalLinks)
    return fail(fmt::format("at most {} connect-to sockets, got {}", kExternalLinks, sockets.size() - 1));
  if (!sockets.empty()) {
    if (sockets[0] + kExternalLinks - 1 > 0xFFFF)
      return fail(fmt::format("first own socket {} leaves no room for four listeners", sockets[0]));
    o.first_own_socket = sockets[0];
    o.connect_to.assign(sockets.begin() + 1, sockets.end());
  }
  return {std::move(o), {}};
}

}  // namespace nop
