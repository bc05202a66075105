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

#include <optional>
#include <string>
#include <vector>

#include "nop/isa.hpp"
#include "nop/trace.hpp"

namespace nop {

struct CliOptions {
  std::optional<std::string> init_path;
  std::vector<std::string> file_paths;  // peripheral lines 2..7 in order
  TraceMasks masks;
  bool debug = false;
  bool help = false;
  Word processor_id = kFirstProcessorId;
  std::optional<unsigned> first_own_socket;
  std::vector<unsigned> connect_to;

  bool standalone() const { return !first_own_socket.has_value(); }
};

struct ParseResult {
  std::optional<CliOptions> options;
  std::string error;  // set when options is empty
};

/// Parses the arguments after the program name. Never throws.
ParseResult parse_args(const std::vector<std::string>& args);

std::string usage_text();

}  // namespace nop
