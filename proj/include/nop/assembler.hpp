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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nop/isa.hpp"

namespace nop {

struct Diagnostic {
  int line = 0;
  std::string message;

  std::string str() const;
};

class AsmError : public std::runtime_error {
 public:
  explicit AsmError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Result of assembling a source text.
struct Assembly {
  std::vector<Word> words;
  Word origin = 0;  // word address of words[0]
  Word start = 0;   // word address execution starts at
  std::map<std::string, Word> labels;  // absolute opcode positions
  std::string listing;
};

/// Assembles source text.
///
/// Syntax: tokens separated by white space or `;`, `#` starts a comment.
///   123, -5, 0x7fff   literal; -64..127 is one immediate opcode, anything
///                     wider a COMBINE chain (see literal_chain)
///   ADD, ldc          mnemonic (case-insensitive)
///   name:             label at the current opcode position
///   @name             literal: offset from the opcode after it to `name`,
///                     as consumed by UJP, FJP and CALL
///   &name             literal: opcode position of `name` relative to the
///                     origin, as consumed by JUMP
///   .align            pad with NOP to the next word boundary
///   .word N           aligned raw word
///   .byte N           raw opcode byte
///   .start name       execution entry (must be word aligned)
/// Trailing slots of the last word are padded with NOP.
Assembly assemble(std::string_view source, Word origin = 0);

/// Canonical opcode sequence pushing `value`: base-192 digits in -64..127,
/// most significant first, folded with COMBINE. The shorter of the signed and
/// unsigned integer readings of `value` is used, signed on ties.
std::vector<Opcode> literal_chain(Word value);

/// One line per word, opcodes separated by " ; ". Re-assembles to the same words.
std::string disassemble(std::span<const Word> words);
std::string disassemble_word(Word word);

/// Straight-line stack depth check: warns where an opcode would pop more
/// words than its segment has pushed. Segments start at labels and after
/// control transfers.
std::vector<Diagnostic> check_stack_effects(std::string_view source);

/// Source of the 64-word boot loader.
std::string_view boot_rom_source();
/// Assembled boot loader, padded with NOP words to the full ROM region.
const std::array<Word, kBootRomWords>& boot_rom_image();

}  // namespace nop
