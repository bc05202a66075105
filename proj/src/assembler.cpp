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

#include "nop/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include <fmt/format.h>

#include "nop/trace.hpp"

namespace nop {

std::string Diagnostic::str() const { return fmt::format("line {}: {}", line, message); }

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += d.str();
  }
  return out;
}

constexpr std::uint8_t kNopByte = static_cast<std::uint8_t>(Op::NOP);
constexpr Word kNopWord = 0x80808080u;

struct Item {
  enum class Kind { Code, Literal, RelRef, AbsRef, Align, Data, Label };
  Kind kind;
  int line;
  Opcode code{};
  Word value = 0;
  std::string name;
  unsigned size = 0;  // opcodes allocated by the layout

  static Item code_item(int line, Opcode c) { return {Kind::Code, line, c, 0, {}, 0}; }
  static Item value_item(Kind k, int line, Word v) { return {k, line, {}, v, {}, 0}; }
  static Item named_item(Kind k, int line, std::string n) { return {k, line, {}, 0, std::move(n), 0}; }
};

struct Parsed {
  std::vector<Item> items;
  std::optional<std::pair<std::string, int>> start_label;
  std::optional<Word> start_value;
  std::vector<Diagnostic> errors;
};

bool is_name(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

// Integer literal within -2^31 .. 2^32-1, reduced to a word.
std::optional<long long> parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  } else if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
    base = 2;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  unsigned long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec == std::errc::result_out_of_range) return static_cast<long long>(1) << 40;  // flagged as overflow
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (v > (1ull << 40)) v = 1ull << 40;
  return negative ? -static_cast<long long>(v) : static_cast<long long>(v);
}

bool fits_word(long long v) { return v >= -(1ll << 31) && v <= 0xFFFFFFFFll; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::pair<std::string, int>> tokenize(std::string_view source) {
  std::vector<std::pair<std::string, int>> tokens;
  int line = 1;
  std::string current;
  bool comment = false;
  auto flush = [&] {
    if (!current.empty()) tokens.emplace_back(std::move(current), line);
    current.clear();
  };
  for (const char c : source) {
    if (c == '\n') {
      flush();
      comment = false;
      ++line;
    } else if (comment) {
      continue;
    } else if (c == '#') {
      flush();
      comment = true;
    } else if (c == ';' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

Parsed parse(std::string_view source) {
  Parsed out;
  const auto tokens = tokenize(source);
  auto error = [&](int line, std::string msg) { out.errors.push_back({line, std::move(msg)}); };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& [tok, line] = tokens[i];
    auto operand = [&]() -> std::optional<std::string> {
      if (i + 1 < tokens.size() && tokens[i + 1].second == line) return tokens[++i].first;
      error(line, fmt::format("'{}' needs an operand", tok));
      return std::nullopt;
    };

    if (tok.back() == ':' && tok.size() > 1) {
      const std::string name = tok.substr(0, tok.size() - 1);
      if (!is_name(name)) error(line, fmt::format("bad label name '{}'", name));
      out.items.push_back(Item::named_item(Item::Kind::Label, line, name));
    } else if (tok[0] == '@' || tok[0] == '&') {
      const std::string name = tok.substr(1);
      if (!is_name(name)) error(line, fmt::format("bad label reference '{}'", tok));
      out.items.push_back(Item::named_item(tok[0] == '@' ? Item::Kind::RelRef : Item::Kind::AbsRef, line, name));
    } else if (tok[0] == '.') {
      const std::string dir = upper(tok);
      if (dir == ".ALIGN") {
        out.items.push_back(Item::value_item(Item::Kind::Align, line, 0));
      } else if (dir == ".WORD" || dir == ".BYTE") {
        const auto arg = operand();
        if (!arg) continue;
        const auto v = parse_integer(*arg);
        if (!v) {
          error(line, fmt::format("bad number '{}'", *arg));
        } else if (dir == ".BYTE" && (*v < 0 || *v > 255)) {
          error(line, fmt::format(".byte value {} out of range", *v));
        } else if (!fits_word(*v)) {
          error(line, fmt::format("literal {} overflows a word", *arg));
        } else if (dir == ".BYTE") {
          out.items.push_back(Item::code_item(line, Opcode{static_cast<std::uint8_t>(*v)}));
        } else {
          out.items.push_back(Item::value_item(Item::Kind::Data, line, static_cast<Word>(*v)));
        }
      } else if (dir == ".START") {
        const auto arg = operand();
        if (!arg) continue;
        if (const auto v = parse_integer(*arg)) {
          out.start_value = static_cast<Word>(*v);
        } else if (is_name(*arg)) {
          out.start_label = {{*arg, line}};
        } else {
          error(line, fmt::format("bad .start operand '{}'", *arg));
        }
      } else {
        error(line, fmt::format("unknown directive '{}'", tok));
      }
    } else if (const auto v = parse_integer(tok)) {
      if (!fits_word(*v)) {
        error(line, fmt::format("literal {} overflows a word", tok));
        continue;
      }
      out.items.push_back(Item::value_item(Item::Kind::Literal, line, static_cast<Word>(*v)));
    } else if (const auto op = op_from_mnemonic(upper(tok))) {
      out.items.push_back(Item::code_item(line, Opcode{static_cast<std::uint8_t>(*op)}));
    } else {
      error(line, fmt::format("unknown mnemonic '{}'", tok));
    }
  }
  return out;
}

std::vector<int> base192_digits(long long x) {
  std::vector<int> digits;
  while (x < -64 || x > 127) {
    int d = static_cast<int>(((x % 192) + 192) % 192);
    if (d > 127) d -= 192;
    digits.push_back(d);
    x = (x - d) / 192;
  }
  digits.push_back(static_cast<int>(x));
  std::reverse(digits.begin(), digits.end());
  return digits;
}

std::vector<Opcode> chain_from_digits(const std::vector<int>& digits) {
  std::vector<Opcode> out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    out.push_back(*immediate_for(digits[i]));
    if (i > 0) out.push_back(Opcode{static_cast<std::uint8_t>(Op::COMBINE)});
  }
  return out;
}

}  // namespace

AsmError::AsmError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::vector<Opcode> literal_chain(Word value) {
  const auto as_signed = base192_digits(static_cast<SignedWord>(value));
  const auto as_unsigned = base192_digits(static_cast<long long>(value));
  return chain_from_digits(as_unsigned.size() < as_signed.size() ? as_unsigned : as_signed);
}

Assembly assemble(std::string_view source, Word origin) {
  Parsed parsed = parse(source);
  auto& items = parsed.items;
  std::vector<Diagnostic> errors = std::move(parsed.errors);

  std::map<std::string, int> defined;
  for (const auto& it : items) {
    if (it.kind != Item::Kind::Label) continue;
    if (!defined.emplace(it.name, it.line).second)
      errors.push_back({it.line, fmt::format("label '{}' defined twice", it.name)});
  }
  for (const auto& it : items) {
    if ((it.kind == Item::Kind::RelRef || it.kind == Item::Kind::AbsRef) && !defined.count(it.name))
      errors.push_back({it.line, fmt::format("unresolved label '{}'", it.name)});
  }
  if (parsed.start_label && !defined.count(parsed.start_label->first))
    errors.push_back({parsed.start_label->second, fmt::format("unresolved label '{}'", parsed.start_label->first)});
  if (!errors.empty()) throw AsmError(std::move(errors));

  const Word base = origin * 4;
  for (auto& it : items) {
    if (it.kind == Item::Kind::Code) it.size = 1;
    if (it.kind == Item::Kind::Literal) it.size = static_cast<unsigned>(literal_chain(it.value).size());
    if (it.kind == Item::Kind::RelRef || it.kind == Item::Kind::AbsRef) it.size = 1;
  }

  // Reference chains only ever grow, so the layout reaches a fixed point;
  // a chain shorter than its slot is padded with leading NOPs.
  Assembly result;
  for (bool changed = true; changed;) {
    changed = false;
    Word pos = base;
    for (auto& it : items) {
      switch (it.kind) {
        case Item::Kind::Label: result.labels[it.name] = pos; break;
        case Item::Kind::Align: it.size = (4 - pos % 4) % 4; break;
        case Item::Kind::Data: it.size = (4 - pos % 4) % 4 + 4; break;
        default: break;
      }
      pos += it.size;
    }
    pos = base;
    for (auto& it : items) {
      if (it.kind == Item::Kind::RelRef || it.kind == Item::Kind::AbsRef) {
        const Word target = result.labels.at(it.name);
        it.value = it.kind == Item::Kind::RelRef ? target - (pos + it.size) : target - base;
        const auto need = static_cast<unsigned>(literal_chain(it.value).size());
        if (need > it.size) {
          it.size = need;
          changed = true;
        }
      }
      pos += it.size;
    }
  }

  std::vector<std::uint8_t> bytes;
  for (const auto& it : items) {
    switch (it.kind) {
      case Item::Kind::Code:
        bytes.push_back(it.code.byte);
        break;
      case Item::Kind::Literal:
      case Item::Kind::RelRef:
      case Item::Kind::AbsRef: {
        const auto chain = literal_chain(it.value);
        bytes.insert(bytes.end(), it.size - chain.size(), kNopByte);
        for (const auto c : chain) bytes.push_back(c.byte);
        break;
      }
      case Item::Kind::Align:
        bytes.insert(bytes.end(), it.size, kNopByte);
        break;
      case Item::Kind::Data:
        bytes.insert(bytes.end(), it.size - 4, kNopByte);
        for (unsigned i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(it.value >> (8 * i)));
        break;
      case Item::Kind::Label:
        break;
    }
  }
  while (bytes.size() % 4) bytes.push_back(kNopByte);

  result.origin = origin;
  for (std::size_t i = 0; i < bytes.size(); i += 4) {
    result.words.push_back(Word{bytes[i]} | Word{bytes[i + 1]} << 8 | Word{bytes[i + 2]} << 16 |
                           Word{bytes[i + 3]} << 24);
  }

  result.start = origin;
  if (parsed.start_value) result.start = *parsed.start_value;
  if (parsed.start_label) {
    const Word pos = result.labels.at(parsed.start_label->first);
    if (pos % 4)
      throw AsmError({{parsed.start_label->second,
                       fmt::format("start label '{}' is not word aligned (use .align)", parsed.start_label->first)}});
    result.start = pos / 4;
  }

  for (std::size_t i = 0; i < result.words.size(); ++i) {
    result.listing += fmt::format("{:04x}: {:08x}  {}\n", origin + i, result.words[i],
                                  disassemble_word(result.words[i]));
  }
  return result;
}

std::string disassemble_word(Word word) {
  std::string out;
  for (unsigned slot = 0; slot < 4; ++slot) {
    if (slot) out += " ; ";
    out += opcode_text(decode(word, slot));
  }
  return out;
}

std::string disassemble(std::span<const Word> words) {
  std::string out;
  for (const Word w : words) {
    out += disassemble_word(w);
    out += '\n';
  }
  return out;
}

std::vector<Diagnostic> check_stack_effects(std::string_view source) {
  Parsed parsed = parse(source);
  if (!parsed.errors.empty()) throw AsmError(std::move(parsed.errors));

  std::vector<Diagnostic> warnings;
  int depth = 0;
  for (const auto& it : parsed.items) {
    switch (it.kind) {
      case Item::Kind::Label:
      case Item::Kind::Data:
        depth = 0;
        break;
      case Item::Kind::Literal:
      case Item::Kind::RelRef:
      case Item::Kind::AbsRef:
        ++depth;
        break;
      case Item::Kind::Align:
        break;
      case Item::Kind::Code: {
        if (it.code.is_illegal()) break;
        const StackEffect e = stack_effect(it.code);
        if (e.pops > depth) {
          warnings.push_back({it.line, fmt::format("{} pops {} word(s) but only {} available in this segment",
                                                   opcode_text(it.code), e.pops, depth)});
          depth = 0;
        } else {
          depth -= e.pops;
        }
        depth += e.pushes;
        if (it.code.is_operation() && ends_straight_line(it.code.op())) depth = 0;
        break;
      }
    }
  }
  return warnings;
}

std::string_view boot_rom_source() {
  return R"(# Boot loader, resident at word 0x3fc0 of every processing unit.
# Reads a message on port 0: the start word position, then the code words,
# which are stored from data word 0 upward; jumps to the start on END.
0 IN            # start position
-64             # store index: data pointer is 64 above word 0
0 INMORE        # loop: anything left?
10 FJP          #   no: leave the loop
DUP
0 IN            #   next code word
EXCH ST
1 ADD
-12 UJP         #   back to INMORE
POP             # drop the store index
4 MUL JUMP      # word position to opcode position
)";
}

const std::array<Word, kBootRomWords>& boot_rom_image() {
  static const std::array<Word, kBootRomWords> image = [] {
    std::array<Word, kBootRomWords> rom;
    rom.fill(kNopWord);
    const Assembly a = assemble(boot_rom_source(), kBootRomBase);
    std::copy(a.words.begin(), a.words.end(), rom.begin());
    return rom;
  }();
  return image;
}

}  // namespace nop
