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


// nopasm: assembles NOP source into init images or the boot ROM region.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nop/assembler.hpp"
#include "nop/image.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nop::ImageError(fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NOP assembler and disassembler"};
  std::string input;
  std::string output;
  bool rom = false;
  bool disassemble = false;
  bool listing = false;
  bool check = false;
  bool print_rom = false;
  app.add_option("input", input, "source file (image file with --disassemble)");
  app.add_option("-o,--output", output, "output image");
  app.add_flag("--rom", rom, "emit the 64-word boot ROM region at word 0x3fc0 instead of an init image");
  app.add_flag("-d,--disassemble", disassemble, "print the code words of an init image as source");
  app.add_flag("-l,--listing", listing, "print an address/word/opcode listing");
  app.add_flag("-c,--check", check, "warn about straight-line stack underflows");
  app.add_flag("--boot-source", print_rom, "print the built-in boot loader source");
  CLI11_PARSE(app, argc, argv);

  try {
    if (print_rom) {
      std::cout << nop::boot_rom_source();
      return 0;
    }
    if (input.empty()) throw CLI::RequiredError("input");

    if (disassemble) {
      const std::string bytes = slurp(input);
      const auto message =
          nop::parse_init_image({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
      if (message.empty()) return 0;
      std::cout << fmt::format(".start {}\n", message[0]);
      std::cout << nop::disassemble(std::span(message).subspan(1));
      return 0;
    }

    const std::string source = slurp(input);
    if (check)
      for (const auto& w : nop::check_stack_effects(source)) std::cerr << input << ": warning: " << w.str() << "\n";

    const nop::Word origin = rom ? nop::kBootRomBase : 0;
    const nop::Assembly a = nop::assemble(source, origin);
    if (listing) std::cout << a.listing;
    if (output.empty()) {
      if (!listing) std::cerr << "nopasm: no output file (-o) given\n";
      return listing ? 0 : 1;
    }
    if (rom) {
      if (a.words.size() > nop::kBootRomWords)
        throw nop::AsmError({{0, fmt::format("ROM code is {} words, at most {}", a.words.size(), nop::kBootRomWords)}});
      std::vector<nop::Word> region(nop::kBootRomWords, 0x80808080u);
      std::copy(a.words.begin(), a.words.end(), region.begin());
      nop::write_file(output, nop::words_to_bytes(region));
    } else {
      nop::write_file(output, nop::make_init_image(a.words, a.start));
    }
  } catch (const nop::AsmError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << input << ": error: " << d.str() << "\n";
    return 1;
  } catch (const nop::ImageError& e) {
    std::cerr << "nopasm: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
