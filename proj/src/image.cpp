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


#include "nop/image.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace nop {

std::vector<std::uint8_t> words_to_bytes(std::span<const Word> words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 4);
  for (const Word w : words)
    for (unsigned i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return out;
}

std::vector<std::uint8_t> make_init_image(std::span<const Word> code, Word start) {
  std::vector<Word> words{kImageMagic, static_cast<Word>(code.size() + 1), start, 0, 0, start};
  words.insert(words.end(), code.begin(), code.end());
  return words_to_bytes(words);
}

std::vector<Word> parse_init_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kImageHeaderWords * 4)
    throw ImageError(fmt::format("init image too short ({} bytes, need at least 20)", bytes.size()));
  if (bytes.size() % 4)
    throw ImageError(fmt::format("init image length {} is not a multiple of 4", bytes.size()));
  std::vector<Word> words;
  for (std::size_t i = kImageHeaderWords * 4; i < bytes.size(); i += 4) {
    words.push_back(Word{bytes[i]} | Word{bytes[i + 1]} << 8 | Word{bytes[i + 2]} << 16 |
                    Word{bytes[i + 3]} << 24);
  }
  return words;
}

std::vector<Word> read_init_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(fmt::format("cannot open init image '{}'", path));
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw ImageError(fmt::format("cannot read init image '{}'", path));
  return parse_init_image(bytes);
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageError(fmt::format("cannot create '{}'", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError(fmt::format("cannot write '{}'", path));
}

}  // namespace nop
