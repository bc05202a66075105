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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nop/isa.hpp"

namespace nop {

/// Init image: five header words (magic, word count after the header, start,
/// 0, 0), then the start word position and the code words. Little-endian.
inline constexpr Word kImageMagic = 0x00504F4E;
inline constexpr std::size_t kImageHeaderWords = 5;

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> make_init_image(std::span<const Word> code, Word start);
std::vector<std::uint8_t> words_to_bytes(std::span<const Word> words);

/// Message carried by an image: every word after the five header words.
std::vector<Word> parse_init_image(std::span<const std::uint8_t> bytes);
std::vector<Word> read_init_file(const std::string& path);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace nop
