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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nop/token.hpp"

namespace nop {

/// Wire unit of an external link. DATA and HEADER carry a little-endian word;
/// END and PAUSE are a bare tag byte.
struct Frame {
  enum class Tag : std::uint8_t { Data = 0x00, End = 0x01, Pause = 0x02, Header = 0x03 };

  Tag tag = Tag::Data;
  Word payload = 0;

  static constexpr Frame data(Word w) { return {Tag::Data, w}; }
  static constexpr Frame end() { return {Tag::End, 0}; }
  static constexpr Frame pause() { return {Tag::Pause, 0}; }
  static constexpr Frame header(Word dest) { return {Tag::Header, dest}; }
  static Frame from_token(Token tok);

  constexpr bool has_payload() const { return tag == Tag::Data || tag == Tag::Header; }
  constexpr std::size_t encoded_size() const { return has_payload() ? 5 : 1; }
  Token token() const;

  friend constexpr bool operator==(Frame, Frame) = default;
};

std::string to_string(Frame f);

void encode(Frame f, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode(std::span<const Frame> frames);

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental frame decoder; partial frames are kept across feeds.
class FrameDecoder {
 public:
  /// Appends decoded frames to `out`. Throws FrameError on an unknown tag.
  void feed(std::span<const std::uint8_t> bytes, std::vector<Frame>& out);
  std::size_t buffered() const { return pending_.size(); }

 private:
  std::vector<std::uint8_t> pending_;
};

}  // namespace nop
