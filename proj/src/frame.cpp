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

#include "nop/frame.hpp"

#include <fmt/format.h>

namespace nop {

Frame Frame::from_token(Token tok) {
  switch (tok.kind) {
    case Token::Kind::Data: return data(tok.value);
    case Token::Kind::End: return end();
    case Token::Kind::Pause: return pause();
  }
  return end();
}

Token Frame::token() const {
  switch (tag) {
    case Tag::Data: return Token::data(payload);
    case Tag::End: return Token::end();
    case Tag::Pause: return Token::pause();
    case Tag::Header: break;
  }
  throw FrameError("header frame has no token");
}

std::string to_string(Frame f) {
  if (f.tag == Frame::Tag::Header) return fmt::format("HEADER 0x{:08x}", f.payload);
  return to_string(f.token());
}

void encode(Frame f, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(f.tag));
  if (!f.has_payload()) return;
  for (unsigned i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(f.payload >> (8 * i)));
}

std::vector<std::uint8_t> encode(std::span<const Frame> frames) {
  std::vector<std::uint8_t> out;
  for (const Frame f : frames) encode(f, out);
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes, std::vector<Frame>& out) {
  pending_.insert(pending_.end(), bytes.begin(), bytes.end());
  std::size_t pos = 0;
  while (pos < pending_.size()) {
    const std::uint8_t tag = pending_[pos];
    if (tag > static_cast<std::uint8_t>(Frame::Tag::Header)) {
      pending_.clear();
      throw FrameError(fmt::format("unknown frame tag 0x{:02x}", tag));
    }
    Frame f{static_cast<Frame::Tag>(tag), 0};
    if (pos + f.encoded_size() > pending_.size()) break;
    if (f.has_payload()) {
      for (unsigned i = 0; i < 4; ++i) f.payload |= Word{pending_[pos + 1 + i]} << (8 * i);
    }
    out.push_back(f);
    pos += f.encoded_size();
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
}

}  // namespace nop
