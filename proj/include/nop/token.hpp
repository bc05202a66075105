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

#include <string>

#include "nop/isa.hpp"

namespace nop {

/// Unit of channel transmission.
struct Token {
  enum class Kind : std::uint8_t { Data, End, Pause };

  Kind kind = Kind::Data;
  Word value = 0;

  static constexpr Token data(Word w) { return {Kind::Data, w}; }
  static constexpr Token end() { return {Kind::End, 0}; }
  static constexpr Token pause() { return {Kind::Pause, 0}; }

  constexpr bool is_data() const { return kind == Kind::Data; }
  constexpr bool is_end() const { return kind == Kind::End; }
  constexpr bool is_pause() const { return kind == Kind::Pause; }

  friend constexpr bool operator==(Token, Token) = default;
};

std::string to_string(Token tok);

}  // namespace nop
