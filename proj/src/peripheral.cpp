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

#include "nop/peripheral.hpp"

#include <unistd.h>

#include <cerrno>

namespace nop {

ByteSource::Read ScriptedSource::poll() {
  if (pos_ < bytes_.size()) return {State::Byte, static_cast<std::uint8_t>(bytes_[pos_++])};
  return {close_at_end_ ? State::Eof : State::Idle, 0};
}

ByteSource::Read FileSource::poll() {
  const int c = in_.get();
  if (c == std::char_traits<char>::eof()) return {State::Eof, 0};
  return {State::Byte, static_cast<std::uint8_t>(c)};
}

DescriptorSource::DescriptorSource(int fd) : shared_(std::make_shared<Shared>()) {
  // The reader may sit in read() on a terminal forever, so it owns a share of
  // the queue and is detached rather than joined.
  std::thread([shared = shared_, fd] {
    char buf[4096];
    for (;;) {
      const ssize_t n = ::read(fd, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      std::lock_guard lock(shared->mutex);
      if (n <= 0) {
        shared->eof = true;
        return;
      }
      shared->pending.insert(shared->pending.end(), buf, buf + n);
    }
  }).detach();
}

DescriptorSource::~DescriptorSource() = default;

ByteSource::Read DescriptorSource::poll() {
  std::lock_guard lock(shared_->mutex);
  if (!shared_->pending.empty()) {
    const std::uint8_t b = shared_->pending.front();
    shared_->pending.pop_front();
    return {State::Byte, b};
  }
  return {shared_->eof ? State::Eof : State::Idle, 0};
}

}  // namespace nop
