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
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

namespace nop {

/// Inbound byte stream of a peripheral line. Never blocks.
class ByteSource {
 public:
  enum class State : std::uint8_t { Byte, Idle, Eof };
  struct Read {
    State state = State::Idle;
    std::uint8_t byte = 0;
  };

  virtual ~ByteSource() = default;
  virtual Read poll() = 0;
};

/// Outbound byte stream of a peripheral line.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::uint8_t byte) = 0;
  virtual void flush() {}
};

class NullSource final : public ByteSource {
 public:
  Read poll() override { return {State::Eof, 0}; }
};

class NullSink final : public ByteSink {
 public:
  void write(std::uint8_t) override {}
};

/// Fixed script of bytes followed by end of input.
class ScriptedSource final : public ByteSource {
 public:
  explicit ScriptedSource(std::string bytes, bool close_at_end = true)
      : bytes_(std::move(bytes)), close_at_end_(close_at_end) {}
  Read poll() override;

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
  bool close_at_end_;
};

class StringSink final : public ByteSink {
 public:
  void write(std::uint8_t byte) override { text_.push_back(static_cast<char>(byte)); }
  void flush() override { ++flushes_; }
  const std::string& text() const { return text_; }
  int flushes() const { return flushes_; }

 private:
  std::string text_;
  int flushes_ = 0;
};

class OstreamSink final : public ByteSink {
 public:
  explicit OstreamSink(std::ostream& out) : out_(out) {}
  void write(std::uint8_t byte) override { out_.put(static_cast<char>(byte)); }
  void flush() override { out_.flush(); }

 private:
  std::ostream& out_;
};

/// Reads a regular file from the start; end of file closes the source.
class FileSource final : public ByteSource {
 public:
  explicit FileSource(const std::string& path) : in_(path, std::ios::binary) {}
  bool ok() const { return static_cast<bool>(in_); }
  Read poll() override;

 private:
  std::ifstream in_;
};

/// Appends to a file.
class FileSink final : public ByteSink {
 public:
  explicit FileSink(const std::string& path) : out_(path, std::ios::binary | std::ios::app) {}
  bool ok() const { return static_cast<bool>(out_); }
  void write(std::uint8_t byte) override { out_.put(static_cast<char>(byte)); }
  void flush() override { out_.flush(); }

 private:
  std::ofstream out_;
};

/// Reads a file descriptor (standard input) on a background thread so the
/// simulator never blocks on it.
class DescriptorSource final : public ByteSource {
 public:
  explicit DescriptorSource(int fd);
  ~DescriptorSource() override;
  DescriptorSource(const DescriptorSource&) = delete;
  DescriptorSource& operator=(const DescriptorSource&) = delete;

  Read poll() override;

 private:
  struct Shared {
    std::mutex mutex;
    std::deque<std::uint8_t> pending;
    bool eof = false;
  };

  std::shared_ptr<Shared> shared_;
};

}  // namespace nop
