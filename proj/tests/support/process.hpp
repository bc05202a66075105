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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

extern char** environ;

namespace noptest {

/// A child process with piped stdin, stdout and stderr.
class Child {
 public:
  Child(const std::vector<std::string>& argv, std::string input = {}) : input_(std::move(input)) {
    ::signal(SIGPIPE, SIG_IGN);
    int in[2], out[2], err[2];
    if (::pipe(in) || ::pipe(out) || ::pipe(err)) throw std::runtime_error("pipe failed");
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in[0], 0);
    posix_spawn_file_actions_adddup2(&fa, out[1], 1);
    posix_spawn_file_actions_adddup2(&fa, err[1], 2);
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1]}) posix_spawn_file_actions_addclose(&fa, fd);
    std::vector<char*> args;
    std::vector<std::string> copy = argv;
    for (auto& a : copy) args.push_back(a.data());
    args.push_back(nullptr);
    const int rc = ::posix_spawn(&pid_, args[0], &fa, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    ::close(in[0]);
    ::close(out[1]);
    ::close(err[1]);
    if (rc != 0) throw std::runtime_error("cannot start " + argv[0]);
    in_ = in[1];
    out_ = out[0];
    err_ = err[0];
    for (int fd : {in_, out_, err_}) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
    if (input_.empty()) close_fd(in_);
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child() {
    if (pid_ > 0 && !reaped_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    for (int fd : {in_, out_, err_}) if (fd >= 0) ::close(fd);
  }

  bool done() const { return reaped_; }
  int exit_code() const { return exit_code_; }
  const std::string& out() const { return stdout_; }
  const std::string& err() const { return stderr_; }

  /// Moves pending pipe data; reaps the child once its output is closed.
  void service(std::vector<pollfd>& fds) {
    for (auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in_) write_input();
      if (p.fd == out_) read_into(out_, stdout_);
      if (p.fd == err_) read_into(err_, stderr_);
    }
    if (out_ < 0 && err_ < 0 && !reaped_) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
      reaped_ = true;
      exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    }
  }
  void add_fds(std::vector<pollfd>& fds) const {
    if (in_ >= 0) fds.push_back({in_, POLLOUT, 0});
    if (out_ >= 0) fds.push_back({out_, POLLIN, 0});
    if (err_ >= 0) fds.push_back({err_, POLLIN, 0});
  }
  void kill() const {
    if (!reaped_) ::kill(pid_, SIGKILL);
  }

 private:
  void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  void write_input() {
    const ssize_t n = ::write(in_, input_.data() + written_, input_.size() - written_);
    if (n > 0) written_ += static_cast<std::size_t>(n);
    if (n < 0 && errno != EAGAIN) written_ = input_.size();
    if (written_ == input_.size()) close_fd(in_);
  }
  void read_into(int& fd, std::string& sink) {
    char buf[65536];
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) sink.append(buf, static_cast<std::size_t>(n));
    else if (n == 0 || errno != EAGAIN) close_fd(fd);
  }

  pid_t pid_ = -1;
  int in_ = -1, out_ = -1, err_ = -1;
  std::string input_;
  std::size_t written_ = 0;
  std::string stdout_, stderr_;
  bool reaped_ = false;
  int exit_code_ = -1;
};

/// Services all children until they exit; kills the rest at the deadline.
/// Returns false on timeout.
inline bool wait_all(const std::vector<Child*>& children, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    std::vector<pollfd> fds;
    bool all_done = true;
    for (auto* c : children) {
      c->add_fds(fds);
      all_done = all_done && c->done();
    }
    if (all_done) return true;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      for (auto* c : children) c->kill();
      for (auto* c : children) {
        while (!c->done()) {
          std::vector<pollfd> f;
          c->add_fds(f);
          for (auto& p : f) p.revents = POLLIN | POLLOUT;
          c->service(f);
        }
      }
      return false;
    }
    ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left.count(), 100)));
    for (auto* c : children) c->service(fds);
  }
}

struct RunResult {
  int exit_code = -1;
  std::string out, err;
  bool timed_out = false;
};

inline RunResult run(const std::vector<std::string>& argv, std::string input = {},
                     std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  Child c(argv, std::move(input));
  const bool ok = wait_all({&c}, timeout);
  return {c.exit_code(), c.out(), c.err(), !ok};
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("nop-test-" + std::to_string(rd()) + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(file(name), std::ios::binary) << content;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace noptest
