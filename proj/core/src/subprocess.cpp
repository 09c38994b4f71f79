// Copyright 2026 The ctrlmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctrlmut/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "ctrlmut/errors.hpp"

extern char** environ;

namespace ctrlmut {
namespace {

constexpr std::size_t kStderrTail = 4096;

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int remaining_ms(Subprocess::Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Subprocess::Clock::now());
  return static_cast<int>(std::clamp<std::int64_t>(left.count(), 0, 1000 * 60 * 60));
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw IoError("empty command line");
  static std::once_flag sigpipe;
  std::call_once(sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw IoError("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw IoError("pipe failed");
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw IoError("pipe failed");
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const int rc = ::posix_spawnp(&pid_, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];
  stderr_fd_ = err_pipe[0];
  if (rc != 0) {
    pid_ = -1;
    close_fd(stdin_fd_);
    close_fd(stdout_fd_);
    close_fd(stderr_fd_);
    throw IoError("cannot spawn '" + argv[0] + "': " + std::strerror(rc));
  }
  ::fcntl(stdout_fd_, F_SETFL, ::fcntl(stdout_fd_, F_GETFL) | O_NONBLOCK);
  ::fcntl(stderr_fd_, F_SETFL, ::fcntl(stderr_fd_, F_GETFL) | O_NONBLOCK);
}

Subprocess::~Subprocess() {
  close_fd(stdin_fd_);
  if (pid_ > 0 && !exit_) {
    kill();
    wait(Clock::now() + std::chrono::seconds(5));
  }
  close_fd(stdout_fd_);
  close_fd(stderr_fd_);
}

bool Subprocess::write_line(std::string_view line) {
  if (stdin_fd_ < 0) return false;
  std::string buf(line);
  buf.push_back('\n');
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = ::write(stdin_fd_, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

void Subprocess::drain_stderr() {
  if (stderr_fd_ < 0) return;
  std::array<char, 4096> buf;
  for (;;) {
    const ssize_t n = ::read(stderr_fd_, buf.data(), buf.size());
    if (n > 0) {
      stderr_tail_.append(buf.data(), static_cast<std::size_t>(n));
      if (stderr_tail_.size() > kStderrTail) stderr_tail_.erase(0, stderr_tail_.size() - kStderrTail);
      continue;
    }
    if (n == 0) close_fd(stderr_fd_);
    return;
  }
}

bool Subprocess::pump(Clock::time_point deadline) {
  std::array<pollfd, 2> fds{};
  nfds_t count = 0;
  if (!stdout_eof_) fds[count++] = {stdout_fd_, POLLIN, 0};
  if (stderr_fd_ >= 0) fds[count++] = {stderr_fd_, POLLIN, 0};
  if (count == 0) return true;
  const int rc = ::poll(fds.data(), count, remaining_ms(deadline));
  if (rc < 0) return errno == EINTR;
  if (rc == 0) return false;
  drain_stderr();
  if (!stdout_eof_) {
    std::array<char, 8192> buf;
    for (;;) {
      const ssize_t n = ::read(stdout_fd_, buf.data(), buf.size());
      if (n > 0) {
        out_buf_.append(buf.data(), static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0) stdout_eof_ = true;
      break;
    }
  }
  return true;
}

Subprocess::ReadStatus Subprocess::read_line(std::string& line, Clock::time_point deadline) {
  for (;;) {
    const std::size_t nl = out_buf_.find('\n');
    if (nl != std::string::npos) {
      line.assign(out_buf_, 0, nl);
      out_buf_.erase(0, nl + 1);
      return ReadStatus::line;
    }
    if (stdout_eof_) {
      if (out_buf_.empty()) return ReadStatus::eof;
      line = std::move(out_buf_);
      out_buf_.clear();
      return ReadStatus::line;
    }
    if (Clock::now() >= deadline) return ReadStatus::timeout;
    if (!pump(deadline) && Clock::now() >= deadline) return ReadStatus::timeout;
  }
}

std::optional<Subprocess::ExitStatus> Subprocess::wait(Clock::time_point deadline) {
  if (exit_) return exit_;
  if (pid_ <= 0) return std::nullopt;
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      drain_stderr();
      exit_ = WIFEXITED(status) ? ExitStatus{true, WEXITSTATUS(status)} : ExitStatus{false, WTERMSIG(status)};
      return exit_;
    }
    if (r < 0 && errno != EINTR) return std::nullopt;
    if (Clock::now() >= deadline) return std::nullopt;
    // Keep the pipes drained so the child never blocks on a full buffer.
    const auto step = std::min(deadline, Clock::now() + std::chrono::milliseconds(2));
    if (!stdout_eof_ || stderr_fd_ >= 0) {
      pump(step);
      if (out_buf_.size() > (1u << 20)) out_buf_.clear();
    } else {
      std::this_thread::sleep_until(step);
    }
  }
}

void Subprocess::kill() {
  if (pid_ > 0 && !exit_) ::kill(pid_, SIGKILL);
}

}  // namespace ctrlmut
