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

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace ctrlmut {

/// Child process with piped stdin/stdout/stderr, read line by line with deadlines.
/// The destructor kills and reaps a child that is still running.
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  enum class ReadStatus { line, eof, timeout };

  struct ExitStatus {
    bool exited = false;  // false: terminated by a signal
    int code = 0;         // exit code or signal number
  };

  /// Throws IoError when the executable cannot be spawned.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes `line` plus '\n'. Returns false if the child closed its stdin.
  bool write_line(std::string_view line);
  void close_stdin();

  /// Next '\n'-terminated stdout line (without the newline), or eof/timeout.
  ReadStatus read_line(std::string& line, Clock::time_point deadline);

  /// Waits until the child exits or the deadline passes; nullopt on timeout.
  std::optional<ExitStatus> wait(Clock::time_point deadline);
  void kill();

  /// Last bytes the child wrote to stderr.
  const std::string& stderr_tail() const { return stderr_tail_; }

 private:
  void drain_stderr();
  bool pump(Clock::time_point deadline);

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::string out_buf_;
  std::string stderr_tail_;
  bool stdout_eof_ = false;
  std::optional<ExitStatus> exit_;
};

}  // namespace ctrlmut
