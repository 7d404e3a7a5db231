// Copyright 2026 The agreebench Authors.
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
//
// Scorer backed by a child process speaking newline-delimited JSON on its
// standard streams:
//
//   scorer -> harness, first line:  {"name": str, "perplexity": num|null}
//   harness -> scorer:              {"id": int, "prefix": [str...],
//                                    "candidates": [str, str]}
//   scorer -> harness:              {"id": int, "logprobs": [num, num]}
//
// Log-probabilities are natural logs. Shutdown closes the child's stdin; the
// child must then exit with status 0. Requests are strictly serialized. POSIX
// only.

#ifndef AGREEBENCH_EXTERNAL_SCORER_HPP_
#define AGREEBENCH_EXTERNAL_SCORER_HPP_

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "agreebench/harness.hpp"
#include "json.hpp"

namespace agreebench {

struct ExternalScorerOptions {
  std::vector<std::pair<std::string, std::string>> environment;
  // Milliseconds to wait for any one line; negative waits forever.
  int timeout_ms = -1;
};

class ExternalScorer : public Scorer {
 public:
  explicit ExternalScorer(std::string command,
                          ExternalScorerOptions options = {})
      : command_(std::move(command)), options_(std::move(options)) {
    spawn();
    try {
      read_handshake();
    } catch (...) {
      terminate();
      throw;
    }
  }

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  ~ExternalScorer() override {
    if (pid_ > 0) {
      try {
        close();
      } catch (const ScorerError&) {
        // Destructors do not report; call close() to observe the status.
      }
    }
  }

  LogProbs score(std::span<const std::string> prefix, const std::string& first,
                 const std::string& second) override {
    if (!failure_.empty()) throw ScorerError(failure_);
    try {
      const std::int64_t id = next_id_++;
      nlohmann::json request;
      request["id"] = id;
      request["prefix"] = std::vector<std::string>(prefix.begin(), prefix.end());
      request["candidates"] = {first, second};
      write_line(request.dump());
      const std::string line = read_line();
      nlohmann::json response;
      try {
        response = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw ScorerError("malformed response line: " + line);
      }
      if (!response.is_object() || !response.contains("id") ||
          !response["id"].is_number_integer()) {
        throw ScorerError("response without integer id: " + line);
      }
      if (response["id"].get<std::int64_t>() != id) {
        throw ScorerError("response id " + response["id"].dump() +
                          " does not match request id " + std::to_string(id));
      }
      const auto& lp = response.value("logprobs", nlohmann::json());
      if (!lp.is_array() || lp.size() != 2 || !lp[0].is_number() ||
          !lp[1].is_number()) {
        throw ScorerError("response needs two numeric logprobs: " + line);
      }
      LogProbs out{lp[0].get<double>(), lp[1].get<double>()};
      if (!std::isfinite(out.first) || !std::isfinite(out.second)) {
        throw ScorerError("non-finite logprob in response: " + line);
      }
      return out;
    } catch (const ScorerError& e) {
      // The stream may be out of step; refuse further requests.
      failure_ = std::string(e.what()) + " [scorer: " + command_ + "]";
      throw ScorerError(failure_);
    }
  }

  ScorerInfo info() const override { return info_; }

  // Closes the child's input and waits for it. Throws unless it exits with
  // status 0.
  void close() {
    if (pid_ <= 0) return;
    ::shutdown(fd_, SHUT_WR);
    int status = 0;
    pid_t pid = pid_;
    pid_ = -1;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    ::close(fd_);
    fd_ = -1;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      throw ScorerError("scorer process '" + command_ +
                        "' did not exit cleanly (status " +
                        std::to_string(status) + ")");
    }
  }

 private:
  void spawn() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
      throw ScorerError(std::string("socketpair: ") + std::strerror(errno));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw ScorerError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::close(fds[0]);
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      ::close(fds[1]);
      for (const auto& [k, v] : options_.environment) {
        ::setenv(k.c_str(), v.c_str(), 1);
      }
      ::signal(SIGPIPE, SIG_DFL);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(),
              static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    fd_ = fds[0];
    pid_ = pid;
  }

  void terminate() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    ::close(fd_);
    pid_ = -1;
    fd_ = -1;
  }

  void read_handshake() {
    const std::string line = read_line();
    nlohmann::json hs;
    try {
      hs = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ScorerError("malformed handshake line: " + line);
    }
    if (!hs.is_object() || !hs.contains("name") || !hs["name"].is_string()) {
      throw ScorerError("handshake lacks a string \"name\": " + line);
    }
    info_.name = hs["name"].get<std::string>();
    if (hs.contains("perplexity") && !hs["perplexity"].is_null()) {
      if (!hs["perplexity"].is_number()) {
        throw ScorerError("handshake perplexity is not a number: " + line);
      }
      info_.perplexity = hs["perplexity"].get<double>();
    }
  }

  void write_line(const std::string& text) {
    std::string data = text + '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off,
                         MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("scorer process closed its input: ") +
                          std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd p{fd_, POLLIN, 0};
      int ready = ::poll(&p, 1, options_.timeout_ms);
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("poll: ") + std::strerror(errno));
      }
      if (ready == 0) throw ScorerError("timed out waiting for scorer output");
      char chunk[4096];
      ssize_t n = ::read(fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw ScorerError("scorer process exited unexpectedly");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  ExternalScorerOptions options_;
  ScorerInfo info_;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::int64_t next_id_ = 0;
  std::string buffer_;
  std::string failure_;
};

}  // namespace agreebench

#endif  // AGREEBENCH_EXTERNAL_SCORER_HPP_
