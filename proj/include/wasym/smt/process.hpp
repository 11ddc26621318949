#pragma once

// Child-process plumbing for an external SMT solver speaking SMT-LIB v2 over
// stdin/stdout (e.g. `z3 -in`, or the Node shim under solver/).
//
// The command string is split on whitespace into argv (no shell, no quoting).
// Exec failures are reported through a CLOEXEC pipe so a missing binary
// surfaces as Errc::solver_spawn at construction instead of a later EOF.
// Replies are read with a poll() deadline; a reply is complete once all
// parentheses balance and a newline follows the last token, which covers both
// bare-word answers ("sat") and multi-line model s-expressions.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::smt {

namespace detail {

inline std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  std::string cur;
  for (char c : cmd) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) argv.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) argv.push_back(std::move(cur));
  return argv;
}

}  // namespace detail

class SolverProcess {
 public:
  explicit SolverProcess(std::string command) : command_(std::move(command)) { spawn(); }
  ~SolverProcess() { shutdown(); }

  SolverProcess(const SolverProcess&) = delete;
  SolverProcess& operator=(const SolverProcess&) = delete;

  const std::string& command() const { return command_; }
  bool alive() const { return pid_ > 0; }

  void send(const std::string& text) {
    if (!alive()) fail(Errc::solver_crash, "solver process is down");
    size_t off = 0;
    while (off < text.size()) {
      ssize_t n = ::write(in_fd_, text.data() + off, text.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        mark_dead();
        fail(Errc::solver_crash, "write to solver failed: %s", std::strerror(errno));
      }
      off += static_cast<size_t>(n);
    }
  }

  // One complete reply, or nullopt if the deadline passes first. EOF from the
  // child raises solver_crash. Buffered bytes past a complete reply are kept
  // for the next call.
  std::optional<std::string> read_reply(int deadline_ms) {
    i64 deadline = now_ms() + deadline_ms;
    for (;;) {
      if (auto done = take_reply()) return done;
      if (!alive()) fail(Errc::solver_crash, "solver process is down");
      i64 left = deadline - now_ms();
      if (left <= 0) return std::nullopt;
      struct pollfd pfd {
        out_fd_, POLLIN, 0
      };
      int pr = ::poll(&pfd, 1, static_cast<int>(left > 1000000 ? 1000000 : left));
      if (pr < 0) {
        if (errno == EINTR) continue;
        mark_dead();
        fail(Errc::solver_crash, "poll on solver failed: %s", std::strerror(errno));
      }
      if (pr == 0) continue;  // re-check deadline
      char chunk[4096];
      ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        mark_dead();
        fail(Errc::solver_crash, "read from solver failed: %s", std::strerror(errno));
      }
      if (n == 0) {
        mark_dead();
        fail(Errc::solver_crash, "solver closed its output (command: %s)", command_.c_str());
      }
      buf_.append(chunk, static_cast<size_t>(n));
    }
  }

  void restart() {
    shutdown();
    spawn();
  }

  // Hard-kill without waiting for a reply; used after timeouts where the
  // child may be wedged mid-query.
  void kill_now() { shutdown(); }

 private:
  static i64 now_ms() {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<i64>(ts.tv_sec) * 1000 + ts.tv_nsec / 1000000;
  }

  void spawn() {
    auto argv = detail::split_command(command_);
    if (argv.empty()) fail(Errc::solver_spawn, "empty solver command");

    int to_child[2], from_child[2], execerr[2];
    if (::pipe(to_child) < 0 || ::pipe(from_child) < 0 || ::pipe(execerr) < 0)
      fail(Errc::solver_spawn, "pipe: %s", std::strerror(errno));
    ::fcntl(execerr[1], F_SETFD, FD_CLOEXEC);

    pid_t pid = ::fork();
    if (pid < 0) fail(Errc::solver_spawn, "fork: %s", std::strerror(errno));
    if (pid == 0) {
      ::dup2(to_child[0], 0);
      ::dup2(from_child[1], 1);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::close(execerr[0]);
      std::vector<char*> cargv;
      for (auto& a : argv) cargv.push_back(a.data());
      cargv.push_back(nullptr);
      ::execvp(cargv[0], cargv.data());
      int err = errno;
      ssize_t w = ::write(execerr[1], &err, sizeof err);
      (void)w;
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(execerr[1]);

    int err = 0;
    ssize_t n = ::read(execerr[0], &err, sizeof err);  // 0 bytes = exec succeeded
    ::close(execerr[0]);
    if (n > 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      int status;
      ::waitpid(pid, &status, 0);
      fail(Errc::solver_spawn, "cannot run solver `%s`: %s", argv[0].c_str(),
           std::strerror(err));
    }

    pid_ = pid;
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    ::signal(SIGPIPE, SIG_IGN);  // broken pipes surface as write errors
    buf_.clear();
    reset_scan();
  }

  void shutdown() {
    if (pid_ > 0) {
      ::close(in_fd_);
      ::close(out_fd_);
      ::kill(pid_, SIGKILL);
      int status;
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
    in_fd_ = out_fd_ = -1;
    buf_.clear();
    reset_scan();
  }

  void mark_dead() {
    if (pid_ > 0) {
      ::close(in_fd_);
      ::close(out_fd_);
      ::kill(pid_, SIGKILL);
      int status;
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
    in_fd_ = out_fd_ = -1;
  }

  void reset_scan() {
    scanned_ = 0;
    depth_ = 0;
    in_string_ = false;
    saw_token_ = false;
  }

  // Scan buf_ for a complete reply: parens balanced back to zero and a
  // newline after at least one token.
  std::optional<std::string> take_reply() {
    for (; scanned_ < buf_.size(); scanned_++) {
      char c = buf_[scanned_];
      if (in_string_) {
        if (c == '"') in_string_ = false;
        continue;
      }
      switch (c) {
        case '"': in_string_ = true; saw_token_ = true; break;
        case '(': depth_++; saw_token_ = true; break;
        case ')':
          if (depth_ > 0) depth_--;
          break;
        case '\n':
          if (depth_ == 0 && saw_token_) {
            std::string reply = buf_.substr(0, scanned_ + 1);
            buf_.erase(0, scanned_ + 1);
            reset_scan();
            while (!reply.empty() && (reply.back() == '\n' || reply.back() == '\r'))
              reply.pop_back();
            return reply;
          }
          break;
        default:
          if (c != ' ' && c != '\t' && c != '\r') saw_token_ = true;
          break;
      }
    }
    return std::nullopt;
  }

  std::string command_;
  pid_t pid_ = -1;
  int in_fd_ = -1, out_fd_ = -1;
  std::string buf_;
  size_t scanned_ = 0;
  u32 depth_ = 0;
  bool in_string_ = false;
  bool saw_token_ = false;
};

}  // namespace wasym::smt
