#include "rnagg/external.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>

namespace rnagg {

std::string_view to_string(ExternalErrorKind k) {
  switch (k) {
    case ExternalErrorKind::NotFound: return "external-not-found";
    case ExternalErrorKind::Failed: return "external-failed";
    case ExternalErrorKind::Unparsable: return "external-unparsable";
    case ExternalErrorKind::Timeout: return "external-timeout";
  }
  return "external-error";
}

std::optional<double> parse_energy_value(std::string_view text) {
  std::string t(text);
  // U+2212 MINUS SIGN
  for (auto pos = t.find("\xE2\x88\x92"); pos != std::string::npos; pos = t.find("\xE2\x88\x92")) {
    t.replace(pos, 3, "-");
  }
  auto b = t.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return std::nullopt;
  auto e = t.find_last_not_of(" \t\r\n");
  t = t.substr(b, e - b + 1);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

namespace {

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void assign(int fd) {
    reset();
    fd_ = fd;
  }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

struct Pipe {
  Fd read, write;
  Pipe() {
    int fds[2];
    if (::pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    read.assign(fds[0]);
    write.assign(fds[1]);
  }
};

/// Writes without dying on SIGPIPE if the child exits early.
void write_all(int fd, const std::string& data) {
  sigset_t block, old;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, &old);
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t w = ::write(fd, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      break;
    }
    off += static_cast<std::size_t>(w);
  }
  sigset_t pending;
  sigpending(&pending);
  if (sigismember(&pending, SIGPIPE)) {
    timespec zero{0, 0};
    sigtimedwait(&block, nullptr, &zero);
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
}

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

ProcessResult run_shell(const std::string& command, const std::string& input,
                        std::chrono::milliseconds timeout) {
  Pipe in, out, err;
  pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    for (int fd : {in.read.get(), in.write.get(), out.read.get(), out.write.get(), err.read.get(),
                   err.write.get()}) {
      ::close(fd);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  in.read.reset();
  out.write.reset();
  err.write.reset();
  write_all(in.write.get(), input);
  in.write.reset();

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::array<pollfd, 2> fds{{{out.read.get(), POLLIN, 0}, {err.read.get(), POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  int open = 2;
  while (open > 0) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    int r = ::poll(fds.data(), fds.size(), static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
      if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char buf[4096];
      ssize_t got = ::read(fds[k].fd, buf, sizeof buf);
      if (got > 0) {
        sinks[k]->append(buf, static_cast<std::size_t>(got));
      } else if (got == 0 || errno != EINTR) {
        fds[k].fd = -1;
        --open;
      }
    }
  }
  if (result.timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

}  // namespace

double ExternalEvaluator::evaluate(const PrimarySequence& seq, const SecondaryStructure& s) {
  std::string input = seq.str() + "\n" + emit_dot_bracket(s) + "\n";
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(input); it != cache_.end()) return it->second;
  }
  double v = 0.0;
  if (opts_.concurrent_safe) {
    v = run_command(input);
  } else {
    std::lock_guard lock(call_mutex_);
    v = run_command(input);
  }
  std::lock_guard lock(cache_mutex_);
  cache_[input] = v;
  return v;
}

std::size_t ExternalEvaluator::invocations() const {
  std::lock_guard lock(cache_mutex_);
  return invocations_;
}

double ExternalEvaluator::run_command(const std::string& input) {
  if (opts_.command.empty()) {
    throw ExternalError(ExternalErrorKind::NotFound, "no external evaluator command configured", "");
  }
  {
    std::lock_guard lock(cache_mutex_);
    ++invocations_;
  }
  auto r = run_shell(opts_.command, input, opts_.timeout);
  std::string captured = r.out + r.err;
  if (r.timed_out) {
    throw ExternalError(ExternalErrorKind::Timeout,
                        "external evaluator timed out after " +
                            std::to_string(opts_.timeout.count()) + " ms",
                        captured);
  }
  if (r.exit_code == 127 || r.exit_code == 126) {
    throw ExternalError(ExternalErrorKind::NotFound,
                        "external evaluator command not found: " + opts_.command, captured);
  }
  if (r.exit_code != 0) {
    throw ExternalError(ExternalErrorKind::Failed,
                        "external evaluator exited with status " + std::to_string(r.exit_code),
                        captured);
  }
  auto v = parse_energy_value(r.out);
  if (!v) {
    throw ExternalError(ExternalErrorKind::Unparsable,
                        "external evaluator printed no single number", captured);
  }
  return *v;
}

}  // namespace rnagg
