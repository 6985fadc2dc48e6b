#include "vulnforge/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "vulnforge/error.hpp"

namespace vulnforge {

namespace {

class Pipe {
 public:
  Pipe() {
    if (::pipe2(fds_.data(), O_CLOEXEC) != 0)
      throw Error(ErrorKind::ProcessError, std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() { close(0); }
  void close_write() { close(1); }

 private:
  void close(int idx) {
    if (fds_[idx] >= 0) {
      ::close(fds_[idx]);
      fds_[idx] = -1;
    }
  }
  std::array<int, 2> fds_{-1, -1};
};

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
  if (argv.empty()) throw Error(ErrorKind::ProcessError, "empty command line");

  Pipe in, out, err, exec_status;
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::ProcessError, std::string("fork: ") + std::strerror(errno));

  if (pid == 0) {
    ::dup2(in.read_end(), STDIN_FILENO);
    ::dup2(out.write_end(), STDOUT_FILENO);
    ::dup2(err.write_end(), STDERR_FILENO);
    if (options.cwd && ::chdir(options.cwd->c_str()) != 0) {
      int code = errno;
      (void)!::write(exec_status.write_end(), &code, sizeof code);
      ::_exit(127);
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    int code = errno;
    (void)!::write(exec_status.write_end(), &code, sizeof code);
    ::_exit(127);
  }

  in.close_read();
  out.close_write();
  err.close_write();
  exec_status.close_write();

  int exec_errno = 0;
  if (::read(exec_status.read_end(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw Error(ErrorKind::ProcessError,
                "cannot start '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  // SIGPIPE from a child that exits before consuming stdin must not kill us.
  struct sigaction ignore {}, previous {};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &previous);

  ProcessResult result;
  std::size_t written = 0;
  if (options.input.empty()) in.close_write();
  bool in_open = !options.input.empty(), out_open = true, err_open = true;
  std::array<char, 65536> buffer{};
  while (out_open || err_open || in_open) {
    std::vector<pollfd> fds;
    if (in_open) fds.push_back({in.write_end(), POLLOUT, 0});
    if (out_open) fds.push_back({out.read_end(), POLLIN, 0});
    if (err_open) fds.push_back({err.read_end(), POLLIN, 0});
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (in_open && p.fd == in.write_end()) {
        const ssize_t n = ::write(p.fd, options.input.data() + written, options.input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 || written == options.input.size()) {
          in.close_write();
          in_open = false;
        }
        continue;
      }
      const ssize_t n = ::read(p.fd, buffer.data(), buffer.size());
      const bool is_out = out_open && p.fd == out.read_end();
      if (n > 0) {
        (is_out ? result.out : result.err).append(buffer.data(), static_cast<std::size_t>(n));
      } else {
        (is_out ? out_open : err_open) = false;
      }
    }
  }
  ::sigaction(SIGPIPE, &previous, nullptr);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

bool program_available(const std::string& program) {
  if (program.empty()) return false;
  if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((dir + "/" + program).c_str(), X_OK) == 0) return true;
  }
  return false;
}

}  // namespace vulnforge
