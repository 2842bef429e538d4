#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <regex>

#include "ssg/repair.hpp"
#include "ssg/util.hpp"

namespace ssg::repair {

namespace {

void set_cloexec(int fd) { ::fcntl(fd, F_SETFD, FD_CLOEXEC); }

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd,
                          std::chrono::milliseconds timeout) {
  if (argv.empty()) throw std::invalid_argument("run_process: empty argv");
  int out_pipe[2], err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
  for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) set_cloexec(fd);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const std::string dir = cwd.string();

  const pid_t pid = ::fork();
  if (pid < 0) throw IoError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (::chdir(dir.c_str()) != 0) {
      dprintf(STDERR_FILENO, "cannot enter %s: %s\n", dir.c_str(), std::strerror(errno));
      ::_exit(126);
    }
    ::execvp(args[0], args.data());
    const int e = errno;
    if (e == ENOENT)
      dprintf(STDERR_FILENO, "command not found: %s\n", args[0]);
    else
      dprintf(STDERR_FILENO, "cannot execute %s: %s\n", args[0], std::strerror(e));
    ::_exit(e == ENOENT ? 127 : 126);
  }
  ::setpgid(pid, pid);  // both sides, whichever runs first
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ProcessResult r;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  std::string* sinks[2] = {&r.out, &r.err};
  int open_fds = 2;
  char buf[4096];
  while (open_fds > 0) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      r.timed_out = true;
      break;
    }
    const int n = ::poll(fds, 2, static_cast<int>(std::min<long long>(left, 1000)));
    if (n < 0 && errno != EINTR) break;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const auto got = ::read(fds[i].fd, buf, sizeof buf);
      if (got > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(got));
      } else if (got == 0 || errno != EINTR) {
        ::close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }
  if (r.timed_out) ::kill(-pid, SIGKILL);
  for (auto& f : fds)
    if (f.fd >= 0) ::close(f.fd);

  int status = 0;
  if (!r.timed_out) {
    // Pipes closed but the child may linger; keep honouring the deadline.
    for (;;) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (w < 0 && errno != EINTR) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        r.timed_out = true;
        ::kill(-pid, SIGKILL);
        break;
      }
      ::usleep(2000);
    }
  }
  if (r.timed_out) {
    ::waitpid(pid, &status, 0);
    r.exit_code = -1;
    return r;
  }
  // Reap stragglers left in the group.
  ::kill(-pid, SIGKILL);
  if (WIFEXITED(status))
    r.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    r.exit_code = 128 + WTERMSIG(status);
  return r;
}

std::string ssg_executable() {
  const char* e = std::getenv("SSG_EXE");
  return e && *e ? e : "ssg";
}

std::vector<std::string> expand_command(const std::vector<std::string>& argv) {
  auto out = argv;
  for (auto& a : out)
    if (a == "{ssg}") a = ssg_executable();
  return out;
}

namespace {

ValidationResult run_in(const fs::path& dir, const std::vector<std::string>& argv, std::chrono::seconds timeout) {
  ValidationResult v;
  try {
    auto pr = run_process(expand_command(argv), dir, timeout);
    v.exit_code = pr.exit_code;
    v.timed_out = pr.timed_out;
    v.output = pr.out + pr.err;
    if (pr.timed_out) v.output += "\ntimeout after " + std::to_string(timeout.count()) + "s";
    v.passed = !pr.timed_out && pr.exit_code == 0;
  } catch (const std::exception& e) {
    v.output = std::string("spawn failure: ") + e.what();
  }
  return v;
}

}  // namespace

ValidationResult validate(const RepairTask& task) {
  check_task(task);
  ScratchDir scratch("ssg-validate");
  copy_tree(task.codebase_root, scratch.path());
  return run_in(scratch.path(), task.test_command, task.timeout);
}

bool dependency_failure(const ValidationResult& r, const ValidationConfig& cfg) {
  if (r.passed || r.timed_out) return false;
  for (const auto& p : cfg.dependency_patterns)
    if (r.output.find(p) != std::string::npos) return true;
  return false;
}

ValidationResult fallback_validate(const RepairTask& task, model::ModelBackend& backend, const FallbackContext& ctx) {
  check_task(task);
  auto tmpl = model::PromptTemplate::named("fallback.txt");
  auto [system, user] = tmpl.render_messages(
      {{"problem_statement", task.issue_text}, {"patch", ctx.patch_text}, {"test_output", ctx.test_output}});
  model::ModelRequest req{system, user, {}, model::scenario_key(task.id, "fallback", ctx.round)};
  const auto reply = backend.complete(req).text;

  static const std::regex fence(R"(```[ \t]*([A-Za-z0-9_+-]*)[^\n]*\n([\s\S]*?)```)");
  std::smatch m;
  if (!std::regex_search(reply, m, fence)) throw model::FormatError("fallback reply contains no fenced script", reply);
  const std::string lang = m[1].str();
  std::string ext, interpreter;
  if (lang == "js" || lang == "javascript" || lang == "node") {
    ext = "js", interpreter = "node";
  } else if (lang == "sh" || lang == "shell") {
    ext = "sh", interpreter = "sh";
  } else if (lang == "bash") {
    ext = "sh", interpreter = "bash";
  } else if (lang == "py" || lang == "python") {
    ext = "py", interpreter = "python3";
  } else {
    throw model::FormatError("fallback script language '" + lang + "' is not supported", reply);
  }

  ScratchDir scratch("ssg-fallback");
  copy_tree(task.codebase_root, scratch.path());
  const std::string name = "test_fix." + ext;
  write_file(scratch.path() / name, m[2].str());
  auto v = run_in(scratch.path(), {interpreter, name}, task.timeout);
  v.via_fallback = true;
  return v;
}

}  // namespace ssg::repair
