#include "solmover/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

#include "solmover/errors.hpp"

namespace solmover {

RunResult run_command(const std::string& command, int timeout_s, const std::string& workdir) {
    int out_pipe[2];
    int err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw Error("pipe() failed: " + std::string(std::strerror(errno)));
    }

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw Error("fork() failed: " + std::string(std::strerror(errno)));

    if (pid == 0) {
        setpgid(0, 0);  // own process group so a timeout kill reaps children too
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);

    RunResult result;
    struct Stream {
        int fd;
        std::string* sink;
        bool open = true;
    };
    Stream streams[2] = {{out_pipe[0], &result.out}, {err_pipe[0], &result.err}};

    auto deadline = start + std::chrono::seconds(timeout_s);
    char buf[4096];
    while (streams[0].open || streams[1].open) {
        struct pollfd fds[2];
        nfds_t nfds = 0;
        for (auto& s : streams) {
            if (s.open) {
                fds[nfds].fd = s.fd;
                fds[nfds].events = POLLIN;
                ++nfds;
            }
        }
        auto now = std::chrono::steady_clock::now();
        long remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        if (remaining <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        int rc = poll(fds, nfds, static_cast<int>(std::min(remaining, 1000L)));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        for (nfds_t i = 0; i < nfds; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
            for (auto& s : streams) {
                if (!s.open || s.fd != fds[i].fd) continue;
                ssize_t n = read(s.fd, buf, sizeof(buf));
                if (n > 0) {
                    s.sink->append(buf, static_cast<size_t>(n));
                } else {
                    close(s.fd);
                    s.open = false;
                }
            }
        }
    }
    for (auto& s : streams) {
        if (s.open) close(s.fd);
    }

    int status = 0;
    waitpid(pid, &status, 0);
    if (result.timed_out) {
        result.exit_code = 124;
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    return result;
}

}  // namespace solmover
