#pragma once

#include <string>

namespace solmover {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    long duration_ms = 0;
    bool timed_out = false;
};

// Runs `sh -c command`, capturing stdout and stderr. On timeout the
// process group is killed and `timed_out` is set. Exit code 127 means
// the command was not found.
RunResult run_command(const std::string& command, int timeout_s,
                      const std::string& workdir = "");

}  // namespace solmover
