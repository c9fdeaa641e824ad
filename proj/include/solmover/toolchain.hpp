#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "solmover/codegen.hpp"

namespace solmover {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    std::optional<std::string> file;
    std::optional<int> line;
    std::string raw;
};

struct CompileResult {
    bool success = false;  // derived from the exit code only
    std::vector<Diagnostic> diagnostics;
    int exit_code = -1;
    long duration_ms = 0;
};

struct ProveResult {
    bool verified = false;
    std::vector<Diagnostic> diagnostics;
    int exit_code = -1;
    long duration_ms = 0;
};

struct ToolchainConfig {
    std::string compile_cmd;        // template; {package_dir} and {source_file} substituted
    std::string prove_cmd;
    std::string manifest_template;  // Move package manifest text; {name} substituted
    std::string workdir_root;
    int timeout_s = 120;
};

// Command, exit code and duration of every adapter call, for the ledger.
struct ToolInvocation {
    std::string command;
    int exit_code = 0;
    long duration_ms = 0;
};
using ToolObserver = std::function<void(const ToolInvocation&)>;

class Toolchain {
  public:
    virtual ~Toolchain() = default;
    virtual CompileResult compile(const CandidateTranslation& candidate) = 0;
    virtual ProveResult prove(const CandidateTranslation& candidate) = 0;
    void set_observer(ToolObserver observer) { observer_ = std::move(observer); }

  protected:
    void record(const ToolInvocation& inv) {
        if (observer_) observer_(inv);
    }

  private:
    ToolObserver observer_;
};

// Drives move-cli / Move Prover style external commands. Each call
// materializes an isolated package directory (manifest plus sources)
// under the configured work root.
class ProcessToolchain : public Toolchain {
  public:
    explicit ProcessToolchain(ToolchainConfig cfg);
    CompileResult compile(const CandidateTranslation& candidate) override;
    ProveResult prove(const CandidateTranslation& candidate) override;

  private:
    struct Outcome {
        bool ok;
        std::vector<Diagnostic> diagnostics;
        int exit_code;
        long duration_ms;
    };
    Outcome run_tool(const std::string& cmd_template, const CandidateTranslation& candidate,
                     const char* phase);
    ToolchainConfig cfg_;
    std::mutex mu_;
    int call_seq_ = 0;
};

// Scripted stand-in consuming a fixed plan. Calling it more times than
// scripted throws ScriptExhausted, which is how loop-bound bugs surface.
struct MockStep {
    bool pass = true;
    std::string stderr_text;
};

class ScriptedToolchain : public Toolchain {
  public:
    ScriptedToolchain(std::vector<MockStep> compile_plan, std::vector<MockStep> prove_plan);
    CompileResult compile(const CandidateTranslation& candidate) override;
    ProveResult prove(const CandidateTranslation& candidate) override;
    size_t compile_calls() const { return compile_next_; }
    size_t prove_calls() const { return prove_next_; }

  private:
    MockStep take(std::vector<MockStep>& plan, size_t& next, const char* phase);
    std::vector<MockStep> compile_plan_;
    std::vector<MockStep> prove_plan_;
    size_t compile_next_ = 0;
    size_t prove_next_ = 0;
    std::mutex mu_;
};

// Best-effort parse of compiler/prover output: `error[...]:`-style
// headers plus `--> file:line` (or box-drawing) locators. Unmatched
// text never changes the outcome; it is preserved raw by callers.
std::vector<Diagnostic> parse_diagnostics(const std::string& output);

// Errors first, each rendered "file:line: message", cut at entry
// boundaries to fit the budget with a "(+N more)" marker. The first
// entry is always present, truncated mid-message only when it alone
// exceeds the budget.
std::string summarize_diagnostics(const std::vector<Diagnostic>& diagnostics, size_t budget);

}  // namespace solmover
