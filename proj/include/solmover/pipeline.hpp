#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "solmover/codegen.hpp"
#include "solmover/llm.hpp"
#include "solmover/planner.hpp"
#include "solmover/solidity.hpp"
#include "solmover/toolchain.hpp"

namespace solmover {

enum class Status {
    Pending,
    CompiledFirstTry,
    CompiledAfterCompilerFeedback,
    VerifiedSafe,
    CompilableUnverified,
    FailedCompilation,
    FailedPlanning,
};

std::string status_to_string(Status status);
Status status_from_string(const std::string& name);

struct TimelineEvent {
    long timestamp_ms = 0;
    std::string phase;
    std::string detail;
};

struct TranslationRecord {
    std::string contract_id;
    std::string model_name;
    Status status = Status::Pending;
    int compile_attempts = 0;
    int prove_attempts = 0;
    int final_revision = 0;
    // A compile success surfaced by a prover-phase repair rather than the
    // compile loop. Counted by "SC after Move Prover Feedback" only.
    bool compiled_in_prover_phase = false;
    std::vector<TimelineEvent> timeline;

    std::string to_json_line() const;
    static TranslationRecord from_json_line(const std::string& line);
};

// Append-only newline-delimited record log; one terminal record per line.
class RunLedger {
  public:
    explicit RunLedger(std::string path);
    void append(const TranslationRecord& record);
    static std::vector<TranslationRecord> read_all(const std::string& path);
    static std::unordered_set<std::string> terminal_ids(const std::string& path);

  private:
    std::string path_;
    std::mutex mu_;
};

using Clock = std::function<long()>;
Clock system_clock_ms();

struct PipelineDeps {
    const Bm25Index* sparse = nullptr;
    const FragmentStore* store = nullptr;
    const DenseChannel* dense = nullptr;  // optional
    LlmBackend* planner = nullptr;
    LlmBackend* generator = nullptr;
    Toolchain* toolchain = nullptr;
    const std::unordered_set<std::string>* stopwords = nullptr;
    std::string task_template;
    std::string planner_template;
    std::string model_label;  // recorded on every TranslationRecord
    std::vector<FewShotExemplar> exemplars;
    Clock clock;  // injected for deterministic runs
    // Called for every new candidate revision (artifact persistence).
    std::function<void(const CandidateTranslation&)> on_revision;
};

struct PipelineOptions {
    size_t max_keywords = 12;
    size_t prompt_budget = 4000;
    size_t retrieval_k = 5;
    int max_attempts = 5;
    size_t diagnostic_budget = 2000;
    bool prover_enabled = true;
    long contract_budget_ms = 30 * 60 * 1000;
};

struct CompileLoopResult {
    CandidateTranslation candidate;
    CompileResult result;
    int attempts = 0;
};

// Compile, and on failure summarize -> repair -> recompile, up to `max`
// compile invocations. Stops at the first success.
CompileLoopResult compile_loop(CandidateTranslation candidate, PipelineDeps& deps,
                               const PipelineOptions& opts, TranslationRecord* record);

struct ProveLoopResult {
    CandidateTranslation candidate;
    ProveResult result;
    int attempts = 0;
};

// Mirror of the compile loop against the prover. A repair that breaks
// compilation consumes a failed attempt and rolls back to the last
// compiling revision.
ProveLoopResult prove_loop(CandidateTranslation candidate, PipelineDeps& deps,
                           const PipelineOptions& opts, TranslationRecord* record);

// The full five-phase lifecycle for one contract. Never throws: every
// failure becomes a terminal status in the returned record.
TranslationRecord translate_contract(const SoliditySource& source, PipelineDeps& deps,
                                     const PipelineOptions& opts);

}  // namespace solmover
