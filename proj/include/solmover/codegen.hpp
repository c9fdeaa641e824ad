#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "solmover/llm.hpp"
#include "solmover/planner.hpp"

namespace solmover {

struct CodeChunk {
    size_t subtask_index = 0;
    std::string code;          // verbatim contents of the first fenced block
    std::string raw_response;
};

struct CandidateTranslation {
    std::string move_source;
    std::vector<CodeChunk> chunks;  // sorted by subtask_index
    int revision = 0;
    // subtask_index -> inclusive 1-based line range in move_source
    std::map<size_t, std::pair<size_t, size_t>> provenance;
};

// Contents of the first fenced block in a response. Any info string is
// accepted; models routinely mislabel Move code. Throws NoCodeBlock.
std::string extract_fenced_block(const std::string& response);

// Per-sub-task generation: instruction plus attached snippet plus an
// output-format directive, optionally wrapped with few-shot exemplars.
CodeChunk generate_chunk(LlmBackend& llm, const SubTask& task,
                         const std::vector<FewShotExemplar>& exemplars = {});

// Orders chunks by sub-task index and joins them with exactly one blank
// line. Throws EmptyPlan / DuplicateIndex.
CandidateTranslation assemble(std::vector<CodeChunk> chunks);

// Whole-file repair: current source plus the diagnostics digest go back
// to the model, which must return the corrected full file in one fenced
// block. Bumps the revision and collapses the chunk list to one.
CandidateTranslation repair(LlmBackend& llm, const CandidateTranslation& candidate,
                            const std::string& diagnostics_digest);

// Exposed for prompt-content tests.
std::string build_generation_prompt(const SubTask& task);
std::string build_repair_prompt(const CandidateTranslation& candidate,
                                const std::string& diagnostics_digest);

}  // namespace solmover
