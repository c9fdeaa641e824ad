#include "solmover/codegen.hpp"

#include <algorithm>
#include <set>

#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

namespace {

const char* kGeneratorSystem =
    "You are a Move smart contract engineer translating Solidity contracts to Move.";

size_t line_count(const std::string& text) {
    return static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

}  // namespace

std::string extract_fenced_block(const std::string& response) {
    auto lines = split_lines(response);
    size_t open = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        if (starts_with(trim(lines[i]), "```")) {
            open = i;
            break;
        }
    }
    if (open == lines.size()) {
        throw NoCodeBlock("response contains no fenced code block", response);
    }
    std::string code;
    bool closed = false;
    for (size_t i = open + 1; i < lines.size(); ++i) {
        if (trim(lines[i]) == "```") {
            closed = true;
            break;
        }
        if (!code.empty()) code += "\n";
        code += lines[i];
    }
    (void)closed;  // unterminated fences keep everything after the opener
    if (trim(code).empty()) {
        throw NoCodeBlock("fenced block in response is empty", response);
    }
    return code;
}

std::string build_generation_prompt(const SubTask& task) {
    std::string prompt = "TASK " + std::to_string(task.index) + ": " + task.instruction + "\n";
    if (task.snippet) {
        prompt += "\nREFERENCE MOVE SNIPPET:\n```\n" + *task.snippet + "\n```\n";
    }
    prompt +=
        "\nWrite the Move code for this task. Respond with a single fenced code block and "
        "nothing else.";
    return prompt;
}

CodeChunk generate_chunk(LlmBackend& llm, const SubTask& task,
                         const std::vector<FewShotExemplar>& exemplars) {
    if (task.instruction.empty()) throw Error("sub-task has an empty instruction");
    auto messages = build_fewshot_messages(exemplars, build_generation_prompt(task),
                                           kGeneratorSystem);
    LlmResponse response = llm.complete(messages);
    CodeChunk chunk;
    chunk.subtask_index = task.index;
    chunk.raw_response = response.content;
    chunk.code = extract_fenced_block(response.content);
    return chunk;
}

CandidateTranslation assemble(std::vector<CodeChunk> chunks) {
    if (chunks.empty()) throw EmptyPlan("cannot assemble an empty chunk list");
    std::sort(chunks.begin(), chunks.end(),
              [](const CodeChunk& a, const CodeChunk& b) { return a.subtask_index < b.subtask_index; });
    std::set<size_t> seen;
    for (const auto& chunk : chunks) {
        if (!seen.insert(chunk.subtask_index).second)
            throw DuplicateIndex("duplicate sub-task index " + std::to_string(chunk.subtask_index));
        if (chunk.code.empty()) throw Error("chunk with empty code");
    }

    CandidateTranslation candidate;
    candidate.revision = 0;
    size_t line = 1;
    for (auto& chunk : chunks) {
        if (!candidate.move_source.empty()) {
            candidate.move_source += "\n\n";
            ++line;  // the blank line
        }
        size_t n = line_count(chunk.code);
        candidate.provenance[chunk.subtask_index] = {line, line + n - 1};
        candidate.move_source += chunk.code;
        line += n;
    }
    candidate.chunks = std::move(chunks);
    return candidate;
}

std::string build_repair_prompt(const CandidateTranslation& candidate,
                                const std::string& diagnostics_digest) {
    std::string prompt =
        "The following Move translation does not pass the toolchain.\n\nCURRENT CODE:\n```\n" +
        candidate.move_source + "\n```\n\nDIAGNOSTICS:\n" + diagnostics_digest +
        "\n\nFix the problems and return the corrected FULL file in one fenced code block.";
    return prompt;
}

CandidateTranslation repair(LlmBackend& llm, const CandidateTranslation& candidate,
                            const std::string& diagnostics_digest) {
    if (trim(diagnostics_digest).empty())
        throw Error("repair requires a non-empty diagnostics digest");

    auto messages = build_fewshot_messages({}, build_repair_prompt(candidate, diagnostics_digest),
                                           kGeneratorSystem);
    LlmResponse response = llm.complete(messages);

    CodeChunk whole;
    whole.subtask_index = 1;
    whole.raw_response = response.content;
    whole.code = extract_fenced_block(response.content);

    CandidateTranslation repaired;
    repaired.move_source = whole.code;
    repaired.revision = candidate.revision + 1;
    repaired.provenance[1] = {1, line_count(whole.code)};
    repaired.chunks.push_back(std::move(whole));
    return repaired;
}

}  // namespace solmover
