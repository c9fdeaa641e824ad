#pragma once

#include <optional>
#include <string>
#include <vector>

#include "solmover/bm25.hpp"
#include "solmover/encoder.hpp"
#include "solmover/fragments.hpp"
#include "solmover/llm.hpp"
#include "solmover/solidity.hpp"

namespace solmover {

enum class Channel { Sparse, Dense };

struct ConceptCandidate {
    const Fragment* fragment = nullptr;
    double score = 0.0;
    Channel channel = Channel::Sparse;
};

struct DenseChannel {
    const Encoder* query_encoder = nullptr;
    const Encoder* context_encoder = nullptr;
};

// Union of sparse top-k and, when a dense channel is configured, dense
// top-k; duplicates keep the higher-scored channel entry. Both channels
// query with the prompt's keyword section.
std::vector<ConceptCandidate> retrieve_concepts(const TaskPrompt& prompt, const Bm25Index& sparse,
                                                const FragmentStore& store,
                                                const DenseChannel* dense, size_t k);

// Keeps exactly the candidates whose fragment carries a code snippet.
std::vector<ConceptCandidate> select_concepts(const std::vector<ConceptCandidate>& candidates);

struct SubTask {
    size_t index = 0;  // 1-based, consecutive within a plan
    std::string instruction;
    std::optional<std::string> snippet;
    std::optional<std::string> concept_id;
};

inline constexpr size_t kMaxSubTasks = 12;

// Builds the planner prompt from the template ({task}, {concepts}),
// asks the backend, and parses the response as a numbered list. Items
// are renumbered consecutively; each is linked to the first concept
// whose heading it names, inheriting that concept's first snippet.
std::vector<SubTask> generate_subtasks(LlmBackend& llm, const TaskPrompt& prompt,
                                       const std::vector<ConceptCandidate>& concepts,
                                       const std::string& planner_template,
                                       std::vector<std::string>* warnings = nullptr);

// Exposed for prompt-content tests.
std::string build_planner_prompt(const TaskPrompt& prompt,
                                 const std::vector<ConceptCandidate>& concepts,
                                 const std::string& planner_template);

}  // namespace solmover
