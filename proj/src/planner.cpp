#include "solmover/planner.hpp"

#include <algorithm>
#include <cctype>

#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

namespace {

constexpr size_t kConceptExcerptChars = 400;

bool contains_ci(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    std::string h = to_lower(haystack);
    std::string n = to_lower(needle);
    return h.find(n) != std::string::npos;
}

// "12." at line start; returns the item text or nullopt.
std::optional<std::string> numbered_item(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size() || line[i] != '.') return std::nullopt;
    return std::string(trim(std::string_view(line).substr(i + 1)));
}

}  // namespace

std::vector<ConceptCandidate> retrieve_concepts(const TaskPrompt& prompt, const Bm25Index& sparse,
                                                const FragmentStore& store,
                                                const DenseChannel* dense, size_t k) {
    if (k < 1) throw Error("concept retrieval needs k >= 1");
    const auto query = index_tokens(prompt.keyword_section);

    std::vector<ConceptCandidate> merged;
    auto add = [&](const std::string& id, double score, Channel channel) {
        const Fragment* frag = store.find(id);
        if (!frag) return;
        for (auto& existing : merged) {
            if (existing.fragment->id == id) {
                if (score > existing.score) existing = {frag, score, channel};
                return;
            }
        }
        merged.push_back({frag, score, channel});
    };

    for (const auto& hit : search_bm25(sparse, query, k)) {
        add(hit.fragment_id, hit.score, Channel::Sparse);
    }
    if (dense && dense->query_encoder && dense->context_encoder) {
        for (const auto& hit :
             search_dense(*dense->query_encoder, *dense->context_encoder, store,
                          prompt.keyword_section, k)) {
            add(hit.fragment_id, hit.score, Channel::Dense);
        }
    }

    std::sort(merged.begin(), merged.end(), [](const ConceptCandidate& a, const ConceptCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment->id < b.fragment->id;
    });
    return merged;
}

std::vector<ConceptCandidate> select_concepts(const std::vector<ConceptCandidate>& candidates) {
    std::vector<ConceptCandidate> selected;
    for (const auto& cand : candidates) {
        if (cand.fragment && !cand.fragment->code_snippets.empty()) selected.push_back(cand);
    }
    return selected;
}

std::string build_planner_prompt(const TaskPrompt& prompt,
                                 const std::vector<ConceptCandidate>& concepts,
                                 const std::string& planner_template) {
    for (const char* ph : {"{task}", "{concepts}"}) {
        if (planner_template.find(ph) == std::string::npos)
            throw TemplateError(std::string("planner template missing placeholder ") + ph);
    }
    std::string concept_section;
    for (const auto& cand : concepts) {
        const Fragment& frag = *cand.fragment;
        concept_section += "### " + frag.heading + "\n";
        std::string excerpt = frag.text.substr(0, kConceptExcerptChars);
        if (!excerpt.empty()) concept_section += excerpt + "\n";
        if (!frag.code_snippets.empty()) {
            concept_section += "```\n" + frag.code_snippets.front() + "\n```\n";
        }
        concept_section += "\n";
    }
    return render_template(planner_template,
                           {{"task", prompt.rendered}, {"concepts", concept_section}});
}

std::vector<SubTask> generate_subtasks(LlmBackend& llm, const TaskPrompt& prompt,
                                       const std::vector<ConceptCandidate>& concepts,
                                       const std::string& planner_template,
                                       std::vector<std::string>* warnings) {
    std::string planner_prompt = build_planner_prompt(prompt, concepts, planner_template);
    LlmResponse response = llm.complete({{Role::User, planner_prompt}});

    std::vector<std::string> items;
    for (const auto& line : split_lines(response.content)) {
        if (auto item = numbered_item(line)) {
            items.push_back(*item);
        } else if (!items.empty() && !trim(line).empty()) {
            items.back() += " " + std::string(trim(line));  // wrapped continuation
        }
    }
    if (items.empty()) {
        throw PlanParseError("planner response contains no numbered list", response.content);
    }
    if (items.size() > kMaxSubTasks) {
        if (warnings)
            warnings->push_back("plan truncated from " + std::to_string(items.size()) + " to " +
                                std::to_string(kMaxSubTasks) + " sub-tasks");
        items.resize(kMaxSubTasks);
    }

    std::vector<SubTask> plan;
    size_t index = 1;
    for (auto& instruction : items) {
        SubTask task;
        task.index = index++;
        task.instruction = std::move(instruction);
        for (const auto& cand : concepts) {
            if (contains_ci(task.instruction, cand.fragment->heading)) {
                task.concept_id = cand.fragment->id;
                if (!cand.fragment->code_snippets.empty())
                    task.snippet = cand.fragment->code_snippets.front();
                break;
            }
        }
        plan.push_back(std::move(task));
    }
    return plan;
}

}  // namespace solmover
