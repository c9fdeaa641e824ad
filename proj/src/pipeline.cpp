#include "solmover/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

using nlohmann::json;

namespace {
constexpr int kLedgerSchemaVersion = 1;
}

std::string status_to_string(Status status) {
    switch (status) {
        case Status::Pending: return "pending";
        case Status::CompiledFirstTry: return "compiled_first_try";
        case Status::CompiledAfterCompilerFeedback: return "compiled_after_compiler_feedback";
        case Status::VerifiedSafe: return "verified_safe";
        case Status::CompilableUnverified: return "compilable_unverified";
        case Status::FailedCompilation: return "failed_compilation";
        case Status::FailedPlanning: return "failed_planning";
    }
    return "pending";
}

Status status_from_string(const std::string& name) {
    if (name == "pending") return Status::Pending;
    if (name == "compiled_first_try") return Status::CompiledFirstTry;
    if (name == "compiled_after_compiler_feedback") return Status::CompiledAfterCompilerFeedback;
    if (name == "verified_safe") return Status::VerifiedSafe;
    if (name == "compilable_unverified") return Status::CompilableUnverified;
    if (name == "failed_compilation") return Status::FailedCompilation;
    if (name == "failed_planning") return Status::FailedPlanning;
    throw Error("unknown translation status: " + name);
}

std::string TranslationRecord::to_json_line() const {
    json j;
    j["schema_version"] = kLedgerSchemaVersion;
    j["type"] = "record";
    j["contract_id"] = contract_id;
    j["model_name"] = model_name;
    j["status"] = status_to_string(status);
    j["compile_attempts"] = compile_attempts;
    j["prove_attempts"] = prove_attempts;
    j["final_revision"] = final_revision;
    j["compiled_in_prover_phase"] = compiled_in_prover_phase;
    json events = json::array();
    for (const auto& e : timeline)
        events.push_back({{"ts", e.timestamp_ms}, {"phase", e.phase}, {"detail", e.detail}});
    j["timeline"] = std::move(events);
    return j.dump();
}

TranslationRecord TranslationRecord::from_json_line(const std::string& line) {
    json j = json::parse(line);
    if (j.value("schema_version", 0) != kLedgerSchemaVersion)
        throw FormatVersionMismatch("ledger schema version mismatch");
    TranslationRecord rec;
    rec.contract_id = j.at("contract_id").get<std::string>();
    rec.model_name = j.value("model_name", std::string());
    rec.status = status_from_string(j.at("status").get<std::string>());
    rec.compile_attempts = j.at("compile_attempts").get<int>();
    rec.prove_attempts = j.at("prove_attempts").get<int>();
    rec.final_revision = j.value("final_revision", 0);
    rec.compiled_in_prover_phase = j.value("compiled_in_prover_phase", false);
    for (const auto& e : j.value("timeline", json::array())) {
        rec.timeline.push_back({e.value("ts", 0L), e.value("phase", std::string()),
                                e.value("detail", std::string())});
    }
    return rec;
}

RunLedger::RunLedger(std::string path) : path_(std::move(path)) {
    std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void RunLedger::append(const TranslationRecord& record) {
    std::lock_guard<std::mutex> lk(mu_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to ledger: " + path_);
    out << record.to_json_line() << "\n";
    out.flush();
}

std::vector<TranslationRecord> RunLedger::read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::vector<TranslationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        records.push_back(TranslationRecord::from_json_line(line));
    }
    return records;
}

std::unordered_set<std::string> RunLedger::terminal_ids(const std::string& path) {
    std::unordered_set<std::string> ids;
    for (const auto& rec : read_all(path)) {
        if (rec.status != Status::Pending) ids.insert(rec.contract_id);
    }
    return ids;
}

Clock system_clock_ms() {
    return [] {
        return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count());
    };
}

namespace {

void push_event(TranslationRecord* record, const Clock& clock, const std::string& phase,
                const std::string& detail) {
    if (record) record->timeline.push_back({clock ? clock() : 0, phase, detail});
}

}  // namespace

CompileLoopResult compile_loop(CandidateTranslation candidate, PipelineDeps& deps,
                               const PipelineOptions& opts, TranslationRecord* record) {
    if (opts.max_attempts < 1) throw Error("compile loop needs max_attempts >= 1");
    CompileLoopResult out;
    out.candidate = std::move(candidate);
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
        out.attempts = attempt;
        out.result = deps.toolchain->compile(out.candidate);
        push_event(record, deps.clock, "compile",
                   "attempt " + std::to_string(attempt) + " revision " +
                       std::to_string(out.candidate.revision) +
                       (out.result.success ? " ok" : " failed"));
        if (out.result.success || attempt == opts.max_attempts) break;
        std::string digest = summarize_diagnostics(out.result.diagnostics, opts.diagnostic_budget);
        out.candidate = repair(*deps.generator, out.candidate, digest);
        if (deps.on_revision) deps.on_revision(out.candidate);
        push_event(record, deps.clock, "repair",
                   "revision " + std::to_string(out.candidate.revision));
    }
    return out;
}

ProveLoopResult prove_loop(CandidateTranslation candidate, PipelineDeps& deps,
                           const PipelineOptions& opts, TranslationRecord* record) {
    if (opts.max_attempts < 1) throw Error("prove loop needs max_attempts >= 1");
    ProveLoopResult out;
    out.candidate = std::move(candidate);
    out.attempts = 1;
    out.result = deps.toolchain->prove(out.candidate);
    push_event(record, deps.clock, "prove",
               std::string("attempt 1") + (out.result.verified ? " ok" : " failed"));

    while (!out.result.verified && out.attempts < opts.max_attempts) {
        std::string digest = summarize_diagnostics(out.result.diagnostics, opts.diagnostic_budget);
        CandidateTranslation repaired = repair(*deps.generator, out.candidate, digest);
        if (deps.on_revision) deps.on_revision(repaired);
        push_event(record, deps.clock, "repair",
                   "revision " + std::to_string(repaired.revision));
        CompileResult check = deps.toolchain->compile(repaired);
        ++out.attempts;
        if (check.success) {
            out.candidate = std::move(repaired);
            out.result = deps.toolchain->prove(out.candidate);
            push_event(record, deps.clock, "prove",
                       "attempt " + std::to_string(out.attempts) +
                           (out.result.verified ? " ok" : " failed"));
        } else {
            // The repair broke compilation: roll the source back but keep
            // the revision counter moving so artifacts stay unique.
            push_event(record, deps.clock, "rollback",
                       "revision " + std::to_string(repaired.revision) +
                           " does not compile; keeping revision " +
                           std::to_string(out.candidate.revision));
            out.candidate.revision = repaired.revision;
        }
    }
    return out;
}

TranslationRecord translate_contract(const SoliditySource& source, PipelineDeps& deps,
                                     const PipelineOptions& opts) {
    TranslationRecord rec;
    rec.contract_id = std::filesystem::path(source.path).stem().string();
    rec.model_name = deps.model_label;
    const Clock clock = deps.clock ? deps.clock : system_clock_ms();
    const long start_ms = clock();

    if (deps.toolchain) {
        deps.toolchain->set_observer([&rec, &clock](const ToolInvocation& inv) {
            rec.timeline.push_back({clock(), "tool",
                                    inv.command + " exit=" + std::to_string(inv.exit_code) +
                                        " dur=" + std::to_string(inv.duration_ms) + "ms"});
        });
    }

    CandidateTranslation candidate;
    try {
        ContractSummary summary = extract_keywords(source, opts.max_keywords,
                                                   deps.stopwords ? *deps.stopwords
                                                                  : builtin_stopwords());
        TaskPrompt prompt = build_task_prompt(summary, deps.task_template, opts.prompt_budget);
        push_event(&rec, clock, "task_created",
                   "topic: " + summary.topic + "; keywords: " +
                       std::to_string(summary.keywords.size()));

        auto candidates = retrieve_concepts(prompt, *deps.sparse, *deps.store, deps.dense,
                                            opts.retrieval_k);
        auto selected = select_concepts(candidates);
        push_event(&rec, clock, "concepts",
                   std::to_string(candidates.size()) + " retrieved, " +
                       std::to_string(selected.size()) + " with snippets");

        std::vector<std::string> warnings;
        auto plan = generate_subtasks(*deps.planner, prompt, selected, deps.planner_template,
                                      &warnings);
        for (const auto& w : warnings) push_event(&rec, clock, "warning", w);
        push_event(&rec, clock, "plan", std::to_string(plan.size()) + " sub-tasks");

        if (clock() - start_ms > opts.contract_budget_ms) {
            throw Error("contract wall-clock budget exceeded before generation");
        }

        std::vector<CodeChunk> chunks;
        for (const auto& task : plan) {
            chunks.push_back(generate_chunk(*deps.generator, task, deps.exemplars));
        }
        candidate = assemble(std::move(chunks));
        if (deps.on_revision) deps.on_revision(candidate);
        push_event(&rec, clock, "assemble",
                   std::to_string(candidate.chunks.size()) + " chunks, revision 0");
    } catch (const Error& e) {
        rec.status = Status::FailedPlanning;
        push_event(&rec, clock, "failed", e.what());
        if (deps.toolchain) deps.toolchain->set_observer(nullptr);
        return rec;
    }

    try {
        CompileLoopResult compiled = compile_loop(std::move(candidate), deps, opts, &rec);
        rec.compile_attempts = compiled.attempts;
        rec.final_revision = compiled.candidate.revision;

        if (!compiled.result.success) {
            rec.status = Status::FailedCompilation;
            push_event(&rec, clock, "status", status_to_string(rec.status));
            if (deps.toolchain) deps.toolchain->set_observer(nullptr);
            return rec;
        }

        rec.status = compiled.attempts == 1 ? Status::CompiledFirstTry
                                            : Status::CompiledAfterCompilerFeedback;

        bool budget_left = clock() - start_ms <= opts.contract_budget_ms;
        if (!budget_left)
            push_event(&rec, clock, "warning", "contract budget exhausted; prover skipped");

        if (opts.prover_enabled && budget_left) {
            ProveLoopResult proved = prove_loop(std::move(compiled.candidate), deps, opts, &rec);
            rec.prove_attempts = proved.attempts;
            rec.final_revision = proved.candidate.revision;
            rec.status = proved.result.verified ? Status::VerifiedSafe
                                                : Status::CompilableUnverified;
        }
    } catch (const Error& e) {
        // A repair-side LLM failure mid-loop; the contract never reached a
        // terminal toolchain verdict.
        rec.status = Status::FailedPlanning;
        push_event(&rec, clock, "failed", e.what());
    }

    push_event(&rec, clock, "status", status_to_string(rec.status));
    if (deps.toolchain) deps.toolchain->set_observer(nullptr);
    return rec;
}

}  // namespace solmover
