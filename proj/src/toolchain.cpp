#include "solmover/toolchain.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

#include "solmover/errors.hpp"
#include "solmover/subprocess.hpp"
#include "solmover/text.hpp"

namespace solmover {

namespace fs = std::filesystem;

namespace {

// "error[E01002]: message" / "warning: message" headers.
std::optional<std::pair<Severity, std::string>> parse_header(std::string_view line) {
    std::string_view t = trim(line);
    Severity sev;
    if (starts_with(t, "error")) {
        sev = Severity::Error;
        t.remove_prefix(5);
    } else if (starts_with(t, "warning")) {
        sev = Severity::Warning;
        t.remove_prefix(7);
    } else {
        return std::nullopt;
    }
    if (!t.empty() && t.front() == '[') {
        size_t close = t.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        t.remove_prefix(close + 1);
    }
    if (t.empty() || t.front() != ':') return std::nullopt;
    t.remove_prefix(1);
    return std::make_pair(sev, std::string(trim(t)));
}

// "--> sources/m.move:4:9" or "┌─ sources/m.move:4:9" locators.
bool parse_locator(std::string_view line, std::string& file, int& lineno) {
    std::string_view t = trim(line);
    if (auto pos = t.find("--> "); pos != std::string_view::npos) {
        t.remove_prefix(pos + 4);
    } else if (auto box = t.find("┌─ "); box != std::string_view::npos) {
        t.remove_prefix(box + std::string_view("┌─ ").size());
    } else {
        return false;
    }
    t = trim(t);
    size_t colon = t.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    file = std::string(t.substr(0, colon));
    t.remove_prefix(colon + 1);
    int value = 0;
    size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
        value = value * 10 + (t[i] - '0');
        ++i;
    }
    if (i == 0) return false;
    lineno = value;
    return true;
}

}  // namespace

std::vector<Diagnostic> parse_diagnostics(const std::string& output) {
    std::vector<Diagnostic> diagnostics;
    Diagnostic* current = nullptr;
    for (const auto& line : split_lines(output)) {
        if (auto header = parse_header(line)) {
            Diagnostic d;
            d.severity = header->first;
            d.message = header->second;
            d.raw = line;
            diagnostics.push_back(std::move(d));
            current = &diagnostics.back();
            continue;
        }
        if (current) {
            std::string file;
            int lineno = 0;
            if (parse_locator(line, file, lineno)) {
                if (!current->file) {
                    current->file = file;
                    current->line = lineno;
                }
            }
            current->raw += "\n" + line;
            if (trim(line).empty()) current = nullptr;  // blank line ends the block
        }
    }
    return diagnostics;
}

std::string summarize_diagnostics(const std::vector<Diagnostic>& diagnostics, size_t budget) {
    if (diagnostics.empty()) throw Error("cannot summarize an empty diagnostic list");

    std::vector<const Diagnostic*> ordered;
    for (const auto& d : diagnostics)
        if (d.severity == Severity::Error) ordered.push_back(&d);
    for (const auto& d : diagnostics)
        if (d.severity == Severity::Warning) ordered.push_back(&d);

    std::vector<std::string> entries;
    entries.reserve(ordered.size());
    for (const auto* d : ordered) {
        std::string entry;
        if (d->file) {
            entry = *d->file;
            if (d->line) entry += ":" + std::to_string(*d->line);
            entry += ": " + d->message;
        } else {
            entry = d->message;
        }
        entries.push_back(std::move(entry));
    }

    auto assemble = [&](size_t take) {
        std::string text;
        for (size_t i = 0; i < take; ++i) {
            if (i) text += "\n";
            text += entries[i];
        }
        if (take < entries.size())
            text += "\n(+" + std::to_string(entries.size() - take) + " more)";
        return text;
    };

    for (size_t take = entries.size(); take >= 1; --take) {
        std::string text = assemble(take);
        if (text.size() <= budget) return text;
    }
    // Even the first entry alone is over budget.
    std::string text = entries.front().substr(0, budget);
    return text;
}

ProcessToolchain::ProcessToolchain(ToolchainConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.compile_cmd.empty()) throw Error("toolchain compile command not configured");
    if (cfg_.workdir_root.empty()) throw Error("toolchain workdir root not configured");
}

ProcessToolchain::Outcome ProcessToolchain::run_tool(const std::string& cmd_template,
                                                     const CandidateTranslation& candidate,
                                                     const char* phase) {
    int seq;
    {
        std::lock_guard<std::mutex> lk(mu_);
        seq = ++call_seq_;
    }
    fs::path package_dir = fs::path(cfg_.workdir_root) /
                           (std::string(phase) + "-" + std::to_string(seq));
    fs::create_directories(package_dir / "sources");
    {
        std::ofstream manifest(package_dir / "Move.toml");
        manifest << render_template(cfg_.manifest_template, {{"name", "translation"}});
    }
    fs::path source_file = package_dir / "sources" / "translation.move";
    {
        std::ofstream src(source_file);
        src << candidate.move_source << "\n";
    }

    std::string cmd = render_template(cmd_template, {{"package_dir", package_dir.string()},
                                                     {"source_file", source_file.string()}});
    RunResult run = run_command(cmd, cfg_.timeout_s, package_dir.string());
    record({cmd, run.exit_code, run.duration_ms});

    if (!run.timed_out && run.exit_code == 127) {
        throw ToolNotFound("command not found: " + cmd);
    }

    Outcome outcome;
    outcome.exit_code = run.exit_code;
    outcome.duration_ms = run.duration_ms;
    outcome.ok = !run.timed_out && run.exit_code == 0;

    if (run.timed_out) {
        Diagnostic d;
        d.severity = Severity::Error;
        d.message = std::string(phase) + " timed out after " + std::to_string(cfg_.timeout_s) + "s";
        d.raw = d.message;
        outcome.diagnostics.push_back(std::move(d));
        return outcome;
    }

    std::string combined = run.err;
    if (!run.out.empty()) combined += (combined.empty() ? "" : "\n") + run.out;
    auto parsed = parse_diagnostics(combined);
    if (outcome.ok) {
        // A zero exit never carries errors; keep warnings only.
        for (auto& d : parsed)
            if (d.severity == Severity::Warning) outcome.diagnostics.push_back(std::move(d));
    } else {
        bool has_error = false;
        for (auto& d : parsed) {
            if (d.severity == Severity::Error) has_error = true;
            outcome.diagnostics.push_back(std::move(d));
        }
        if (!has_error) {
            Diagnostic d;
            d.severity = Severity::Error;
            d.raw = combined.empty() ? ("exit code " + std::to_string(run.exit_code)) : combined;
            d.message = d.raw.substr(0, 2000);
            outcome.diagnostics.push_back(std::move(d));
        }
    }
    return outcome;
}

CompileResult ProcessToolchain::compile(const CandidateTranslation& candidate) {
    Outcome o = run_tool(cfg_.compile_cmd, candidate, "compile");
    return {o.ok, std::move(o.diagnostics), o.exit_code, o.duration_ms};
}

ProveResult ProcessToolchain::prove(const CandidateTranslation& candidate) {
    if (cfg_.prove_cmd.empty()) throw Error("toolchain prove command not configured");
    Outcome o = run_tool(cfg_.prove_cmd, candidate, "prove");
    return {o.ok, std::move(o.diagnostics), o.exit_code, o.duration_ms};
}

ScriptedToolchain::ScriptedToolchain(std::vector<MockStep> compile_plan,
                                     std::vector<MockStep> prove_plan)
    : compile_plan_(std::move(compile_plan)), prove_plan_(std::move(prove_plan)) {}

MockStep ScriptedToolchain::take(std::vector<MockStep>& plan, size_t& next, const char* phase) {
    std::lock_guard<std::mutex> lk(mu_);
    if (next >= plan.size()) {
        throw ScriptExhausted(std::string(phase) + " mock called more times than scripted (" +
                              std::to_string(plan.size()) + ")");
    }
    return plan[next++];
}

CompileResult ScriptedToolchain::compile(const CandidateTranslation&) {
    MockStep step = take(compile_plan_, compile_next_, "compile");
    CompileResult result;
    result.exit_code = step.pass ? 0 : 1;
    result.success = result.exit_code == 0;
    result.duration_ms = 0;
    if (!step.pass) {
        result.diagnostics = parse_diagnostics(step.stderr_text);
        if (result.diagnostics.empty()) {
            Diagnostic d;
            d.severity = Severity::Error;
            d.raw = step.stderr_text.empty() ? "scripted failure" : step.stderr_text;
            d.message = d.raw;
            result.diagnostics.push_back(std::move(d));
        }
    }
    record({"mock-compile", result.exit_code, 0});
    return result;
}

ProveResult ScriptedToolchain::prove(const CandidateTranslation&) {
    MockStep step = take(prove_plan_, prove_next_, "prove");
    ProveResult result;
    result.exit_code = step.pass ? 0 : 1;
    result.verified = result.exit_code == 0;
    result.duration_ms = 0;
    if (!step.pass) {
        result.diagnostics = parse_diagnostics(step.stderr_text);
        if (result.diagnostics.empty()) {
            Diagnostic d;
            d.severity = Severity::Error;
            d.raw = step.stderr_text.empty() ? "scripted verification failure" : step.stderr_text;
            d.message = d.raw;
            result.diagnostics.push_back(std::move(d));
        }
    }
    record({"mock-prove", result.exit_code, 0});
    return result;
}

}  // namespace solmover
