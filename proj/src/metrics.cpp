#include "solmover/metrics.hpp"

#include <sstream>

namespace solmover {

namespace {

bool reached_compiled_state(const TranslationRecord& rec) {
    switch (rec.status) {
        case Status::CompiledFirstTry:
        case Status::CompiledAfterCompilerFeedback:
        case Status::VerifiedSafe:
        case Status::CompilableUnverified:
            return true;
        default:
            return false;
    }
}

}  // namespace

MetricsReport aggregate_metrics(const std::vector<TranslationRecord>& records,
                                const std::string& label) {
    MetricsReport report;
    report.label = label;
    report.total_tasks = records.size();
    for (const auto& rec : records) {
        if (!reached_compiled_state(rec)) continue;
        if (rec.compiled_in_prover_phase) {
            // Rescued only during prover-phase repairs: last column only.
            ++report.sc_after_prover_feedback;
            continue;
        }
        ++report.sc_after_error_feedback;
        ++report.sc_after_prover_feedback;
        if (rec.compile_attempts == 1) ++report.sc_initial;
    }
    report.ic_initial = report.total_tasks - report.sc_initial;
    report.ic_after_feedback = report.total_tasks - report.sc_after_error_feedback;
    return report;
}

namespace {

const char* kColumns[] = {"LLM",
                          "Total Translation Task",
                          "Successful Compilation(SC)",
                          "SC After Error Feedback",
                          "SC after Move Prover Feedback",
                          "Incomplete Translation (IC)",
                          "IC After Error Feedback"};

std::vector<std::string> row_of(const MetricsReport& r) {
    return {r.label,
            std::to_string(r.total_tasks),
            std::to_string(r.sc_initial),
            std::to_string(r.sc_after_error_feedback),
            std::to_string(r.sc_after_prover_feedback),
            std::to_string(r.ic_initial),
            std::to_string(r.ic_after_feedback)};
}

}  // namespace

std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        for (size_t i = 0; i < std::size(kColumns); ++i) {
            if (i) out << ",";
            out << kColumns[i];
        }
        out << "\n";
        for (const auto& report : reports) {
            auto row = row_of(report);
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) out << ",";
                out << row[i];
            }
            out << "\n";
        }
        return out.str();
    }
    out << "|";
    for (const char* col : kColumns) out << " " << col << " |";
    out << "\n|";
    for (size_t i = 0; i < std::size(kColumns); ++i) out << " --- |";
    out << "\n";
    for (const auto& report : reports) {
        out << "|";
        for (const auto& cell : row_of(report)) out << " " << cell << " |";
        out << "\n";
    }
    return out.str();
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
    return render_report(std::vector<MetricsReport>{report}, format);
}

}  // namespace solmover
