#pragma once

#include <string>
#include <vector>

#include "solmover/pipeline.hpp"

namespace solmover {

struct MetricsReport {
    std::string label;  // LLM attribution for the report row
    size_t total_tasks = 0;
    size_t sc_initial = 0;
    size_t sc_after_error_feedback = 0;
    size_t sc_after_prover_feedback = 0;
    size_t ic_initial = 0;
    size_t ic_after_feedback = 0;
};

// SC(initial) counts first-attempt compiles; SC after error feedback any
// compile-loop success within the attempt bound; SC after prover
// feedback additionally counts contracts whose compile was surfaced by a
// prover-phase repair. IC columns are total minus the matching SC.
MetricsReport aggregate_metrics(const std::vector<TranslationRecord>& records,
                                const std::string& label = "all");

enum class ReportFormat { Csv, Markdown };

std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat format);
std::string render_report(const MetricsReport& report, ReportFormat format);

}  // namespace solmover
