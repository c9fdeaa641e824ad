#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "solmover/config.hpp"

namespace solmover {

// CLI exit codes: 0 success, 2 config error, 3 external-tool error,
// 4 partial batch failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTool = 3;
inline constexpr int kExitPartial = 4;

int cmd_harvest(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_index(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train_retriever(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_translate(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace solmover
