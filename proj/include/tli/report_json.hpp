#pragma once

#include <string>
#include <vector>

#include "tli/matching.hpp"
#include "tli/segmentation.hpp"
#include "tli/transfer.hpp"

namespace tli {

/// `report.json` for a scoring run: candidates with component breakdowns, tli_score, unmatched.
std::string match_report_json(const MatchReport& report);
/// Match report plus the per-parameter transfer decisions.
std::string transfer_report_json(const TransferReport& report);
/// Debug dump of submodules and execution paths.
std::string inspect_json(const GraphDoc& g, const std::vector<Submodule>& subs, const std::vector<ExecutionPath>& paths);

}  // namespace tli
