#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "posthoc/experiment.hpp"

namespace posthoc {

// Writes records.csv, rank_report.csv, rank_change.csv,
// normalized_improvement.csv, ensemble_sizes.csv, cd_plot.svg and
// run_manifest.json. Every byte except the wall_time_ms column of
// records.csv is a pure function of (data, config).
void emit_report(const RunResult& result, const RunConfig& config,
                 const std::filesystem::path& output_dir);

// Reads a records.csv written by emit_report.
std::vector<MethodRunRecord> read_records(const std::filesystem::path& records_csv);

// Rebuilds grouped score tables from records (for `report --from`). Methods
// and metrics are taken in canonical order, filtered to what is present.
RunResult result_from_records(std::vector<MethodRunRecord> records);

} // namespace posthoc
