#pragma once

// Files written for a run:
//   timeseries.csv   one row per secondary sample, fixed header
//   summary.json     metrics, timing context, invariant counters
//   fig4_voltages.csv, fig5_powers.csv, fig6_switching.csv  plot-ready panels

#include "mmsvc/run_record.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mmsvc {

[[nodiscard]] std::vector<std::string> timeseries_header(Index channels);

[[nodiscard]] std::string timeseries_csv(const RunRecord& rec);
[[nodiscard]] std::string summary_json(const RunRecord& rec);

/// Writes all outputs into dir (created if missing); returns the paths.
std::vector<std::filesystem::path> emit_outputs(const RunRecord& rec, const std::filesystem::path& dir,
                                                bool figures = true);

/// Inverse of timeseries_csv. Throws io on malformed input.
[[nodiscard]] std::vector<RunRow> parse_timeseries_csv(const std::string& text);

struct StoredSummary {
    SummaryContext context;
    Summary summary;
};

/// Reads back the context and metrics of summary_json.
[[nodiscard]] StoredSummary parse_summary_json(const std::string& text);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Exact field-by-field equality (NaN-free fields only).
[[nodiscard]] bool same_summary(const Summary& a, const Summary& b);

} // namespace mmsvc
