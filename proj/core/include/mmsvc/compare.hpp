#pragma once

// Side-by-side runs (compare) and parameter grids (sweep). Each scenario runs
// on its own worker; results are gathered after all workers finish.

#include "mmsvc/config.hpp"
#include "mmsvc/error.hpp"
#include "mmsvc/run_record.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmsvc {

struct RunFailure {
    ErrorCategory category = ErrorCategory::invalid_argument;
    std::string message;
    std::optional<std::int64_t> sample;
};

struct RunOutcome {
    std::string label;
    std::optional<RunRecord> record;
    std::optional<RunFailure> failure;
    std::string verdict;  ///< diverged | recovered | tracking | degraded
};

/// Runs cfg, capturing any library error instead of throwing.
[[nodiscard]] RunOutcome run_captured(const ScenarioConfig& cfg, std::string label);

/// diverged: the run failed or its worst terminal error exceeds 5% of |V_ref|;
/// recovered: back within 1% after the load event; tracking: within 1% at the
/// end of a run without an event; otherwise degraded.
[[nodiscard]] std::string verdict_for(const RunOutcome& outcome, double v_ref);

struct Comparison {
    RunOutcome a;
    RunOutcome b;
    std::vector<std::pair<std::string, double>> deltas;  ///< metric, b - a (both runs completed)
};

/// Rejects configs whose timing grids or plant kinds differ.
[[nodiscard]] Comparison compare_runs(const ScenarioConfig& a, const ScenarioConfig& b);

/// comparison.json, fig7_voltages.csv, fig8_powers.csv, and each run's
/// outputs under a/ and b/.
std::vector<std::filesystem::path> emit_comparison(const Comparison& cmp, const std::filesystem::path& dir,
                                                   bool figures = true);

struct SweepAxis {
    std::string path;                 ///< dotted config key
    std::vector<std::string> values;  ///< JSON value texts
};

/// "a.b=[1,2,3]" or "a.b=1,2,3".
[[nodiscard]] SweepAxis parse_sweep_axis(const std::string& spec);

struct SweepPoint {
    std::vector<std::pair<std::string, std::string>> assignment;
    RunOutcome outcome;
};

/// Cartesian product of the axes; a point whose config is invalid is reported
/// as a failed point rather than aborting the sweep.
[[nodiscard]] std::vector<SweepPoint> run_sweep(const std::string& config_text,
                                                const std::optional<std::string>& profile,
                                                const std::vector<std::pair<std::string, std::string>>& base,
                                                const std::vector<SweepAxis>& axes, unsigned workers = 0);

std::vector<std::filesystem::path> emit_sweep(const std::vector<SweepPoint>& points,
                                              const std::filesystem::path& dir, bool figures = false);

} // namespace mmsvc
