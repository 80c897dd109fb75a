#include "mmsvc/compare.hpp"

#include "mmsvc/error.hpp"
#include "mmsvc/outputs.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

namespace mmsvc {

using nlohmann::json;

SweepAxis parse_sweep_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        fail(ErrorCategory::config, "sweep parameter must look like path=[v1,v2,...], got '" + spec + "'");
    }
    SweepAxis axis;
    axis.path = spec.substr(0, eq);
    const std::string list = spec.substr(eq + 1);
    json parsed;
    bool is_json = true;
    try {
        parsed = json::parse(list);
    } catch (const json::parse_error&) {
        is_json = false;
    }
    if (is_json && parsed.is_array()) {
        for (const auto& v : parsed) axis.values.push_back(v.dump());
    } else {
        // plain comma list; each item is JSON if it parses, else a string
        std::size_t start = 0;
        while (start <= list.size()) {
            const auto comma = list.find(',', start);
            const std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (item.empty()) fail(ErrorCategory::config, "empty value in sweep list '" + list + "'");
            axis.values.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (axis.values.empty()) fail(ErrorCategory::config, "sweep list for '" + axis.path + "' is empty");
    return axis;
}

std::vector<SweepPoint> run_sweep(const std::string& config_text, const std::optional<std::string>& profile,
                                  const std::vector<std::pair<std::string, std::string>>& base,
                                  const std::vector<SweepAxis>& axes, unsigned workers) {
    std::vector<std::vector<std::pair<std::string, std::string>>> grid{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& partial : grid) {
            for (const auto& v : axis.values) {
                auto a = partial;
                a.emplace_back(axis.path, v);
                next.push_back(std::move(a));
            }
        }
        grid = std::move(next);
    }

    std::vector<SweepPoint> points(grid.size());
    std::atomic<std::size_t> next_index{0};
    auto worker = [&] {
        for (std::size_t i = next_index++; i < grid.size(); i = next_index++) {
            SweepPoint& pt = points[i];
            pt.assignment = grid[i];
            std::string label = "p" + std::to_string(i);
            auto overrides = base;
            overrides.insert(overrides.end(), grid[i].begin(), grid[i].end());
            try {
                const ScenarioConfig cfg = parse_config(config_text, profile, overrides);
                pt.outcome = run_captured(cfg, label);
            } catch (const Error& e) {
                pt.outcome.label = label;
                pt.outcome.failure = RunFailure{e.category(), e.what(), e.sample()};
                pt.outcome.verdict = "invalid";
            }
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return points;
}

std::vector<std::filesystem::path> emit_sweep(const std::vector<SweepPoint>& points,
                                              const std::filesystem::path& dir, bool figures) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::io, "cannot create '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    json index = json::array();
    for (const auto& pt : points) {
        json j;
        j["label"] = pt.outcome.label;
        json a = json::object();
        for (const auto& [k, v] : pt.assignment) {
            try {
                a[k] = json::parse(v);
            } catch (const json::parse_error&) {
                a[k] = v;
            }
        }
        j["assignment"] = a;
        j["verdict"] = pt.outcome.verdict;
        if (pt.outcome.failure) {
            j["error"] = {{"category", std::string(to_string(pt.outcome.failure->category))},
                          {"message", pt.outcome.failure->message},
                          {"sample", pt.outcome.failure->sample ? json(*pt.outcome.failure->sample) : json(nullptr)}};
        }
        if (pt.outcome.record) {
            const auto& s = pt.outcome.record->summary;
            j["worst_terminal_error_V"] = s.worst_terminal_error;
            j["svc_settle_time_s"] = s.svc_settle_time ? json(*s.svc_settle_time) : json(nullptr);
            j["recovery_time_s"] = s.recovery_time ? json(*s.recovery_time) : json(nullptr);
            j["switches"] = s.switches;
            auto files = emit_outputs(*pt.outcome.record, dir / pt.outcome.label, figures);
            written.insert(written.end(), files.begin(), files.end());
        }
        index.push_back(j);
    }
    write_text(dir / "sweep.json", index.dump(2) + "\n");
    written.push_back(dir / "sweep.json");
    return written;
}

} // namespace mmsvc
