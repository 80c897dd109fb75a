#include "mmsvc/compare.hpp"

#include "mmsvc/error.hpp"
#include "mmsvc/outputs.hpp"
#include "mmsvc/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <future>

namespace mmsvc {

using nlohmann::json;

RunOutcome run_captured(const ScenarioConfig& cfg, std::string label) {
    RunOutcome out;
    out.label = std::move(label);
    try {
        out.record = run_scenario(cfg);
    } catch (const Error& e) {
        out.failure = RunFailure{e.category(), e.what(), e.sample()};
    } catch (const std::exception& e) {
        out.failure = RunFailure{ErrorCategory::invalid_argument, e.what(), std::nullopt};
    }
    out.verdict = verdict_for(out, cfg.v_ref);
    return out;
}

std::string verdict_for(const RunOutcome& o, double v_ref) {
    if (o.failure || !o.record) return "diverged";
    const auto& s = o.record->summary;
    const double ref = std::abs(v_ref);
    if (s.rows > 0 && s.worst_terminal_error > 0.05 * ref) return "diverged";
    if (o.record->context.event_sample) return s.recovery_time ? "recovered" : "degraded";
    return s.rows > 0 && s.worst_terminal_error < 0.01 * ref ? "tracking" : "degraded";
}

namespace {

bool same_grid(const TimingConfig& a, const TimingConfig& b) {
    return a.t_end == b.t_end && a.dt_secondary == b.dt_secondary && a.dt_primary == b.dt_primary &&
           a.t_svc_on == b.t_svc_on && a.t_event == b.t_event;
}

void add_delta(std::vector<std::pair<std::string, double>>& out, const std::string& name, double a, double b) {
    out.emplace_back(name, b - a);
}

json outcome_json(const RunOutcome& o) {
    json j;
    j["label"] = o.label;
    j["verdict"] = o.verdict;
    if (o.failure) {
        j["error"] = {{"category", std::string(to_string(o.failure->category))},
                      {"message", o.failure->message},
                      {"sample", o.failure->sample ? json(*o.failure->sample) : json(nullptr)}};
    }
    if (o.record) {
        const auto& s = o.record->summary;
        j["controller"] = o.record->controller;
        j["worst_terminal_error_V"] = s.worst_terminal_error;
        j["terminal_error_V"] = s.terminal_error;
        j["post_svc_error_V"] = s.post_svc_error;
        j["svc_settle_time_s"] = s.svc_settle_time ? json(*s.svc_settle_time) : json(nullptr);
        j["recovery_time_s"] = s.recovery_time ? json(*s.recovery_time) : json(nullptr);
        j["max_v_norm_V"] = s.max_v_norm;
        j["max_e_star_norm_V"] = s.max_e_star_norm;
        j["switches"] = s.switches;
    }
    return j;
}

void put(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out += buf;
}

} // namespace

Comparison compare_runs(const ScenarioConfig& a, const ScenarioConfig& b) {
    if (!same_grid(a.timing, b.timing)) {
        fail(ErrorCategory::config, "compare: the two configs use different timing grids");
    }
    if (a.plant != b.plant || a.channels() != b.channels()) {
        fail(ErrorCategory::config, "compare: the two configs use different plants");
    }
    a.validate();
    b.validate();
    Comparison cmp;
    auto fa = std::async(std::launch::async, [&] { return run_captured(a, "a"); });
    cmp.b = run_captured(b, "b");
    cmp.a = fa.get();
    if (cmp.a.record && cmp.b.record) {
        const auto& sa = cmp.a.record->summary;
        const auto& sb = cmp.b.record->summary;
        add_delta(cmp.deltas, "worst_terminal_error_V", sa.worst_terminal_error, sb.worst_terminal_error);
        add_delta(cmp.deltas, "max_v_norm_V", sa.max_v_norm, sb.max_v_norm);
        add_delta(cmp.deltas, "max_e_star_norm_V", sa.max_e_star_norm, sb.max_e_star_norm);
        add_delta(cmp.deltas, "switches", static_cast<double>(sa.switches), static_cast<double>(sb.switches));
        for (std::size_t i = 0; i < sa.terminal_error.size(); ++i) {
            add_delta(cmp.deltas, "terminal_error_V[" + std::to_string(i) + "]", sa.terminal_error[i],
                      sb.terminal_error[i]);
            add_delta(cmp.deltas, "post_svc_error_V[" + std::to_string(i) + "]", sa.post_svc_error[i],
                      sb.post_svc_error[i]);
        }
        if (sa.recovery_time && sb.recovery_time) {
            add_delta(cmp.deltas, "recovery_time_s", *sa.recovery_time, *sb.recovery_time);
        }
        if (sa.svc_settle_time && sb.svc_settle_time) {
            add_delta(cmp.deltas, "svc_settle_time_s", *sa.svc_settle_time, *sb.svc_settle_time);
        }
    }
    return cmp;
}

std::vector<std::filesystem::path> emit_comparison(const Comparison& cmp, const std::filesystem::path& dir,
                                                   bool figures) {
    std::vector<std::filesystem::path> written;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::io, "cannot create '" + dir.string() + "': " + ec.message());
    for (const RunOutcome* o : {&cmp.a, &cmp.b}) {
        if (o->record) {
            auto files = emit_outputs(*o->record, dir / o->label, figures);
            written.insert(written.end(), files.begin(), files.end());
        }
    }
    json j;
    j["a"] = outcome_json(cmp.a);
    j["b"] = outcome_json(cmp.b);
    json d = json::object();
    for (const auto& [k, v] : cmp.deltas) d[k] = v;
    j["deltas_b_minus_a"] = d;
    write_text(dir / "comparison.json", j.dump(2) + "\n");
    written.push_back(dir / "comparison.json");

    if (!figures || !cmp.a.record || !cmp.b.record) return written;
    const auto& ra = cmp.a.record->rows;
    const auto& rb = cmp.b.record->rows;
    const Index m = cmp.a.record->context.channels;
    std::string v = "t", p = "t";
    for (const char* tag : {"a", "b"}) {
        for (Index i = 1; i <= m; ++i) v += std::string(",") + tag + "_v_o" + std::to_string(i);
        for (const char* q : {"P", "Q"}) {
            for (Index i = 1; i <= m; ++i) p += std::string(",") + tag + "_" + q + std::to_string(i);
        }
    }
    v += '\n';
    p += '\n';
    for (std::size_t r = 0; r < std::min(ra.size(), rb.size()); ++r) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", ra[r].t);
        v += buf;
        p += buf;
        for (const auto* row : {&ra[r], &rb[r]}) {
            for (Index i = 0; i < m; ++i) put(v, row->v(i));
            for (Index i = 0; i < m; ++i) put(p, row->p(i));
            for (Index i = 0; i < m; ++i) put(p, row->q(i));
        }
        v += '\n';
        p += '\n';
    }
    write_text(dir / "fig7_voltages.csv", v);
    write_text(dir / "fig8_powers.csv", p);
    written.push_back(dir / "fig7_voltages.csv");
    written.push_back(dir / "fig8_powers.csv");
    return written;
}

} // namespace mmsvc
