#include "mmsvc/outputs.hpp"

#include "mmsvc/config.hpp"
#include "mmsvc/error.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace mmsvc {

using nlohmann::json;

namespace {

void put(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

void put_vec(std::string& out, const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) {
        out += ',';
        put(out, v(i));
    }
}

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::string join(const std::vector<std::string>& cols) {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) s += ',';
        s += cols[i];
    }
    return s + '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double number(const std::string& s, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        fail(ErrorCategory::io, "timeseries line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return x;
}

std::string figure_csv(const RunRecord& rec, const std::vector<std::string>& header,
                       const std::function<void(std::string&, const RunRow&)>& fill) {
    std::string out = join(header);
    for (const auto& row : rec.rows) {
        put(out, row.t);
        fill(out, row);
        out += '\n';
    }
    return out;
}

std::vector<std::string> numbered(const std::string& prefix, Index m) {
    std::vector<std::string> out;
    for (Index i = 1; i <= m; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

std::vector<std::string> timeseries_header(Index m) {
    std::vector<std::string> h{"t"};
    for (const auto& group : {numbered("v_o", m), numbered("e", m)}) h.insert(h.end(), group.begin(), group.end());
    for (const char* c : {"eL_norm", "eN_norm", "xi_L", "xi_N", "active"}) h.emplace_back(c);
    for (const auto& group : {numbered("P", m), numbered("Q", m), numbered("Estar", m)}) {
        h.insert(h.end(), group.begin(), group.end());
    }
    return h;
}

std::string timeseries_csv(const RunRecord& rec) {
    std::string out = join(timeseries_header(rec.context.channels));
    out.reserve(out.size() + rec.rows.size() * 400);
    for (const auto& row : rec.rows) {
        put(out, row.t);
        put_vec(out, row.v);
        put_vec(out, row.error);
        for (double x : {row.e_linear_norm, row.e_nonlinear_norm, row.xi_linear, row.xi_nonlinear}) {
            out += ',';
            put(out, x);
        }
        out += ',';
        out += std::to_string(row.active);
        put_vec(out, row.p);
        put_vec(out, row.q);
        put_vec(out, row.e_star);
        out += '\n';
    }
    return out;
}

std::vector<RunRow> parse_timeseries_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCategory::io, "timeseries is empty");
    const auto header = split(line);
    // 6 fixed columns plus 5 per channel
    if (header.size() < 11 || (header.size() - 6) % 5 != 0) fail(ErrorCategory::io, "unexpected timeseries header");
    const auto m = static_cast<Index>((header.size() - 6) / 5);
    if (header != timeseries_header(m)) fail(ErrorCategory::io, "unexpected timeseries header");

    std::vector<RunRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) {
            fail(ErrorCategory::io, "timeseries line " + std::to_string(lineno) + " has the wrong column count");
        }
        std::size_t c = 0;
        auto next = [&] { return number(f[c++], lineno); };
        auto vec = [&] {
            Vector v(m);
            for (Index i = 0; i < m; ++i) v(i) = next();
            return v;
        };
        RunRow row;
        row.k = static_cast<std::int64_t>(rows.size());
        row.t = next();
        row.v = vec();
        row.error = vec();
        row.e_linear_norm = next();
        row.e_nonlinear_norm = next();
        row.xi_linear = next();
        row.xi_nonlinear = next();
        row.active = static_cast<int>(next());
        row.p = vec();
        row.q = vec();
        row.e_star = vec();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string summary_json(const RunRecord& rec) {
    const auto& s = rec.summary;
    const auto& c = rec.context;
    const auto& inv = rec.invariants;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["plant"] = rec.plant;
    j["controller"] = rec.controller;
    j["rho"] = rec.rho;
    j["rho_calibrated"] = rec.rho_calibrated;
    j["bibo_limit"] = rec.bibo_limit;
    j["context"] = {{"channels", c.channels},
                    {"dt_secondary_s", c.dt_secondary},
                    {"V_ref_V", c.v_ref},
                    {"svc_sample", c.svc_sample},
                    {"event_sample", c.event_sample ? json(*c.event_sample) : json(nullptr)},
                    {"window_s", c.window_s},
                    {"settle_band_V", c.settle_band_V},
                    {"recovery_band", c.recovery_band}};
    j["metrics"] = {{"rows", s.rows},
                    {"pre_svc_error_V", s.pre_svc_error},
                    {"post_svc_error_V", s.post_svc_error},
                    {"terminal_error_V", s.terminal_error},
                    {"worst_terminal_error_V", s.worst_terminal_error},
                    {"svc_settle_time_s", opt(s.svc_settle_time)},
                    {"recovery_time_s", opt(s.recovery_time)},
                    {"max_v_norm_V", s.max_v_norm},
                    {"max_e_star_norm_V", s.max_e_star_norm},
                    {"switches", s.switches},
                    {"dwell_linear", s.dwell_linear},
                    {"dwell_nonlinear", s.dwell_nonlinear},
                    {"dwell_other", s.dwell_other}};
    j["invariants"] = {{"freeze_checks", inv.freeze_checks},
                       {"freeze_violations", inv.freeze_violations},
                       {"floor_checks", inv.floor_checks},
                       {"floor_violations", inv.floor_violations},
                       {"min_sigma", std::isfinite(inv.min_sigma) ? json(inv.min_sigma) : json(nullptr)},
                       {"identity_checked", inv.identity_checked},
                       {"identity_passed", inv.identity_passed},
                       {"identity_max_residual", inv.identity_max_residual},
                       {"identity_switch_exempt", inv.identity_switch_exempt},
                       {"identity_clamp_exempt", inv.identity_clamp_exempt},
                       {"network_skips", inv.network_skips}};
    return j.dump(2) + "\n";
}

StoredSummary parse_summary_json(const std::string& text) {
    StoredSummary out;
    try {
        const json j = json::parse(text);
        const auto& c = j.at("context");
        out.context.channels = c.at("channels").get<Index>();
        out.context.dt_secondary = c.at("dt_secondary_s").get<double>();
        out.context.v_ref = c.at("V_ref_V").get<double>();
        out.context.svc_sample = c.at("svc_sample").get<std::int64_t>();
        if (!c.at("event_sample").is_null()) out.context.event_sample = c.at("event_sample").get<std::int64_t>();
        out.context.window_s = c.at("window_s").get<double>();
        out.context.settle_band_V = c.at("settle_band_V").get<double>();
        out.context.recovery_band = c.at("recovery_band").get<double>();
        const auto& m = j.at("metrics");
        auto& s = out.summary;
        s.rows = m.at("rows").get<std::size_t>();
        s.pre_svc_error = m.at("pre_svc_error_V").get<std::vector<double>>();
        s.post_svc_error = m.at("post_svc_error_V").get<std::vector<double>>();
        s.terminal_error = m.at("terminal_error_V").get<std::vector<double>>();
        s.worst_terminal_error = m.at("worst_terminal_error_V").get<double>();
        s.svc_settle_time = opt_from(m.at("svc_settle_time_s"));
        s.recovery_time = opt_from(m.at("recovery_time_s"));
        s.max_v_norm = m.at("max_v_norm_V").get<double>();
        s.max_e_star_norm = m.at("max_e_star_norm_V").get<double>();
        s.switches = m.at("switches").get<long>();
        s.dwell_linear = m.at("dwell_linear").get<double>();
        s.dwell_nonlinear = m.at("dwell_nonlinear").get<double>();
        s.dwell_other = m.at("dwell_other").get<double>();
    } catch (const json::exception& e) {
        fail(ErrorCategory::io, std::string("malformed summary: ") + e.what());
    }
    return out;
}

bool same_summary(const Summary& a, const Summary& b) {
    return a.rows == b.rows && a.pre_svc_error == b.pre_svc_error && a.post_svc_error == b.post_svc_error &&
           a.terminal_error == b.terminal_error && a.worst_terminal_error == b.worst_terminal_error &&
           a.svc_settle_time == b.svc_settle_time && a.recovery_time == b.recovery_time &&
           a.max_v_norm == b.max_v_norm && a.max_e_star_norm == b.max_e_star_norm && a.switches == b.switches &&
           a.dwell_linear == b.dwell_linear && a.dwell_nonlinear == b.dwell_nonlinear &&
           a.dwell_other == b.dwell_other;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCategory::io, "cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) fail(ErrorCategory::io, "write failed for '" + path.string() + "'");
}

std::vector<std::filesystem::path> emit_outputs(const RunRecord& rec, const std::filesystem::path& dir,
                                                bool figures) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::io, "cannot create '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(dir / name);
    };
    emit("timeseries.csv", timeseries_csv(rec));
    emit("summary.json", summary_json(rec));
    emit("config.resolved.json", rec.config_json + "\n");
    if (!figures) return written;

    const Index m = rec.context.channels;
    auto header = [&](std::vector<std::string> groups) {
        std::vector<std::string> h{"t"};
        for (const auto& g : groups) {
            const auto cols = numbered(g, m);
            h.insert(h.end(), cols.begin(), cols.end());
        }
        return h;
    };
    {
        auto h = header({"v_o"});
        h.emplace_back("V_ref");
        emit("fig4_voltages.csv", figure_csv(rec, h, [&](std::string& out, const RunRow& r) {
                 put_vec(out, r.v);
                 out += ',';
                 put(out, rec.context.v_ref);
             }));
    }
    emit("fig5_powers.csv", figure_csv(rec, header({"P", "Q"}), [](std::string& out, const RunRow& r) {
             put_vec(out, r.p);
             put_vec(out, r.q);
         }));
    emit("fig6_switching.csv",
         figure_csv(rec, {"t", "eL_norm", "eN_norm", "xi_L", "xi_N", "active"}, [](std::string& out, const RunRow& r) {
             for (double x : {r.e_linear_norm, r.e_nonlinear_norm, r.xi_linear, r.xi_nonlinear}) {
                 out += ',';
                 put(out, x);
             }
             out += ',' + std::to_string(r.active);
         }));
    return written;
}

} // namespace mmsvc
