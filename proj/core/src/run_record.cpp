#include "mmsvc/run_record.hpp"

#include <algorithm>
#include <cmath>

namespace mmsvc {

namespace {

// Mean |e_i| over rows [first, last).
std::vector<double> window_mean(const std::vector<RunRow>& rows, std::size_t first, std::size_t last, Index m) {
    std::vector<double> out(static_cast<std::size_t>(m), 0.0);
    if (last <= first) return out;
    for (std::size_t r = first; r < last; ++r) {
        for (Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] += std::abs(rows[r].error(i));
    }
    for (auto& x : out) x /= static_cast<double>(last - first);
    return out;
}

bool within(const RunRow& row, double band) {
    return (row.error.array().abs() < band).all();
}

// First index in [from, to) from which every row up to `to` stays within band.
std::optional<std::size_t> settle_index(const std::vector<RunRow>& rows, std::size_t from, std::size_t to,
                                        double band) {
    if (from >= to) return std::nullopt;
    std::optional<std::size_t> idx;
    for (std::size_t r = to; r-- > from;) {
        if (!within(rows[r], band)) break;
        idx = r;
    }
    return idx;
}

} // namespace

Summary compute_summary(const std::vector<RunRow>& rows, const SummaryContext& ctx) {
    Summary s;
    const Index m = ctx.channels;
    const auto n = rows.size();
    s.rows = n;
    s.pre_svc_error.assign(static_cast<std::size_t>(m), 0.0);
    s.post_svc_error.assign(static_cast<std::size_t>(m), 0.0);
    s.terminal_error.assign(static_cast<std::size_t>(m), 0.0);
    if (n == 0) return s;

    const auto window = static_cast<std::size_t>(std::max<long>(1, std::lround(ctx.window_s / ctx.dt_secondary)));
    const auto svc = static_cast<std::size_t>(std::clamp<std::int64_t>(ctx.svc_sample, 0, static_cast<std::int64_t>(n)));
    const std::size_t post_end =
        ctx.event_sample ? static_cast<std::size_t>(std::clamp<std::int64_t>(*ctx.event_sample, 0, static_cast<std::int64_t>(n)))
                         : n;

    s.pre_svc_error = window_mean(rows, svc > window ? svc - window : 0, svc, m);
    s.post_svc_error = window_mean(rows, post_end > window ? std::max(post_end - window, svc) : svc, post_end, m);

    const RunRow& last = rows.back();
    for (Index i = 0; i < m; ++i) {
        s.terminal_error[static_cast<std::size_t>(i)] = std::abs(last.error(i));
        s.worst_terminal_error = std::max(s.worst_terminal_error, std::abs(last.error(i)));
    }

    if (auto r = settle_index(rows, svc, post_end, ctx.settle_band_V)) {
        s.svc_settle_time = static_cast<double>(static_cast<std::int64_t>(*r) - ctx.svc_sample) * ctx.dt_secondary;
    }
    if (ctx.event_sample && *ctx.event_sample < static_cast<std::int64_t>(n)) {
        const double band = ctx.recovery_band * std::abs(ctx.v_ref);
        if (auto r = settle_index(rows, static_cast<std::size_t>(*ctx.event_sample), n, band)) {
            s.recovery_time =
                static_cast<double>(static_cast<std::int64_t>(*r) - *ctx.event_sample) * ctx.dt_secondary;
        }
    }

    long lin = 0, nl = 0, other = 0;
    int prev = -1;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = rows[r];
        s.max_v_norm = std::max(s.max_v_norm, row.v.norm());
        s.max_e_star_norm = std::max(s.max_e_star_norm, row.e_star.norm());
        if (row.active == 0 || row.active == 1) {
            if (prev >= 0 && row.active != prev) ++s.switches;
            prev = row.active;
        }
        if (r >= svc) {
            if (row.active == 0) ++lin;
            else if (row.active == 1) ++nl;
            else ++other;
        }
    }
    const long on = lin + nl + other;
    if (on > 0) {
        s.dwell_linear = static_cast<double>(lin) / on;
        s.dwell_nonlinear = static_cast<double>(nl) / on;
        s.dwell_other = static_cast<double>(other) / on;
    }
    return s;
}

} // namespace mmsvc
