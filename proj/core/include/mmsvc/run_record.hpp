#pragma once

// Per-sample rows of a scenario run and the summary metrics derived from them.
// Every metric is a function of the rows plus the timing context, so a parsed
// time-series file reproduces the summary exactly.

#include "mmsvc/svc_loop.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mmsvc {

struct RunRow {
    std::int64_t k = 0;
    double t = 0.0;
    Vector v;            ///< measured V_o(k)
    Vector error;        ///< V_o(k) - V_ref
    double e_linear_norm = std::numeric_limits<double>::quiet_NaN();
    double e_nonlinear_norm = std::numeric_limits<double>::quiet_NaN();
    double xi_linear = 0.0;
    double xi_nonlinear = 0.0;
    int active = -1;     ///< law that produced E*(k): 0 linear, 1 nonlinear, -1 other
    Vector p;
    Vector q;
    Vector e_star;
};

/// What compute_summary needs besides the rows.
struct SummaryContext {
    Index channels = 0;
    double dt_secondary = 5e-3;
    double v_ref = 300.0;
    std::int64_t svc_sample = 0;
    std::optional<std::int64_t> event_sample;
    double window_s = 0.1;          ///< steady-state averaging window
    double settle_band_V = 1.0;     ///< |error| band after SVC engagement
    double recovery_band = 0.01;    ///< fraction of |V_ref| after the event
};

struct Summary {
    std::size_t rows = 0;
    std::vector<double> pre_svc_error;   ///< mean |e| over the window before t_svc_on
    std::vector<double> post_svc_error;  ///< same, before t_event (or the end)
    std::vector<double> terminal_error;  ///< |e| at the last row
    double worst_terminal_error = 0.0;
    std::optional<double> svc_settle_time;  ///< s after t_svc_on; empty if never settled
    std::optional<double> recovery_time;    ///< s after t_event; empty if no event or never recovered
    double max_v_norm = 0.0;
    double max_e_star_norm = 0.0;
    long switches = 0;               ///< changes of the producing law between linear and nonlinear
    double dwell_linear = 0.0;       ///< fractions of rows from t_svc_on on
    double dwell_nonlinear = 0.0;
    double dwell_other = 0.0;
};

struct RunRecord {
    std::string config_json;   ///< resolved configuration
    SummaryContext context;
    std::vector<RunRow> rows;
    Summary summary;
    InvariantStats invariants;
    double rho = 0.0;          ///< dead-zone bound actually used
    bool rho_calibrated = false;
    double bibo_limit = 0.0;
    std::string plant;
    std::string controller;
};

[[nodiscard]] Summary compute_summary(const std::vector<RunRow>& rows, const SummaryContext& ctx);

} // namespace mmsvc
