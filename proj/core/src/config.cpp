#include "mmsvc/config.hpp"

#include "mmsvc/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mmsvc {

using nlohmann::json;

namespace {

// ---- strict section reader -------------------------------------------------

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(ErrorCategory::config, where() + " must be an object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        if (!j_.contains(key)) return false;
        seen_.insert(key);
        return true;
    }

    [[nodiscard]] const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) return;
        out = convert<T>(j_.at(key), key);
    }

    template <class T>
    void get_optional(const std::string& key, std::optional<T>& out) {
        if (!has(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        out = convert<T>(j_.at(key), key);
    }

    [[nodiscard]] Section child(const std::string& key) { return Section(raw(key), join(key)); }

    [[nodiscard]] std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail(ErrorCategory::config, "unknown key '" + join(it.key()) + "'");
        }
    }

    [[nodiscard]] std::string where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }

private:
    template <class T>
    T convert(const json& v, const std::string& key) const {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::runtime_error("expected a number");
                const double x = v.get<double>();
                if (!std::isfinite(x)) throw std::runtime_error("expected a finite number");
                return x;
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::runtime_error("expected true/false");
                return v.get<bool>();
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                        throw std::runtime_error("expected a non-negative integer");
                }
                return v.get<T>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::runtime_error("expected a string");
                return v.get<std::string>();
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!v.is_array()) throw std::runtime_error("expected an array of numbers");
                std::vector<double> out;
                for (const auto& e : v) {
                    if (!e.is_number()) throw std::runtime_error("expected an array of numbers");
                    out.push_back(e.get<double>());
                }
                return out;
            } else if constexpr (std::is_same_v<T, std::vector<int>>) {
                if (!v.is_array()) throw std::runtime_error("expected an array of integers");
                std::vector<int> out;
                for (const auto& e : v) {
                    if (!e.is_number_integer()) throw std::runtime_error("expected an array of integers");
                    out.push_back(e.get<int>());
                }
                return out;
            } else {
                static_assert(sizeof(T) == 0, "unsupported config type");
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& ex) {
            fail(ErrorCategory::config, "'" + join(key) + "': " + ex.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Matrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(ErrorCategory::config, "'" + where + "' must be a non-empty list of rows");
    const auto rows = static_cast<Index>(j.size());
    Index cols = -1;
    Matrix m;
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) fail(ErrorCategory::config, "'" + where + "' rows must be arrays");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Index>(row.size()) != cols) fail(ErrorCategory::config, "'" + where + "' is ragged");
        for (Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) fail(ErrorCategory::config, "'" + where + "' entries must be numbers");
            m(i, c) = v.get<double>();
        }
    }
    return m;
}

PolyMatrix parse_poly(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(ErrorCategory::config, "'" + where + "' must be a list of matrices");
    std::vector<Matrix> coeffs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        coeffs.push_back(parse_matrix(j[i], where + "[" + std::to_string(i) + "]"));
    }
    try {
        return PolyMatrix(std::move(coeffs));
    } catch (const Error& e) {
        fail(ErrorCategory::config, "'" + where + "': " + e.what());
    }
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(row);
    }
    return rows;
}

json poly_json(const PolyMatrix& p) {
    json out = json::array();
    for (const auto& c : p.coeffs()) out.push_back(matrix_json(c));
    return out;
}

// ---- enums -----------------------------------------------------------------

PlantKind plant_kind(const std::string& s, const std::string& where) {
    if (s == "full") return PlantKind::full;
    if (s == "surrogate") return PlantKind::surrogate;
    if (s == "linear_oracle") return PlantKind::linear_oracle;
    fail(ErrorCategory::config, "'" + where + "' must be full | surrogate | linear_oracle, got '" + s + "'");
}

ControllerKind controller_kind(const std::string& s, const std::string& where) {
    if (s == "mmac") return ControllerKind::mmac;
    if (s == "linear-only") return ControllerKind::linear_only;
    if (s == "nonlinear-only") return ControllerKind::nonlinear_only;
    if (s == "oracle") return ControllerKind::oracle;
    if (s == "feedback-linearization") return ControllerKind::feedback_linearization;
    if (s == "none") return ControllerKind::none;
    fail(ErrorCategory::config, "'" + where +
                                    "' must be mmac | linear-only | nonlinear-only | oracle | "
                                    "feedback-linearization | none, got '" + s + "'");
}

// ---- sections --------------------------------------------------------------

void parse_der(Section s, DerParams& d) {
    s.get("L_f_H", d.L_f);
    s.get("r_f_ohm", d.r_f);
    s.get("C_f_F", d.C_f);
    s.get("L_c_H", d.L_c);
    s.get("r_c_ohm", d.r_c);
    s.get("R_d_ohm", d.R_d);
    s.get("D_Q_V_per_var", d.D_Q);
    s.get("m_P_rad_per_s_per_W", d.m_P);
    s.get("K_PV", d.K_PV);
    s.get("K_IV", d.K_IV);
    s.get("K_PC", d.K_PC);
    s.get("K_IC", d.K_IC);
    s.get("omega_c_rad_per_s", d.omega_c);
    s.get("F_ff", d.F_ff);
    s.get("pll_omega_c_rad_per_s", d.pll_omega_c);
    s.get("K_P_PLL", d.K_P_PLL);
    s.get("K_I_PLL", d.K_I_PLL);
    s.finish();
}

void parse_full(Section s, MicrogridParams& p) {
    s.get("omega_n_rad_per_s", p.omega_n);
    if (s.has("der")) {
        const json& arr = s.raw("der");
        if (!arr.is_array() || arr.empty()) fail(ErrorCategory::config, "'" + s.join("der") + "' must be a non-empty list");
        const auto reference = MicrogridParams::reference_system().ders;
        std::vector<DerParams> ders;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            DerParams d = i < reference.size() ? reference[i] : DerParams{};
            parse_der(Section(arr[i], s.join("der") + "[" + std::to_string(i) + "]"), d);
            ders.push_back(d);
        }
        p.ders = std::move(ders);
    }
    s.get("buses", p.network.buses);
    s.get("der_bus", p.network.der_bus);
    if (s.has("lines")) {
        const json& arr = s.raw("lines");
        if (!arr.is_array()) fail(ErrorCategory::config, "'" + s.join("lines") + "' must be a list");
        p.network.lines.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section ls(arr[i], s.join("lines") + "[" + std::to_string(i) + "]");
            LineParams l;
            ls.get("from", l.from);
            ls.get("to", l.to);
            ls.get("R_ohm", l.R);
            ls.get("L_H", l.L);
            ls.finish();
            p.network.lines.push_back(l);
        }
    }
    if (s.has("loads")) {
        const json& arr = s.raw("loads");
        if (!arr.is_array()) fail(ErrorCategory::config, "'" + s.join("loads") + "' must be a list");
        p.network.loads.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section ls(arr[i], s.join("loads") + "[" + std::to_string(i) + "]");
            LoadParams l;
            ls.get("bus", l.bus);
            ls.get("R_ohm", l.R);
            ls.get("L_H", l.L);
            ls.finish();
            p.network.loads.push_back(l);
        }
    }
    s.finish();
}

void parse_oracle(Section s, LinearOracleConfig& o) {
    if (s.has("A")) o.A = parse_poly(s.raw("A"), s.join("A"));
    if (s.has("B")) o.B = parse_poly(s.raw("B"), s.join("B"));
    s.get("d", o.d);
    if (s.has("initial_output")) {
        std::vector<double> v;
        s.get("initial_output", v);
        o.initial_output = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    }
    if (s.has("disturbance")) {
        Section ds = s.child("disturbance");
        std::string kind = o.disturbance.kind == DisturbanceConfig::Kind::none ? "none" : "uniform_ball";
        ds.get("kind", kind);
        if (kind == "none") {
            o.disturbance.kind = DisturbanceConfig::Kind::none;
        } else if (kind == "uniform_ball") {
            o.disturbance.kind = DisturbanceConfig::Kind::uniform_ball;
        } else {
            fail(ErrorCategory::config, "'" + ds.join("kind") + "' must be none | uniform_ball");
        }
        ds.get("amplitude", o.disturbance.amplitude);
        ds.finish();
    }
    s.finish();
}

void apply_document(const json& doc, ScenarioConfig& c) {
    Section root(doc, "");
    int version = -1;
    root.get("schema_version", version);
    if (version != kSchemaVersion) {
        fail(ErrorCategory::config, "schema_version must be " + std::to_string(kSchemaVersion));
    }
    std::string ignored;
    root.get("profile", ignored);  // resolved before this point

    if (root.has("plant")) {
        Section p = root.child("plant");
        std::string kind(to_string(c.plant));
        p.get("kind", kind);
        c.plant = plant_kind(kind, p.join("kind"));
        if (p.has("full")) parse_full(p.child("full"), c.full);
        if (p.has("surrogate")) {
            Section s = p.child("surrogate");
            s.get("tau_v_s", c.surrogate_tau_v);
            s.finish();
        }
        if (p.has("linear_oracle")) parse_oracle(p.child("linear_oracle"), c.oracle);
        p.finish();
    }

    if (root.has("controller")) {
        Section s = root.child("controller");
        std::string kind(to_string(c.controller));
        s.get("kind", kind);
        c.controller = controller_kind(kind, s.join("kind"));
        std::string policy = c.update_policy == EstimatorUpdate::both ? "both" : "selected";
        s.get("estimator_update", policy);
        if (policy == "both") {
            c.update_policy = EstimatorUpdate::both;
        } else if (policy == "selected") {
            c.update_policy = EstimatorUpdate::selected;
        } else {
            fail(ErrorCategory::config, "'" + s.join("estimator_update") + "' must be both | selected");
        }
        s.get("F_coeffs", c.f_coeffs);
        s.get_optional("R_diag", c.r_diag);
        s.get("mu", c.mu);
        s.get("window_samples", c.window);
        s.get("E_min_V", c.e_min);
        s.get("E_max_V", c.e_max);
        s.get_optional("bibo_bound", c.bibo_bound);
        s.get("fl_gain_per_s", c.fl_gain);
        s.finish();
    }

    if (root.has("identify")) {
        Section s = root.child("identify");
        s.get("n", c.n);
        s.get("d", c.d);
        if (s.has("rho")) {
            const json& r = s.raw("rho");
            if (r.is_string() && r.get<std::string>() == "auto") {
                c.rho.reset();
            } else if (r.is_number() && std::isfinite(r.get<double>())) {
                c.rho = r.get<double>();
            } else {
                fail(ErrorCategory::config, "'identify.rho' must be a number or \"auto\"");
            }
        }
        s.get("h_min", c.h_min);
        s.get("theta_bound", c.theta_bound);
        s.get("initial_input_gain", c.initial_input_gain);
        if (s.has("calibration")) {
            Section cs = s.child("calibration");
            cs.get("samples", c.calibration.samples);
            cs.get("amplitude_V", c.calibration.amplitude);
            cs.finish();
        }
        if (s.has("network")) {
            Section ns = s.child("network");
            ns.get("hidden", c.network.hidden);
            ns.get("learn_rate", c.network.learn_rate);
            ns.get("w_max", c.network.w_max);
            ns.get("input_scale", c.network.input_scale);
            ns.get("init_scale", c.network.init_scale);
            ns.get("train", c.train_network);
            ns.finish();
        }
        s.finish();
    }

    if (root.has("timing")) {
        Section s = root.child("timing");
        s.get("t_end_s", c.timing.t_end);
        s.get("dt_primary_s", c.timing.dt_primary);
        s.get("dt_secondary_s", c.timing.dt_secondary);
        s.get("t_svc_on_s", c.timing.t_svc_on);
        s.get("t_event_s", c.timing.t_event);
        s.finish();
    }

    if (root.has("event")) {
        Section s = root.child("event");
        s.get("enabled", c.event.enabled);
        s.get("load_index", c.event.load_index);
        s.get("factor", c.event.factor);
        s.finish();
    }

    root.get("V_ref_V", c.v_ref);
    root.get("E_nominal_V", c.e_nominal);
    root.get("seed", c.seed);

    if (root.has("output")) {
        Section s = root.child("output");
        s.get("dir", c.output_dir);
        s.get("figures", c.figures);
        s.finish();
    }
    root.finish();
}

void set_path(json& doc, const std::string& path, const json& value) {
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) fail(ErrorCategory::config, "malformed parameter path '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        if (!node->is_object()) fail(ErrorCategory::config, "parameter path '" + path + "' crosses a non-object");
        start = dot + 1;
    }
}

bool near_integer(double x) {
    return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x));
}

} // namespace

// ---- timing ----------------------------------------------------------------

long TimingConfig::samples() const { return std::lround(t_end / dt_secondary); }
long TimingConfig::primary_per_sample() const { return std::lround(dt_secondary / dt_primary); }
long TimingConfig::svc_sample() const { return std::lround(t_svc_on / dt_secondary); }
long TimingConfig::event_sample() const { return std::lround(t_event / dt_secondary); }

// ---- scenario config ---------------------------------------------------------

std::string_view to_string(PlantKind kind) noexcept {
    switch (kind) {
        case PlantKind::full: return "full";
        case PlantKind::surrogate: return "surrogate";
        case PlantKind::linear_oracle: return "linear_oracle";
    }
    return "?";
}

Index ScenarioConfig::channels() const {
    if (plant == PlantKind::linear_oracle) return oracle.A.dim();
    return static_cast<Index>(full.ders.size());
}

SurrogateParams ScenarioConfig::surrogate_params() const {
    SurrogateParams s = SurrogateParams::from_microgrid(full);
    s.tau_v = surrogate_tau_v;
    return s;
}

PolyMatrix ScenarioConfig::design_polynomial() const {
    return PolyMatrix::scalar(f_coeffs, channels());
}

ControllerDesign ScenarioConfig::design() const {
    const Index m = channels();
    Matrix r;
    if (r_diag) {
        r = Matrix::Zero(m, m);
        for (Index i = 0; i < m; ++i) r(i, i) = (*r_diag)[static_cast<std::size_t>(i)];
    }
    return ControllerDesign::make(design_polynomial(), Vector::Constant(m, v_ref), r, e_min, e_max);
}

double ScenarioConfig::bibo_limit() const {
    if (bibo_bound) return *bibo_bound;
    return 10.0 * std::abs(v_ref) * std::sqrt(static_cast<double>(channels()));
}

void ScenarioConfig::validate() const {
    auto bad = [](const std::string& key, const std::string& what) {
        fail(ErrorCategory::config, "'" + key + "' " + what);
    };
    const auto& t = timing;
    if (!(t.dt_primary > 0.0)) bad("timing.dt_primary_s", "must be > 0");
    if (!(t.dt_secondary > 0.0)) bad("timing.dt_secondary_s", "must be > 0");
    if (!(t.t_end >= 0.0)) bad("timing.t_end_s", "must be >= 0");
    if (!near_integer(t.dt_secondary / t.dt_primary) || t.primary_per_sample() < 1) {
        bad("timing.dt_secondary_s", "must be an integer multiple of dt_primary_s");
    }
    if (!near_integer(t.t_end / t.dt_secondary)) bad("timing.t_end_s", "must be a whole number of secondary samples");
    if (!(t.t_svc_on >= 0.0) || !near_integer(t.t_svc_on / t.dt_secondary)) {
        bad("timing.t_svc_on_s", "must be >= 0 and on the secondary grid");
    }
    if (event.enabled) {
        if (!near_integer(t.t_event / t.dt_secondary)) bad("timing.t_event_s", "must be on the secondary grid");
        if (!(t.t_svc_on < t.t_event && t.t_event < t.t_end)) {
            bad("timing", "needs t_svc_on_s < t_event_s < t_end_s when the event is enabled");
        }
        if (!(event.factor > 0.0)) bad("event.factor", "must be > 0");
        if (plant == PlantKind::linear_oracle) bad("event.enabled", "must be false for the linear_oracle plant");
        if (event.load_index >= full.network.loads.size()) bad("event.load_index", "references a missing load");
    }

    if (plant == PlantKind::linear_oracle) {
        if (oracle.A.empty() || oracle.B.empty()) bad("plant.linear_oracle", "needs A and B");
        if (oracle.A.dim() != oracle.B.dim()) bad("plant.linear_oracle.B", "must match A's dimension");
        if (!oracle.A.is_monic()) bad("plant.linear_oracle.A", "must be monic (A_0 = I)");
        if (!oracle.A.is_stable()) bad("plant.linear_oracle.A", "must be stable");
        if (oracle.d < 1) bad("plant.linear_oracle.d", "must be >= 1");
        if (oracle.initial_output.size() != 0 && oracle.initial_output.size() != oracle.A.dim()) {
            bad("plant.linear_oracle.initial_output", "needs one entry per channel");
        }
        if (!(oracle.disturbance.amplitude >= 0.0)) bad("plant.linear_oracle.disturbance.amplitude", "must be >= 0");
    } else {
        try {
            full.validate();
        } catch (const Error& e) {
            bad("plant.full", e.what());
        }
        if (!(surrogate_tau_v > 0.0)) bad("plant.surrogate.tau_v_s", "must be > 0");
    }
    if (controller == ControllerKind::oracle && plant != PlantKind::linear_oracle) {
        bad("controller.kind", "oracle needs the linear_oracle plant");
    }
    if (controller == ControllerKind::oracle && (oracle.A.degree() != n || oracle.d != d)) {
        bad("identify.n", "and identify.d must equal the oracle plant's order and delay for the oracle controller");
    }
    if (controller == ControllerKind::feedback_linearization && plant == PlantKind::linear_oracle) {
        bad("controller.kind", "feedback-linearization needs a microgrid plant");
    }

    if (n < 1) bad("identify.n", "must be >= 1");
    if (d < 1) bad("identify.d", "must be >= 1");
    if (f_coeffs.empty() || f_coeffs.front() != 1.0) bad("controller.F_coeffs", "must start with 1");
    if (static_cast<int>(f_coeffs.size()) - 1 > n) bad("controller.F_coeffs", "degree must not exceed identify.n");
    if (r_diag && static_cast<Index>(r_diag->size()) != channels()) bad("controller.R_diag", "needs one entry per channel");
    if (window < 1) bad("controller.window_samples", "must be >= 1");
    if (!(mu >= 0.0)) bad("controller.mu", "must be >= 0");
    if (!(e_max > e_min)) bad("controller.E_max_V", "must exceed E_min_V");
    if (bibo_bound && !(*bibo_bound > 0.0)) bad("controller.bibo_bound", "must be > 0");
    if (!bibo_bound && !(bibo_limit() > 0.0)) bad("controller.bibo_bound", "must be set when V_ref_V is 0");
    if (!(fl_gain > 0.0)) bad("controller.fl_gain_per_s", "must be > 0");
    if (rho && !(*rho >= 0.0)) bad("identify.rho", "must be >= 0");
    if (calibration.samples < 10) bad("identify.calibration.samples", "must be >= 10");
    if (!(calibration.amplitude > 0.0)) bad("identify.calibration.amplitude_V", "must be > 0");
    try {
        EstimatorSettings es{rho.value_or(0.0), h_min, theta_bound, initial_input_gain};
        es.validate();
        network.validate();
        (void)design();  // validates F, R and the limits
    } catch (const Error& e) {
        fail(ErrorCategory::config, e.what());
    }
}

ScenarioConfig profile_defaults(std::string_view profile) {
    ScenarioConfig c;
    if (profile == "ci") {
        c.profile = "ci";
        c.plant = PlantKind::surrogate;
        c.timing.dt_primary = 1e-5;
    } else if (profile == "showcase") {
        c.profile = "showcase";
        c.plant = PlantKind::full;
        c.timing.dt_primary = 1e-6;
    } else {
        fail(ErrorCategory::config, "unknown profile '" + std::string(profile) + "' (expected ci | showcase)");
    }
    return c;
}

ScenarioConfig parse_config(std::string_view text, std::optional<std::string> profile_override,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCategory::config, "config must be a JSON object");
    for (const auto& [path, value] : overrides) {
        json v;
        try {
            v = json::parse(value);
        } catch (const json::parse_error&) {
            v = value;  // bare words become strings
        }
        set_path(doc, path, v);
    }
    std::string profile = "ci";
    if (doc.contains("profile")) {
        if (!doc["profile"].is_string()) fail(ErrorCategory::config, "'profile' must be a string");
        profile = doc["profile"].get<std::string>();
    }
    if (profile_override) profile = *profile_override;
    ScenarioConfig c = profile_defaults(profile);
    apply_document(doc, c);
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::string> profile_override,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(profile_override), overrides);
}

std::string dump_config(const ScenarioConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["profile"] = c.profile;
    json plant;
    plant["kind"] = std::string(to_string(c.plant));
    {
        json full;
        full["omega_n_rad_per_s"] = c.full.omega_n;
        json ders = json::array();
        for (const auto& d : c.full.ders) {
            ders.push_back({{"L_f_H", d.L_f}, {"r_f_ohm", d.r_f}, {"C_f_F", d.C_f}, {"L_c_H", d.L_c},
                            {"r_c_ohm", d.r_c}, {"R_d_ohm", d.R_d}, {"D_Q_V_per_var", d.D_Q},
                            {"m_P_rad_per_s_per_W", d.m_P}, {"K_PV", d.K_PV}, {"K_IV", d.K_IV},
                            {"K_PC", d.K_PC}, {"K_IC", d.K_IC}, {"omega_c_rad_per_s", d.omega_c},
                            {"F_ff", d.F_ff}, {"pll_omega_c_rad_per_s", d.pll_omega_c},
                            {"K_P_PLL", d.K_P_PLL}, {"K_I_PLL", d.K_I_PLL}});
        }
        full["der"] = ders;
        full["buses"] = c.full.network.buses;
        full["der_bus"] = c.full.network.der_bus;
        json lines = json::array();
        for (const auto& l : c.full.network.lines) {
            lines.push_back({{"from", l.from}, {"to", l.to}, {"R_ohm", l.R}, {"L_H", l.L}});
        }
        full["lines"] = lines;
        json loads = json::array();
        for (const auto& l : c.full.network.loads) {
            loads.push_back({{"bus", l.bus}, {"R_ohm", l.R}, {"L_H", l.L}});
        }
        full["loads"] = loads;
        plant["full"] = full;
    }
    plant["surrogate"] = {{"tau_v_s", c.surrogate_tau_v}};
    if (!c.oracle.A.empty()) {
        json o;
        o["A"] = poly_json(c.oracle.A);
        o["B"] = poly_json(c.oracle.B);
        o["d"] = c.oracle.d;
        o["disturbance"] = {
            {"kind", c.oracle.disturbance.kind == DisturbanceConfig::Kind::none ? "none" : "uniform_ball"},
            {"amplitude", c.oracle.disturbance.amplitude}};
        if (c.oracle.initial_output.size() > 0) {
            o["initial_output"] = std::vector<double>(c.oracle.initial_output.data(),
                                                      c.oracle.initial_output.data() + c.oracle.initial_output.size());
        }
        plant["linear_oracle"] = o;
    }
    j["plant"] = plant;

    json ctl;
    ctl["kind"] = std::string(to_string(c.controller));
    ctl["estimator_update"] = c.update_policy == EstimatorUpdate::both ? "both" : "selected";
    ctl["F_coeffs"] = c.f_coeffs;
    ctl["R_diag"] = c.r_diag ? json(*c.r_diag) : json(nullptr);
    ctl["mu"] = c.mu;
    ctl["window_samples"] = c.window;
    ctl["E_min_V"] = c.e_min;
    ctl["E_max_V"] = c.e_max;
    ctl["bibo_bound"] = c.bibo_bound ? json(*c.bibo_bound) : json(nullptr);
    ctl["fl_gain_per_s"] = c.fl_gain;
    j["controller"] = ctl;

    json id;
    id["n"] = c.n;
    id["d"] = c.d;
    id["rho"] = c.rho ? json(*c.rho) : json("auto");
    id["h_min"] = c.h_min;
    id["theta_bound"] = c.theta_bound;
    id["initial_input_gain"] = c.initial_input_gain;
    id["calibration"] = {{"samples", c.calibration.samples}, {"amplitude_V", c.calibration.amplitude}};
    id["network"] = {{"hidden", c.network.hidden},          {"learn_rate", c.network.learn_rate},
                     {"w_max", c.network.w_max},            {"input_scale", c.network.input_scale},
                     {"init_scale", c.network.init_scale},  {"train", c.train_network}};
    j["identify"] = id;

    j["timing"] = {{"t_end_s", c.timing.t_end},
                   {"dt_primary_s", c.timing.dt_primary},
                   {"dt_secondary_s", c.timing.dt_secondary},
                   {"t_svc_on_s", c.timing.t_svc_on},
                   {"t_event_s", c.timing.t_event}};
    j["event"] = {{"enabled", c.event.enabled}, {"load_index", c.event.load_index}, {"factor", c.event.factor}};
    j["V_ref_V"] = c.v_ref;
    j["E_nominal_V"] = c.e_nominal;
    j["seed"] = c.seed;
    j["output"] = {{"dir", c.output_dir}, {"figures", c.figures}};
    return j.dump(2);
}

} // namespace mmsvc
