#include "mmsvc/scenario.hpp"

#include "mmsvc/error.hpp"
#include "mmsvc/microgrid.hpp"
#include "mmsvc/surrogate.hpp"

#include <algorithm>
#include <cmath>

namespace mmsvc {

namespace {

// Independent streams derived from the scenario seed.
constexpr std::uint64_t kDisturbanceStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kProbeStream = 0xc2b2ae3d27d4eb4fULL;

LoopSettings loop_settings(const ScenarioConfig& cfg, double rho) {
    LoopSettings s;
    s.kind = cfg.controller;
    s.update_policy = cfg.update_policy;
    s.n = cfg.n;
    s.d = cfg.d;
    s.estimator = EstimatorSettings{rho, cfg.h_min, cfg.theta_bound, cfg.initial_input_gain};
    s.network = cfg.network;
    s.switching = SwitchSettings{rho, cfg.mu, cfg.window};
    s.design = cfg.design();
    s.nominal_input = Vector::Constant(cfg.channels(), cfg.e_nominal);
    s.train_network = cfg.train_network;
    return s;
}

// Attaches the sample index to errors raised without one.
[[noreturn]] void rethrow_at(const Error& e, std::int64_t k) {
    if (e.sample()) throw e;
    throw Error(e.category(), e.what(), k);
}

} // namespace

DisturbanceSequence::DisturbanceSequence(Index m, DisturbanceConfig cfg, std::uint64_t seed)
    : m_(m), cfg_(cfg), rng_(seed), zero_(Vector::Zero(m)) {}

const Vector& DisturbanceSequence::at(std::int64_t k) {
    if (k < 0 || cfg_.kind == DisturbanceConfig::Kind::none) return zero_;
    while (static_cast<std::int64_t>(values_.size()) <= k) {
        // uniform in the ball of radius `amplitude`
        Vector dir(m_);
        for (Index i = 0; i < m_; ++i) dir(i) = rng_.normal();
        const double norm = dir.norm();
        const double radius = cfg_.amplitude * std::pow(rng_.uniform(), 1.0 / static_cast<double>(m_));
        values_.push_back(norm > 0.0 ? Vector(dir * (radius / norm)) : zero_);
    }
    return values_[static_cast<std::size_t>(k)];
}

BuiltPlant build_plant(const ScenarioConfig& cfg) {
    BuiltPlant out;
    const auto& t = cfg.timing;
    switch (cfg.plant) {
        case PlantKind::full:
            out.plant = std::make_unique<MicrogridPlant>(cfg.full, t.dt_primary, t.primary_per_sample());
            break;
        case PlantKind::surrogate:
            out.plant = std::make_unique<SurrogatePlant>(cfg.surrogate_params(), t.dt_primary, t.primary_per_sample());
            break;
        case PlantKind::linear_oracle: {
            const Index m = cfg.oracle.A.dim();
            auto seq = std::make_shared<DisturbanceSequence>(m, cfg.oracle.disturbance, cfg.seed ^ kDisturbanceStream);
            Disturbance phi;
            if (cfg.oracle.disturbance.kind != DisturbanceConfig::Kind::none) {
                phi = [seq](std::int64_t k, std::span<const Vector>, std::span<const Vector>) { return seq->at(k); };
            }
            out.plant = make_linear_oracle_plant(cfg.oracle.A, cfg.oracle.B, cfg.oracle.d, std::move(phi),
                                                 cfg.oracle.initial_output);
            out.disturbance = std::move(seq);
            break;
        }
    }
    return out;
}

double calibrate_rho(const ScenarioConfig& cfg) {
    BuiltPlant built = build_plant(cfg);
    Plant& plant = *built.plant;
    const Index m = plant.channels();
    const PolyMatrix f = cfg.design_polynomial();
    RegressorState reg(m, cfg.n, cfg.d, std::max(cfg.n, f.degree() + 1));
    Rng rng(cfg.seed ^ kProbeStream);

    const std::int64_t start = cfg.timing.svc_sample();
    const std::int64_t end = start + cfg.calibration.samples;
    const Vector nominal = Vector::Constant(m, cfg.e_nominal);
    std::vector<std::optional<Vector>> xs;
    std::vector<Vector> xcol, ycol;
    for (std::int64_t k = 0; k < end; ++k) {
        const Vector v = plant.output();
        reg.push_output(v);
        const auto dk = k - cfg.d;
        if (dk >= start && xs[static_cast<std::size_t>(dk)] &&
            reg.outputs().size() >= static_cast<std::size_t>(f.degree() + 1)) {
            xcol.push_back(*xs[static_cast<std::size_t>(dk)]);
            ycol.push_back(form_transformed_output(reg.outputs(), f));
        }
        Vector e = nominal;
        if (k >= start) e += cfg.calibration.amplitude * rng.uniform_vector(m, -1.0, 1.0);
        xs.push_back(reg.ready() ? std::optional<Vector>(reg.assemble(e)) : std::nullopt);
        reg.push_input(e);
        try {
            plant.advance(e);
        } catch (const Error& err) {
            rethrow_at(err, k);
        }
    }
    const auto rows = static_cast<Index>(xcol.size());
    const Index cols = reg.length();
    if (rows < cols + 1) {
        fail(ErrorCategory::config, "identify.calibration.samples too small to fit theta (need > " +
                                        std::to_string(cols + cfg.d) + ")");
    }
    Matrix X(rows, cols), Y(rows, m);
    for (Index r = 0; r < rows; ++r) {
        X.row(r) = xcol[static_cast<std::size_t>(r)].transpose();
        Y.row(r) = ycol[static_cast<std::size_t>(r)].transpose();
    }
    const Matrix theta = X.completeOrthogonalDecomposition().solve(Y);
    const Matrix resid = Y - X * theta;
    return resid.rowwise().norm().maxCoeff();
}

RunRecord run_scenario(const ScenarioConfig& cfg, const RowObserver& observer) {
    cfg.validate();
    RunRecord rec;
    rec.config_json = dump_config(cfg);
    rec.plant = std::string(to_string(cfg.plant));
    rec.controller = std::string(to_string(cfg.controller));
    rec.rho_calibrated = !cfg.rho.has_value();
    rec.rho = cfg.rho ? *cfg.rho : calibrate_rho(cfg);
    rec.bibo_limit = cfg.bibo_limit();

    const auto& t = cfg.timing;
    const Index m = cfg.channels();
    rec.context.channels = m;
    rec.context.dt_secondary = t.dt_secondary;
    rec.context.v_ref = cfg.v_ref;
    rec.context.svc_sample = t.svc_sample();
    if (cfg.event.enabled) rec.context.event_sample = t.event_sample();

    BuiltPlant built = build_plant(cfg);
    Plant& plant = *built.plant;
    SvcLoop loop(loop_settings(cfg, rec.rho), m, cfg.seed);
    if (cfg.controller == ControllerKind::oracle) {
        auto oracle = std::make_shared<const OracleController>(cfg.oracle.A, cfg.oracle.B, cfg.design_polynomial(),
                                                               cfg.oracle.d);
        auto seq = built.disturbance;
        const int d = cfg.oracle.d;
        loop.attach_oracle(oracle, [oracle, seq, d](std::int64_t k) {
            std::vector<Vector> phi;
            for (int i = 0; i < d; ++i) phi.push_back(seq->at(k - i));
            return oracle->residual_from_disturbance(phi);
        });
    } else if (cfg.controller == ControllerKind::feedback_linearization) {
        loop.attach_feedback_linearization(FeedbackLinearizationController(
            cfg.surrogate_params(), t.dt_secondary, FeedbackLinearizationSettings{cfg.fl_gain}));
    }

    const std::int64_t samples = t.samples();
    const std::int64_t k_svc = t.svc_sample();
    const std::int64_t k_event = cfg.event.enabled ? t.event_sample() : -1;
    const Vector v_ref = Vector::Constant(m, cfg.v_ref);
    rec.rows.reserve(static_cast<std::size_t>(samples));
    long freeze_seen = 0, floor_seen = 0;

    for (std::int64_t k = 0; k < samples; ++k) {
        try {
            if (k == k_event) plant.apply_load_step(cfg.event.load_index, cfg.event.factor);
            const Vector v = plant.output();
            const PowerReadout pw = plant.powers();
            const StepRecord step = loop.step(k, v, k >= k_svc);

            const double size = std::max(v.norm(), step.e_star.norm());
            if (!(size <= rec.bibo_limit)) {
                fail(ErrorCategory::monitor_violation,
                     "BIBO bound exceeded: max(|V_o|, |E*|) = " + std::to_string(size) + " > " +
                         std::to_string(rec.bibo_limit),
                     k);
            }
            const auto& st = loop.stats();
            if (st.freeze_violations > freeze_seen) {
                fail(ErrorCategory::monitor_violation, "parameters moved inside the dead zone", k);
            }
            if (st.floor_violations > floor_seen) {
                fail(ErrorCategory::monitor_violation,
                     "leading input block fell below h_min (sigma_min = " + std::to_string(st.min_sigma) + ")", k);
            }
            freeze_seen = st.freeze_violations;
            floor_seen = st.floor_violations;

            RunRow row;
            row.k = k;
            row.t = static_cast<double>(k) * t.dt_secondary;
            row.v = v;
            row.error = v - v_ref;
            if (step.identified) {
                row.e_linear_norm = step.e_linear.norm();
                row.e_nonlinear_norm = step.e_nonlinear.norm();
            }
            row.xi_linear = step.xi_linear;
            row.xi_nonlinear = step.xi_nonlinear;
            row.active = step.producer == Producer::linear ? 0 : step.producer == Producer::nonlinear ? 1 : -1;
            row.p = pw.p.size() == m ? pw.p : Vector::Zero(m);
            row.q = pw.q.size() == m ? pw.q : Vector::Zero(m);
            row.e_star = step.e_star;
            if (observer) observer(row, step);
            rec.rows.push_back(std::move(row));

            plant.advance(step.e_star);
        } catch (const Error& e) {
            rethrow_at(e, k);
        }
    }

    rec.invariants = loop.stats();
    if (rec.invariants.identity_pass_fraction() < 0.99) {
        fail(ErrorCategory::monitor_violation,
             "tracking/identification identity held on only " +
                 std::to_string(rec.invariants.identity_passed) + " of " +
                 std::to_string(rec.invariants.identity_checked) + " steps",
             samples - 1);
    }
    rec.summary = compute_summary(rec.rows, rec.context);
    return rec;
}

} // namespace mmsvc
