#pragma once

// The secondary-rate pipeline, one call per sample:
//   measure V(k) -> errors e_L, e_N from X(k-d) -> switch -> identifier
//   updates + network training -> control E(k) -> store X(k).
// Also checks the runtime invariants (dead-zone freeze, projection floor,
// tracking/identification identity) and counts what it saw.

#include "mmsvc/control_law.hpp"
#include "mmsvc/feedback_linearization.hpp"
#include "mmsvc/nonlinear_estimator.hpp"
#include "mmsvc/oracle_controller.hpp"
#include "mmsvc/parameter_estimator.hpp"
#include "mmsvc/regressor.hpp"
#include "mmsvc/switching.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

namespace mmsvc {

enum class ControllerKind { mmac, linear_only, nonlinear_only, oracle, feedback_linearization, none };
enum class EstimatorUpdate { both, selected };

/// Which law produced an applied input.
enum class Producer { nominal, linear, nonlinear, oracle, feedback_linearization };

struct LoopSettings {
    ControllerKind kind = ControllerKind::mmac;
    EstimatorUpdate update_policy = EstimatorUpdate::both;
    int n = 2;
    int d = 1;
    EstimatorSettings estimator;
    NeuralSettings network;
    SwitchSettings switching;
    ControllerDesign design;
    Vector nominal_input;  ///< E* while SVC is off or the regressor is cold
    bool train_network = true;
};

struct InvariantStats {
    long freeze_checks = 0;
    long freeze_violations = 0;
    long floor_checks = 0;
    long floor_violations = 0;
    double min_sigma = std::numeric_limits<double>::infinity();
    long identity_checked = 0;
    long identity_passed = 0;
    double identity_max_residual = 0.0;
    long identity_switch_exempt = 0;
    long identity_clamp_exempt = 0;
    long network_skips = 0;

    [[nodiscard]] double identity_pass_fraction() const {
        return identity_checked == 0 ? 1.0 : static_cast<double>(identity_passed) / identity_checked;
    }
};

struct StepRecord {
    Vector e_star;
    Producer producer = Producer::nominal;
    bool clamped = false;
    bool identified = false;  ///< errors below were computed this step
    Vector e_linear;
    Vector e_nonlinear;
    double xi_linear = 0.0;
    double xi_nonlinear = 0.0;
    ControllerId active = ControllerId::linear;
    double theta_linear_norm = 0.0;
    double theta_nonlinear_norm = 0.0;
    double weight_norm = 0.0;
};

class SvcLoop {
public:
    SvcLoop(LoopSettings settings, Index channels, std::uint64_t seed);

    /// Oracle controller kind only: true model and h(k) provider (zero if empty).
    void attach_oracle(std::shared_ptr<const OracleController> oracle,
                       std::function<Vector(std::int64_t)> residual = {});
    /// Feedback-linearization kind only.
    void attach_feedback_linearization(FeedbackLinearizationController fl);

    StepRecord step(std::int64_t k, const Vector& v, bool svc_enabled);

    [[nodiscard]] const InvariantStats& stats() const noexcept { return stats_; }
    [[nodiscard]] const ParameterEstimator& linear() const noexcept { return linear_; }
    [[nodiscard]] const NonlinearEstimator& nonlinear() const noexcept { return nonlinear_; }
    [[nodiscard]] const SwitchState& switch_state() const noexcept { return switch_; }
    [[nodiscard]] const RegressorState& regressor() const noexcept { return reg_; }
    [[nodiscard]] const LoopSettings& settings() const noexcept { return settings_; }

private:
    struct Sample {
        std::optional<Vector> x;        // X(k) with the applied E(k)
        std::optional<Vector> x_held;   // network input at k
        Vector h_hat;                   // cached network output at k
        Producer producer = Producer::nominal;
        bool clamped = false;
    };

    void check_update(const Vector& e, const Matrix& before, const ParameterEstimator& est);
    [[nodiscard]] ControllerId selected() const;

    LoopSettings settings_;
    Index m_;
    Rng rng_;
    RegressorState reg_;
    ParameterEstimator linear_;
    NonlinearEstimator nonlinear_;
    SwitchState switch_;
    std::shared_ptr<const OracleController> oracle_;
    std::function<Vector(std::int64_t)> oracle_residual_;
    std::optional<FeedbackLinearizationController> fl_;
    std::deque<Sample> past_;  // samples k-1, k-2, ..., k-d
    InvariantStats stats_;
};

[[nodiscard]] std::string_view to_string(ControllerKind kind) noexcept;
[[nodiscard]] std::string_view to_string(Producer p) noexcept;

} // namespace mmsvc
