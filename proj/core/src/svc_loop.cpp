#include "mmsvc/svc_loop.hpp"

#include "mmsvc/error.hpp"

#include <algorithm>
#include <string>

namespace mmsvc {

std::string_view to_string(ControllerKind kind) noexcept {
    switch (kind) {
        case ControllerKind::mmac: return "mmac";
        case ControllerKind::linear_only: return "linear-only";
        case ControllerKind::nonlinear_only: return "nonlinear-only";
        case ControllerKind::oracle: return "oracle";
        case ControllerKind::feedback_linearization: return "feedback-linearization";
        case ControllerKind::none: return "none";
    }
    return "?";
}

std::string_view to_string(Producer p) noexcept {
    switch (p) {
        case Producer::nominal: return "nominal";
        case Producer::linear: return "linear";
        case Producer::nonlinear: return "nonlinear";
        case Producer::oracle: return "oracle";
        case Producer::feedback_linearization: return "feedback-linearization";
    }
    return "?";
}

SvcLoop::SvcLoop(LoopSettings settings, Index channels, std::uint64_t seed)
    : settings_(std::move(settings)),
      m_(channels),
      rng_(seed),
      reg_(channels, settings_.n, settings_.d, std::max(settings_.n, settings_.design.F.degree() + 1)),
      linear_(channels, settings_.n, settings_.d, settings_.estimator),
      nonlinear_(channels, settings_.n, settings_.d, settings_.estimator, settings_.network, rng_),
      switch_(settings_.switching) {
    settings_.design.validate();
    if (settings_.design.channels() != channels) {
        fail(ErrorCategory::config, "controller design has the wrong channel count");
    }
    if (settings_.nominal_input.size() != channels) {
        fail(ErrorCategory::config, "nominal input needs one entry per channel");
    }
}

void SvcLoop::attach_oracle(std::shared_ptr<const OracleController> oracle,
                            std::function<Vector(std::int64_t)> residual) {
    if (!oracle || oracle->order() != settings_.n || oracle->delay() != settings_.d) {
        fail(ErrorCategory::config, "oracle controller does not match the loop's n and d");
    }
    oracle_ = std::move(oracle);
    oracle_residual_ = std::move(residual);
}

void SvcLoop::attach_feedback_linearization(FeedbackLinearizationController fl) {
    fl_.emplace(std::move(fl));
}

ControllerId SvcLoop::selected() const {
    switch (settings_.kind) {
        case ControllerKind::linear_only: return ControllerId::linear;
        case ControllerKind::nonlinear_only: return ControllerId::nonlinear;
        default: return switch_.active();
    }
}

void SvcLoop::check_update(const Vector& e, const Matrix& before, const ParameterEstimator& est) {
    const auto& s = est.settings();
    if (!(e.norm() > 2.0 * s.rho)) {
        ++stats_.freeze_checks;
        if (!(est.params().array() == before.array()).all()) ++stats_.freeze_violations;
    }
    const double sigma = ParameterEstimator::sigma_min(est.leading_block());
    ++stats_.floor_checks;
    stats_.min_sigma = std::min(stats_.min_sigma, sigma);
    if (sigma < s.h_min * (1.0 - 1e-12)) ++stats_.floor_violations;
}

StepRecord SvcLoop::step(std::int64_t k, const Vector& v, bool svc_enabled) {
    if (v.size() != m_) fail(ErrorCategory::invalid_argument, "measurement has wrong size", k);
    reg_.push_output(v);
    StepRecord rec;
    const auto d = static_cast<std::size_t>(settings_.d);
    const bool adaptive = settings_.kind == ControllerKind::mmac || settings_.kind == ControllerKind::linear_only ||
                          settings_.kind == ControllerKind::nonlinear_only;

    // Identification on X(k-d).
    if (past_.size() >= d && past_[d - 1].x && past_[d - 1].x_held &&
        reg_.outputs().size() >= static_cast<std::size_t>(settings_.design.F.degree() + 1)) {
        const Sample& lag = past_[d - 1];
        const Vector y = form_transformed_output(reg_.outputs(), settings_.design.F);
        rec.e_linear = linear_.identification_error(y, *lag.x);
        rec.e_nonlinear = nonlinear_.identification_error(y, *lag.x, lag.h_hat);
        rec.identified = true;
        switch_.update(rec.e_linear, rec.e_nonlinear, *lag.x);
        const ControllerId now = selected();

        // Realized tracking error against the producer's own identification error.
        if (lag.producer == Producer::linear || lag.producer == Producer::nonlinear) {
            const ControllerId producer_id =
                lag.producer == Producer::linear ? ControllerId::linear : ControllerId::nonlinear;
            if (lag.clamped) {
                ++stats_.identity_clamp_exempt;
            } else if (producer_id != now) {
                ++stats_.identity_switch_exempt;
            } else {
                const Vector tracking = y - settings_.design.R * settings_.design.v_ref;
                const Vector& e_own = producer_id == ControllerId::linear ? rec.e_linear : rec.e_nonlinear;
                const double r = (tracking - e_own).norm();
                ++stats_.identity_checked;
                if (r <= 1e-9) ++stats_.identity_passed;
                stats_.identity_max_residual = std::max(stats_.identity_max_residual, r);
            }
        }

        const bool both = settings_.update_policy == EstimatorUpdate::both;
        if (both || now == ControllerId::linear) {
            const Matrix before = linear_.update_base();
            linear_.update(rec.e_linear, *lag.x);
            check_update(rec.e_linear, before, linear_);
        } else {
            linear_.hold();
        }
        if (both || now == ControllerId::nonlinear) {
            const Matrix before = nonlinear_.parameters().update_base();
            const auto rep =
                nonlinear_.update(rec.e_nonlinear, y, *lag.x, *lag.x_held, settings_.train_network);
            if (rep.train.skipped) ++stats_.network_skips;
            check_update(rec.e_nonlinear, before, nonlinear_.parameters());
        } else {
            nonlinear_.parameters().hold();
        }
    }

    Sample cur;
    const bool ready = reg_.ready() && !reg_.past_inputs().empty();
    if (ready) {
        cur.x_held = reg_.assemble_held();
        cur.h_hat = nonlinear_.estimate_residual(*cur.x_held);
    } else {
        cur.h_hat = Vector::Zero(m_);
    }

    if (fl_) fl_->observe(v);

    Vector e_star = settings_.nominal_input;
    if (svc_enabled && settings_.kind != ControllerKind::none) {
        std::optional<ControlResult> res;
        switch (settings_.kind) {
            case ControllerKind::mmac:
            case ControllerKind::linear_only:
            case ControllerKind::nonlinear_only:
                if (ready) {
                    if (selected() == ControllerId::linear) {
                        res = linear_control(linear_.params(), reg_, settings_.design);
                        cur.producer = Producer::linear;
                    } else {
                        res = nonlinear_control(nonlinear_.parameters().params(), cur.h_hat, reg_, settings_.design);
                        cur.producer = Producer::nonlinear;
                    }
                }
                break;
            case ControllerKind::oracle:
                if (!oracle_) fail(ErrorCategory::config, "oracle controller selected but none attached", k);
                if (reg_.ready()) {
                    const Vector h = oracle_residual_ ? oracle_residual_(k) : Vector::Zero(m_);
                    res = oracle_->control(reg_, settings_.design, h);
                    cur.producer = Producer::oracle;
                }
                break;
            case ControllerKind::feedback_linearization:
                if (!fl_) fail(ErrorCategory::config, "feedback linearization selected but not attached", k);
                e_star = fl_->control(v, settings_.design.v_ref);
                {
                    const Vector raw = e_star;
                    e_star = e_star.cwiseMax(settings_.design.e_min).cwiseMin(settings_.design.e_max);
                    cur.clamped = (raw.array() != e_star.array()).any();
                }
                cur.producer = Producer::feedback_linearization;
                break;
            case ControllerKind::none:
                break;
        }
        if (res) {
            e_star = res->e_star;
            cur.clamped = res->clamped;
        }
    }

    if (reg_.ready()) cur.x = reg_.assemble(e_star);
    reg_.push_input(e_star);
    past_.push_front(std::move(cur));
    if (past_.size() > d) past_.pop_back();

    rec.e_star = e_star;
    rec.producer = past_.front().producer;
    rec.clamped = past_.front().clamped;
    rec.xi_linear = switch_.xi_linear();
    rec.xi_nonlinear = switch_.xi_nonlinear();
    rec.active = adaptive ? selected() : ControllerId::linear;
    rec.theta_linear_norm = linear_.params().norm();
    rec.theta_nonlinear_norm = nonlinear_.parameters().params().norm();
    rec.weight_norm = nonlinear_.network().weight_norm();
    return rec;
}

} // namespace mmsvc
