#include "mmsvc/feedback_linearization.hpp"

#include "mmsvc/error.hpp"

#include <cmath>

namespace mmsvc {

FeedbackLinearizationController::FeedbackLinearizationController(SurrogateParams nominal, double dt_secondary,
                                                                 FeedbackLinearizationSettings settings)
    : nominal_(std::move(nominal)), settings_(settings) {
    nominal_.validate();
    if (!(dt_secondary > 0.0)) fail(ErrorCategory::invalid_argument, "dt_secondary must be > 0");
    if (!(settings_.gain > 0.0)) fail(ErrorCategory::config, "feedback-linearization gain must be > 0");
    decay_ = std::exp(-nominal_.omega_c * dt_secondary);
    q_hat_ = Vector::Zero(static_cast<Index>(nominal_.der_count()));
}

void FeedbackLinearizationController::observe(const Vector& v) {
    if (v.size() != q_hat_.size()) fail(ErrorCategory::invalid_argument, "measurement has wrong size");
    const Vector q_ss = nominal_.reactive_demand(v);
    if (!primed_) {
        q_hat_ = q_ss;
        primed_ = true;
        return;
    }
    q_hat_ = q_ss + decay_ * (q_hat_ - q_ss);
}

Vector FeedbackLinearizationController::control(const Vector& v, const Vector& v_ref) const {
    Vector e(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double dq = nominal_.D_Q[static_cast<std::size_t>(i)];
        e(i) = v(i) + dq * q_hat_(i) + nominal_.tau_v * settings_.gain * (v_ref(i) - v(i));
    }
    return e;
}

} // namespace mmsvc
