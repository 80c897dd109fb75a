#include "mmsvc/switching.hpp"

#include "mmsvc/error.hpp"

#include <cmath>
#include <numeric>

namespace mmsvc {

void SwitchSettings::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) fail(ErrorCategory::config, "switch rho must be >= 0");
    if (!(mu >= 0.0) || !std::isfinite(mu)) fail(ErrorCategory::config, "mu must be >= 0");
    if (window < 1) fail(ErrorCategory::config, "switch window M must be >= 1");
}

SwitchState::SwitchState(SwitchSettings settings) : settings_(settings) {
    settings_.validate();
}

double SwitchState::increment(const Vector& e, const Vector& x_lag, double rho) {
    const double e2 = e.squaredNorm();
    if (!(std::sqrt(e2) > 2.0 * rho)) return 0.0;
    return (e2 - 4.0 * rho * rho) / (2.0 * (1.0 + x_lag.squaredNorm()));
}

ControllerId SwitchState::update(const Vector& e_linear, const Vector& e_nonlinear, const Vector& x_lag) {
    const double rho = settings_.rho;
    cum_l_ += increment(e_linear, x_lag, rho);
    cum_n_ += increment(e_nonlinear, x_lag, rho);

    auto push = [&](std::deque<double>& win, const Vector& e) {
        const bool frozen = !(e.norm() > 2.0 * rho);
        win.push_back(frozen ? e.squaredNorm() : 0.0);
        if (win.size() > static_cast<std::size_t>(settings_.window)) win.pop_front();
    };
    push(win_l_, e_linear);
    push(win_n_, e_nonlinear);

    xi_l_ = cum_l_ + settings_.mu * std::accumulate(win_l_.begin(), win_l_.end(), 0.0);
    xi_n_ = cum_n_ + settings_.mu * std::accumulate(win_n_.begin(), win_n_.end(), 0.0);

    const ControllerId next = xi_l_ <= xi_n_ ? ControllerId::linear : ControllerId::nonlinear;
    if (next != active_) ++switches_;
    active_ = next;
    return active_;
}

} // namespace mmsvc
