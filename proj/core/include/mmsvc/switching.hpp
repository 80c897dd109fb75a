#pragma once

// Performance-index supervisor choosing between the linear and nonlinear
// controllers:
//   xi_j(k) = sum_s eta_j (|e_j|^2 - 4 rho^2) / (2 (1 + |X(k-d)|^2))
//           + mu * sum over the last M samples of (1 - eta_j) |e_j|^2
// The linear controller wins ties.

#include "mmsvc/types.hpp"

#include <deque>

namespace mmsvc {

enum class ControllerId { linear, nonlinear };

struct SwitchSettings {
    double rho = 0.1;
    double mu = 1.0;
    int window = 10;

    void validate() const;
};

class SwitchState {
public:
    explicit SwitchState(SwitchSettings settings);

    /// One step of both indices; returns the selected controller.
    ControllerId update(const Vector& e_linear, const Vector& e_nonlinear, const Vector& x_lag);

    [[nodiscard]] ControllerId active() const noexcept { return active_; }
    [[nodiscard]] double xi_linear() const noexcept { return xi_l_; }
    [[nodiscard]] double xi_nonlinear() const noexcept { return xi_n_; }
    [[nodiscard]] double cum_linear() const noexcept { return cum_l_; }
    [[nodiscard]] double cum_nonlinear() const noexcept { return cum_n_; }
    [[nodiscard]] long switches() const noexcept { return switches_; }
    [[nodiscard]] const SwitchSettings& settings() const noexcept { return settings_; }

    /// First-sum increment for one estimator (>= 0 whenever it is nonzero).
    [[nodiscard]] static double increment(const Vector& e, const Vector& x_lag, double rho);

private:
    SwitchSettings settings_;
    double cum_l_ = 0.0;
    double cum_n_ = 0.0;
    double xi_l_ = 0.0;
    double xi_n_ = 0.0;
    std::deque<double> win_l_;
    std::deque<double> win_n_;
    ControllerId active_ = ControllerId::linear;
    long switches_ = 0;
};

} // namespace mmsvc
