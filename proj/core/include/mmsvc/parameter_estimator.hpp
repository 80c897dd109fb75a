#pragma once

// Normalized-gradient identifier with dead zone and projection for
//   Y(k+d) = theta^T X(k) + h,   theta = [K_0 .. K_{n-1}, (LB)_0 .. (LB)_{n+d-2}]^T
// (N x m, N = m(2n+d-1)). Keeps theta(k-1) .. theta(k-d) so the error and the
// update at time k both use theta(k-d).

#include "mmsvc/types.hpp"

#include <deque>

namespace mmsvc {

struct EstimatorSettings {
    double rho = 0.1;                ///< bound on |h|; dead zone radius is 2 rho
    double h_min = 0.05;             ///< floor on singular values of (LB)_0
    double theta_bound = 1e3;        ///< box on every entry of theta
    double initial_input_gain = 1.0; ///< (LB)_0 = g I at start, rest zero

    void validate() const;
};

struct UpdateReport {
    bool adapted = false;       ///< eta = 1
    bool box_clamped = false;
    bool floor_projected = false;
    bool freeze_held = true;    ///< eta = 0 left theta bitwise unchanged
    double sigma_min = 0.0;     ///< smallest singular value of (LB)_0 after the update
    double step_norm = 0.0;     ///< |theta(k) - theta(k-d)|_F
};

class ParameterEstimator {
public:
    ParameterEstimator(Index m, int n, int d, EstimatorSettings settings);

    [[nodiscard]] Index channels() const noexcept { return m_; }
    [[nodiscard]] int order() const noexcept { return n_; }
    [[nodiscard]] int delay() const noexcept { return d_; }
    [[nodiscard]] Index regressor_length() const noexcept { return m_ * (2 * n_ + d_ - 1); }
    [[nodiscard]] const EstimatorSettings& settings() const noexcept { return settings_; }

    /// theta(k), the newest estimate.
    [[nodiscard]] const Matrix& params() const noexcept { return history_.front(); }
    /// theta(k - lag) relative to the newest estimate, lag in [0, d-1];
    /// lagged(d-1) is what the next error/update uses.
    [[nodiscard]] const Matrix& lagged(int lag) const;
    [[nodiscard]] const Matrix& update_base() const noexcept { return history_.back(); }

    /// Overwrites every stored snapshot (tests, warm starts).
    void set_params(const Matrix& theta);

    /// theta(k)^T x.
    [[nodiscard]] Vector predict(const Vector& x) const;
    /// y - theta(k-d)^T x_lag, to be called before update() at time k.
    [[nodiscard]] Vector identification_error(const Vector& y, const Vector& x_lag) const;
    /// theta(k) = proj(theta(k-d) + eta x_lag e^T / (1 + |x_lag|^2)).
    UpdateReport update(const Vector& e, const Vector& x_lag);
    /// Skips adaptation this step: theta(k) = theta(k-1).
    void hold();

    /// (LB)_0 as the m x m block multiplying E(k).
    [[nodiscard]] Matrix leading_block() const { return leading_block_of(params(), m_, n_); }
    [[nodiscard]] static Matrix leading_block_of(const Matrix& theta, Index m, int n);
    [[nodiscard]] static double sigma_min(const Matrix& block);

    /// Clamps theta into the box and the singular values of (LB)_0 to >= h_min.
    /// Flags report which step moved anything.
    static Matrix project(Matrix theta, Index m, int n, const EstimatorSettings& s, bool* box_clamped = nullptr,
                          bool* floor_projected = nullptr);

private:
    Index m_;
    int n_;
    int d_;
    EstimatorSettings settings_;
    std::deque<Matrix> history_;  // theta(k), theta(k-1), ..., theta(k-d+1)
};

} // namespace mmsvc
