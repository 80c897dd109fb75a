#pragma once

// Linear-in-parameters part theta_N (same law as the linear identifier) plus a
// network estimating the residual h*. The network output used in e_N(k) is
// the value cached when X(k-d) was formed, never a re-evaluation.

#include "mmsvc/neural_network.hpp"
#include "mmsvc/parameter_estimator.hpp"

namespace mmsvc {

struct NonlinearUpdateReport {
    UpdateReport params;
    TrainReport train;
};

class NonlinearEstimator {
public:
    NonlinearEstimator(Index m, int n, int d, EstimatorSettings est, NeuralSettings nn, Rng& rng);

    [[nodiscard]] ParameterEstimator& parameters() noexcept { return params_; }
    [[nodiscard]] const ParameterEstimator& parameters() const noexcept { return params_; }
    [[nodiscard]] NeuralNetwork& network() noexcept { return net_; }
    [[nodiscard]] const NeuralNetwork& network() const noexcept { return net_; }

    /// h*-hat for a held regressor (E(k) slot filled with E(k-1)).
    [[nodiscard]] Vector estimate_residual(const Vector& x_held) const { return net_.forward(x_held); }

    /// e_N(k) = y - theta_N(k-d)^T x_lag - h_cached.
    [[nodiscard]] Vector identification_error(const Vector& y, const Vector& x_lag, const Vector& h_cached) const;

    /// Training target h*(k) = y - theta_N(k-d)^T x_lag; call before update().
    [[nodiscard]] Vector residual_target(const Vector& y, const Vector& x_lag) const;

    /// Parameter update with e_N, then one training step on (x_held_lag, target).
    NonlinearUpdateReport update(const Vector& e_n, const Vector& y, const Vector& x_lag, const Vector& x_held_lag,
                                 bool train = true);

private:
    ParameterEstimator params_;
    NeuralNetwork net_;
};

} // namespace mmsvc
