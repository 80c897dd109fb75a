#include "mmsvc/nonlinear_estimator.hpp"

#include "mmsvc/error.hpp"

namespace mmsvc {

NonlinearEstimator::NonlinearEstimator(Index m, int n, int d, EstimatorSettings est, NeuralSettings nn, Rng& rng)
    : params_(m, n, d, est), net_(m * (2 * n + d - 1), m, nn, rng) {}

Vector NonlinearEstimator::identification_error(const Vector& y, const Vector& x_lag, const Vector& h_cached) const {
    if (h_cached.size() != params_.channels()) {
        fail(ErrorCategory::invalid_argument, "cached residual has wrong size");
    }
    return params_.identification_error(y, x_lag) - h_cached;
}

Vector NonlinearEstimator::residual_target(const Vector& y, const Vector& x_lag) const {
    return params_.identification_error(y, x_lag);
}

NonlinearUpdateReport NonlinearEstimator::update(const Vector& e_n, const Vector& y, const Vector& x_lag,
                                                 const Vector& x_held_lag, bool train) {
    NonlinearUpdateReport report;
    const Vector target = residual_target(y, x_lag);
    report.params = params_.update(e_n, x_lag);
    if (train) {
        report.train = net_.train_step(x_held_lag, target);
    }
    return report;
}

} // namespace mmsvc
