#include "mmsvc/parameter_estimator.hpp"

#include "mmsvc/error.hpp"

#include <cmath>

namespace mmsvc {

void EstimatorSettings::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) fail(ErrorCategory::config, "rho must be finite and >= 0");
    if (!(h_min > 0.0)) fail(ErrorCategory::config, "h_min must be > 0");
    if (!(theta_bound > 0.0)) fail(ErrorCategory::config, "theta_bound must be > 0");
    if (!(initial_input_gain >= h_min) || initial_input_gain > theta_bound) {
        fail(ErrorCategory::config, "initial_input_gain must lie in [h_min, theta_bound]");
    }
}

ParameterEstimator::ParameterEstimator(Index m, int n, int d, EstimatorSettings settings)
    : m_(m), n_(n), d_(d), settings_(settings) {
    if (m < 1 || n < 1 || d < 1) {
        fail(ErrorCategory::invalid_argument, "estimator needs m, n, d >= 1");
    }
    settings_.validate();
    Matrix theta = Matrix::Zero(regressor_length(), m_);
    theta.block(n_ * m_, 0, m_, m_) = settings_.initial_input_gain * Matrix::Identity(m_, m_);
    history_.assign(static_cast<std::size_t>(d_), theta);
}

const Matrix& ParameterEstimator::lagged(int lag) const {
    if (lag < 0 || lag >= d_) {
        fail(ErrorCategory::invalid_argument, "lag outside [0, d-1]");
    }
    return history_[static_cast<std::size_t>(lag)];
}

void ParameterEstimator::set_params(const Matrix& theta) {
    if (theta.rows() != regressor_length() || theta.cols() != m_) {
        fail(ErrorCategory::invalid_argument, "theta has wrong shape");
    }
    for (auto& h : history_) h = theta;
}

Vector ParameterEstimator::predict(const Vector& x) const {
    if (x.size() != regressor_length()) {
        fail(ErrorCategory::invalid_argument, "regressor has wrong length");
    }
    return params().transpose() * x;
}

Vector ParameterEstimator::identification_error(const Vector& y, const Vector& x_lag) const {
    if (x_lag.size() != regressor_length() || y.size() != m_) {
        fail(ErrorCategory::invalid_argument, "identification error: dimension mismatch");
    }
    return y - update_base().transpose() * x_lag;
}

Matrix ParameterEstimator::leading_block_of(const Matrix& theta, Index m, int n) {
    return theta.block(n * m, 0, m, m).transpose();
}

double ParameterEstimator::sigma_min(const Matrix& block) {
    Eigen::JacobiSVD<Matrix> svd(block);
    return svd.singularValues().minCoeff();
}

Matrix ParameterEstimator::project(Matrix theta, Index m, int n, const EstimatorSettings& s, bool* box_clamped,
                                   bool* floor_projected) {
    bool boxed = false;
    for (Index j = 0; j < theta.cols(); ++j) {
        for (Index i = 0; i < theta.rows(); ++i) {
            double& v = theta(i, j);
            if (v > s.theta_bound) {
                v = s.theta_bound;
                boxed = true;
            } else if (v < -s.theta_bound) {
                v = -s.theta_bound;
                boxed = true;
            }
        }
    }
    bool floored = false;
    auto block = theta.block(n * m, 0, m, m);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector sv = svd.singularValues();
    if (sv.minCoeff() < s.h_min) {
        for (Index i = 0; i < sv.size(); ++i) sv(i) = std::max(sv(i), s.h_min);
        block = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
        floored = true;
    }
    if (box_clamped) *box_clamped = boxed;
    if (floor_projected) *floor_projected = floored;
    return theta;
}

UpdateReport ParameterEstimator::update(const Vector& e, const Vector& x_lag) {
    if (x_lag.size() != regressor_length() || e.size() != m_) {
        fail(ErrorCategory::invalid_argument, "estimator update: dimension mismatch");
    }
    UpdateReport report;
    const Matrix& base = update_base();
    Matrix next;
    report.adapted = e.norm() > 2.0 * settings_.rho;
    if (report.adapted) {
        const double scale = 1.0 / (1.0 + x_lag.squaredNorm());
        Matrix raw = base + scale * x_lag * e.transpose();
        next = project(std::move(raw), m_, n_, settings_, &report.box_clamped, &report.floor_projected);
    } else {
        next = base;
        report.freeze_held = (next.array() == base.array()).all();
    }
    report.step_norm = (next - base).norm();
    report.sigma_min = sigma_min(leading_block_of(next, m_, n_));
    history_.push_front(std::move(next));
    history_.pop_back();
    return report;
}

void ParameterEstimator::hold() {
    Matrix same = history_.front();
    history_.push_front(std::move(same));
    history_.pop_back();
}

} // namespace mmsvc
