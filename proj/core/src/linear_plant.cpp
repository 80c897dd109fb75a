#include "mmsvc/linear_plant.hpp"

#include "mmsvc/error.hpp"

#include <algorithm>

namespace mmsvc {

LinearOraclePlant::LinearOraclePlant(PolyMatrix a, PolyMatrix b, int d, Disturbance phi, Vector initial_output)
    : a_(std::move(a)), b_(std::move(b)), d_(d), phi_(std::move(phi)) {
    if (a_.empty() || b_.empty() || a_.dim() != b_.dim()) {
        fail(ErrorCategory::invalid_argument, "A and B must be non-empty with equal dimension");
    }
    if (d_ < 1) {
        fail(ErrorCategory::invalid_argument, "relative degree must be >= 1");
    }
    const Index m = a_.dim();
    if (initial_output.size() == 0) {
        initial_output = Vector::Zero(m);
    }
    if (initial_output.size() != m) {
        fail(ErrorCategory::invalid_argument, "initial output has wrong size");
    }
    // Outputs and inputs before time 0 are the initial rest condition.
    const auto depth = static_cast<std::size_t>(std::max(a_.degree(), 1));
    outputs_.assign(depth, initial_output);
    inputs_.assign(static_cast<std::size_t>(b_.degree() + d_), Vector::Zero(m));
}

void LinearOraclePlant::advance(const Vector& e_star) {
    const Index m = channels();
    if (e_star.size() != m) {
        fail(ErrorCategory::invalid_argument, "E* has wrong size");
    }
    inputs_.push_front(e_star);  // E(t)
    // V(t+1) = -sum_{i>=1} A_i V(t+1-i) + sum_j B_j E(t+1-d-j) + phi(t+1-d)
    const std::int64_t k = t_ + 1 - d_;
    Vector next = Vector::Zero(m);
    for (int i = 1; i <= a_.degree(); ++i) {
        next.noalias() -= a_[i] * outputs_[static_cast<std::size_t>(i - 1)];
    }
    for (int j = 0; j <= b_.degree(); ++j) {
        next.noalias() += b_[j] * inputs_[static_cast<std::size_t>(d_ - 1 + j)];
    }
    if (phi_) {
        const std::vector<Vector> outs(outputs_.begin(), outputs_.end());
        const std::vector<Vector> ins(inputs_.begin() + (d_ - 1), inputs_.end());
        Vector p = phi_(k, outs, ins);
        if (p.size() != m) {
            fail(ErrorCategory::invalid_argument, "disturbance has wrong size");
        }
        next += p;
        phi_log_.push_back(std::move(p));
    } else {
        phi_log_.push_back(Vector::Zero(m));
    }
    if (!next.allFinite()) {
        fail(ErrorCategory::plant_diverged, "non-finite oracle plant output", t_ + 1);
    }
    outputs_.push_front(std::move(next));
    outputs_.pop_back();
    inputs_.pop_back();
    ++t_;
}

std::unique_ptr<Plant> LinearOraclePlant::clone() const {
    return std::make_unique<LinearOraclePlant>(*this);
}

std::unique_ptr<LinearOraclePlant> make_linear_oracle_plant(const PolyMatrix& a, const PolyMatrix& b, int d,
                                                            Disturbance phi, Vector initial_output) {
    if (!a.is_monic()) {
        fail(ErrorCategory::normalization_required, "oracle plant needs a monic A");
    }
    if (!a.is_stable()) {
        fail(ErrorCategory::invalid_argument, "oracle plant needs a stable A");
    }
    if (b.empty() || b.dim() != a.dim()) {
        fail(ErrorCategory::invalid_argument, "B must match A's dimension");
    }
    Eigen::FullPivLU<Matrix> lu(b[0]);
    if (!lu.isInvertible()) {
        fail(ErrorCategory::invalid_argument, "B(0) must be invertible");
    }
    return std::make_unique<LinearOraclePlant>(a, b, d, std::move(phi), std::move(initial_output));
}

Matrix regression_parameters(const PolyMatrix& a, const PolyMatrix& b, const PolyMatrix& f, int d) {
    const int n = a.degree();
    if (n < 1) {
        fail(ErrorCategory::invalid_argument, "A must have degree >= 1");
    }
    if (b.degree() > n - 1) {
        fail(ErrorCategory::invalid_argument, "deg B must be <= deg A - 1");
    }
    if (f.degree() > n) {
        fail(ErrorCategory::invalid_argument, "deg F must be <= deg A");
    }
    const Index m = a.dim();
    const auto sol = solve_diophantine(a, f, d);
    const PolyMatrix lb = sol.L * b;
    const int e_slots = n + d - 1;
    Matrix theta = Matrix::Zero(m * (n + e_slots), m);
    for (int i = 0; i < n; ++i) {
        theta.block(i * m, 0, m, m) = sol.K.coeff_or_zero(i).transpose();
    }
    for (int i = 0; i < e_slots; ++i) {
        theta.block((n + i) * m, 0, m, m) = lb.coeff_or_zero(i).transpose();
    }
    return theta;
}

} // namespace mmsvc
