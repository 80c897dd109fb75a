#include "mmsvc/regressor.hpp"

#include "mmsvc/error.hpp"

#include <algorithm>
#include <string>

namespace mmsvc {

RegressorState::RegressorState(Index m, int n, int d, int output_depth)
    : m_(m), n_(n), d_(d) {
    if (m < 1 || n < 1 || d < 1) {
        fail(ErrorCategory::invalid_argument, "regressor needs m, n, d >= 1");
    }
    output_depth_ = static_cast<std::size_t>(std::max(n, output_depth));
    // E(k-1) .. E(k-n-d+2), but always keep one for the held slot.
    input_depth_ = static_cast<std::size_t>(std::max(n + d - 2, 1));
}

void RegressorState::push_output(const Vector& v) {
    if (v.size() != m_) {
        fail(ErrorCategory::invalid_argument, "output sample has wrong size");
    }
    outputs_.insert(outputs_.begin(), v);
    if (outputs_.size() > output_depth_) outputs_.pop_back();
}

void RegressorState::push_input(const Vector& e) {
    if (e.size() != m_) {
        fail(ErrorCategory::invalid_argument, "input sample has wrong size");
    }
    inputs_.insert(inputs_.begin(), e);
    if (inputs_.size() > input_depth_) inputs_.pop_back();
}

bool RegressorState::ready() const noexcept {
    return outputs_.size() >= static_cast<std::size_t>(n_) &&
           inputs_.size() >= static_cast<std::size_t>(n_ + d_ - 2);
}

Vector RegressorState::assemble(const Vector& current_input) const {
    if (!ready()) {
        fail(ErrorCategory::history_underrun, "regressor history not yet warm");
    }
    if (current_input.size() != m_) {
        fail(ErrorCategory::invalid_argument, "current input has wrong size");
    }
    Vector x(length());
    for (int i = 0; i < n_; ++i) {
        x.segment(i * m_, m_) = outputs_[static_cast<std::size_t>(i)];
    }
    x.segment(n_ * m_, m_) = current_input;
    for (int i = 1; i < input_slots(); ++i) {
        x.segment((n_ + i) * m_, m_) = inputs_[static_cast<std::size_t>(i - 1)];
    }
    return x;
}

Vector RegressorState::assemble_held() const {
    if (inputs_.empty()) {
        fail(ErrorCategory::history_underrun, "no previous input to hold");
    }
    return assemble(inputs_.front());
}

Matrix RegressorState::matrix_layout(const Vector& x) const {
    if (x.size() != length()) {
        fail(ErrorCategory::invalid_argument, "regressor has wrong length");
    }
    return Eigen::Map<const Matrix>(x.data(), m_, 2 * n_ + d_ - 1);
}

Vector form_transformed_output(std::span<const Vector> outputs_newest_first, const PolyMatrix& f) {
    if (outputs_newest_first.size() < static_cast<std::size_t>(f.degree() + 1)) {
        fail(ErrorCategory::history_underrun,
             "F needs " + std::to_string(f.degree() + 1) + " outputs, have " +
                 std::to_string(outputs_newest_first.size()));
    }
    return apply_recent(f, outputs_newest_first);
}

} // namespace mmsvc
