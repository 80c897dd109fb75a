#pragma once

// Rolling input/output history and the regression vector
//   X(k) = [V(k); ...; V(k-n+1); E(k); ...; E(k-n-d+2)],  length m(2n+d-1).

#include "mmsvc/poly_matrix.hpp"

#include <deque>
#include <span>
#include <vector>

namespace mmsvc {

class RegressorState {
public:
    /// output_depth >= n keeps extra outputs for F(z^-1) filtering.
    RegressorState(Index m, int n, int d, int output_depth = 0);

    [[nodiscard]] Index channels() const noexcept { return m_; }
    [[nodiscard]] int order() const noexcept { return n_; }
    [[nodiscard]] int delay() const noexcept { return d_; }
    [[nodiscard]] Index length() const noexcept { return m_ * (2 * n_ + d_ - 1); }
    [[nodiscard]] int input_slots() const noexcept { return n_ + d_ - 1; }

    /// Starts sample k with its measurement V(k).
    void push_output(const Vector& v);
    /// Completes sample k with the applied input E(k).
    void push_input(const Vector& e);

    /// Enough history to assemble X(k) once E(k) is supplied.
    [[nodiscard]] bool ready() const noexcept;

    /// X(k) with `current_input` in the E(k) slot. Throws history_underrun
    /// when not ready().
    [[nodiscard]] Vector assemble(const Vector& current_input) const;
    /// X(k) with E(k-1) held in the E(k) slot (network input before E(k) is known).
    [[nodiscard]] Vector assemble_held() const;

    /// Column-per-sample view of X: m x (2n+d-1).
    [[nodiscard]] Matrix matrix_layout(const Vector& x) const;

    /// Newest first: V(k), V(k-1), ...
    [[nodiscard]] std::span<const Vector> outputs() const noexcept { return outputs_; }
    /// Newest first: E(k-1), E(k-2), ... while sample k is open.
    [[nodiscard]] std::span<const Vector> past_inputs() const noexcept { return inputs_; }

private:
    Index m_;
    int n_;
    int d_;
    std::size_t output_depth_;
    std::size_t input_depth_;
    std::vector<Vector> outputs_;
    std::vector<Vector> inputs_;
};

/// Y(k) = F(z^-1) V(k) with outputs newest first. Throws history_underrun.
[[nodiscard]] Vector form_transformed_output(std::span<const Vector> outputs_newest_first, const PolyMatrix& f);

} // namespace mmsvc
