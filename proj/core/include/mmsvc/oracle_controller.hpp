#pragma once

// Known-model optimal controller: with L, K from F = L A + z^-d K,
//   (L B)(z^-1) E(k) = R V_ref(k) - K(z^-1) V(k) - h(k),   h = L(z^-1) phi(k).
// Test-only: it needs the true A and B.

#include "mmsvc/control_law.hpp"

#include <span>

namespace mmsvc {

class OracleController {
public:
    /// Throws invalid_argument when (L B)_0 = B_0 is singular.
    OracleController(const PolyMatrix& a, const PolyMatrix& b, const PolyMatrix& f, int d);

    [[nodiscard]] const DiophantineSolution& diophantine() const noexcept { return sol_; }
    /// Regression parameters theta (N x m) matching RegressorState's layout.
    [[nodiscard]] const Matrix& theta() const noexcept { return theta_; }
    [[nodiscard]] int order() const noexcept { return n_; }
    [[nodiscard]] int delay() const noexcept { return d_; }

    /// h(k) = sum_i L_i phi(k-i) from phi newest first.
    [[nodiscard]] Vector residual_from_disturbance(std::span<const Vector> phi_newest_first) const;

    [[nodiscard]] ControlResult control(const RegressorState& reg, const ControllerDesign& design,
                                        const Vector& h) const;

private:
    DiophantineSolution sol_;
    Matrix theta_;
    int n_;
    int d_;
};

} // namespace mmsvc
