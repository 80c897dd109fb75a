#pragma once

// Certainty-equivalence control: pick E(k) so that theta^T X(k) hits the
// filtered reference R V_ref(k) (minus the estimated residual for the
// nonlinear law). Only (LB)_0 multiplies the unknown E(k).

#include "mmsvc/poly_matrix.hpp"
#include "mmsvc/regressor.hpp"

namespace mmsvc {

struct ControllerDesign {
    PolyMatrix F;
    Matrix R;
    Vector v_ref;
    double e_min = 0.0;
    double e_max = 600.0;

    /// F stable and diagonal; R defaults to F(1).
    [[nodiscard]] static ControllerDesign make(PolyMatrix f, Vector v_ref, Matrix r = {}, double e_min = 0.0,
                                               double e_max = 600.0);
    void validate() const;
    [[nodiscard]] Index channels() const noexcept { return F.dim(); }
};

struct ControlResult {
    Vector e_star;      ///< clamped, applied input
    Vector unclamped;   ///< exact solution of the block equation
    bool clamped = false;
    double residual = 0.0;  ///< |LB_0 e - rhs| / max(1, |rhs|)
};

/// Solves leading(theta) E = target - theta^T X(k)|_{E(k)=0}. Throws
/// ill_conditioned when the solve residual exceeds 1e-9 (relative).
[[nodiscard]] ControlResult solve_for_input(const Matrix& theta, const RegressorState& reg, const Vector& target,
                                            double e_min, double e_max);

[[nodiscard]] ControlResult linear_control(const Matrix& theta, const RegressorState& reg,
                                           const ControllerDesign& design);

/// Same solve with R V_ref replaced by R V_ref - h_hat.
[[nodiscard]] ControlResult nonlinear_control(const Matrix& theta, const Vector& h_hat, const RegressorState& reg,
                                              const ControllerDesign& design);

} // namespace mmsvc
