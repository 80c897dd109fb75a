#include "mmsvc/oracle_controller.hpp"

#include "mmsvc/error.hpp"
#include "mmsvc/linear_plant.hpp"

namespace mmsvc {

OracleController::OracleController(const PolyMatrix& a, const PolyMatrix& b, const PolyMatrix& f, int d)
    : sol_(solve_diophantine(a, f, d)), theta_(regression_parameters(a, b, f, d)), n_(a.degree()), d_(d) {
    const Matrix lead = (sol_.L * b)[0];
    Eigen::FullPivLU<Matrix> lu(lead);
    if (!lu.isInvertible()) {
        fail(ErrorCategory::invalid_argument, "oracle controller: (L B)_0 is singular");
    }
}

Vector OracleController::residual_from_disturbance(std::span<const Vector> phi_newest_first) const {
    return apply_recent(sol_.L, phi_newest_first);
}

ControlResult OracleController::control(const RegressorState& reg, const ControllerDesign& design,
                                        const Vector& h) const {
    if (reg.order() != n_ || reg.delay() != d_) {
        fail(ErrorCategory::invalid_argument, "oracle controller: regressor order/delay mismatch");
    }
    return solve_for_input(theta_, reg, design.R * design.v_ref - h, design.e_min, design.e_max);
}

} // namespace mmsvc
