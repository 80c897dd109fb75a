#include "mmsvc/control_law.hpp"

#include "mmsvc/error.hpp"

#include <algorithm>

namespace mmsvc {

ControllerDesign ControllerDesign::make(PolyMatrix f, Vector v_ref, Matrix r, double e_min, double e_max) {
    ControllerDesign d;
    d.F = std::move(f);
    d.R = r.size() == 0 ? d.F.at_one() : std::move(r);
    d.v_ref = std::move(v_ref);
    d.e_min = e_min;
    d.e_max = e_max;
    d.validate();
    return d;
}

void ControllerDesign::validate() const {
    const Index m = F.dim();
    if (m < 1) fail(ErrorCategory::config, "design polynomial F is empty");
    if (!F.is_diagonal()) fail(ErrorCategory::config, "F must be diagonal");
    if (!F.is_stable()) fail(ErrorCategory::config, "F must be stable");
    if (R.rows() != m || R.cols() != m) fail(ErrorCategory::config, "R must be m x m");
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            if (i != j && R(i, j) != 0.0) fail(ErrorCategory::config, "R must be diagonal");
    if (v_ref.size() != m) fail(ErrorCategory::config, "V_ref must have one entry per channel");
    if (!(e_max > e_min)) fail(ErrorCategory::config, "actuator limits must satisfy e_min < e_max");
}

ControlResult solve_for_input(const Matrix& theta, const RegressorState& reg, const Vector& target, double e_min,
                              double e_max) {
    const Index m = reg.channels();
    if (theta.rows() != reg.length() || theta.cols() != m || target.size() != m) {
        fail(ErrorCategory::invalid_argument, "control solve: dimension mismatch");
    }
    const Vector x0 = reg.assemble(Vector::Zero(m));
    const Vector rhs = target - theta.transpose() * x0;
    const Matrix lead = theta.block(reg.order() * m, 0, m, m).transpose();
    Eigen::FullPivLU<Matrix> lu(lead);
    ControlResult out;
    out.unclamped = lu.solve(rhs);
    out.residual = (lead * out.unclamped - rhs).norm() / std::max(1.0, rhs.norm());
    if (!out.unclamped.allFinite() || !(out.residual <= 1e-9)) {
        fail(ErrorCategory::ill_conditioned, "ill-conditioned controller solve");
    }
    out.e_star = out.unclamped.cwiseMax(e_min).cwiseMin(e_max);
    out.clamped = (out.e_star.array() != out.unclamped.array()).any();
    return out;
}

ControlResult linear_control(const Matrix& theta, const RegressorState& reg, const ControllerDesign& design) {
    return solve_for_input(theta, reg, design.R * design.v_ref, design.e_min, design.e_max);
}

ControlResult nonlinear_control(const Matrix& theta, const Vector& h_hat, const RegressorState& reg,
                                const ControllerDesign& design) {
    if (h_hat.size() != design.channels()) {
        fail(ErrorCategory::invalid_argument, "residual estimate has wrong size");
    }
    return solve_for_input(theta, reg, design.R * design.v_ref - h_hat, design.e_min, design.e_max);
}

} // namespace mmsvc
