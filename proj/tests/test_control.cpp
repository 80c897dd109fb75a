#include "mmsvc/control_law.hpp"
#include "mmsvc/error.hpp"
#include "mmsvc/linear_plant.hpp"
#include "mmsvc/oracle_controller.hpp"
#include "mmsvc/svc_loop.hpp"
#include "mmsvc/switching.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mmsvc;

namespace {

ControllerDesign scalar_design(Index m, double v_ref, double lo = 0.0, double hi = 600.0) {
    const std::vector<double> fc{1.0, -0.2};
    return ControllerDesign::make(PolyMatrix::scalar(fc, m), Vector::Constant(m, v_ref), {}, lo, hi);
}

RegressorState hand_regressor() {
    RegressorState reg(1, 2, 1);
    reg.push_output(Vector::Constant(1, 300.0));
    reg.push_input(Vector::Zero(1));
    reg.push_output(Vector::Constant(1, 300.0));
    return reg;
}

Matrix hand_theta() {
    Matrix theta(4, 1);
    theta << 0.3, -0.06, 1.0, 0.0;  // K0, K1, LB0, LB1
    return theta;
}

} // namespace

TEST(ControlDesign, DefaultsAndValidation) {
    const auto d = scalar_design(3, 300.0);
    EXPECT_TRUE(d.R.isApprox(0.8 * Matrix::Identity(3, 3)));
    const std::vector<double> unstable{1.0, -1.5};
    EXPECT_THROW((void)ControllerDesign::make(PolyMatrix::scalar(unstable, 2), Vector::Zero(2)), Error);
    std::vector<Matrix> coupled{Matrix::Identity(2, 2), (Matrix(2, 2) << -0.2, 0.1, 0.0, -0.2).finished()};
    EXPECT_THROW((void)ControllerDesign::make(PolyMatrix(coupled), Vector::Zero(2)), Error);
    EXPECT_THROW((void)ControllerDesign::make(PolyMatrix::identity(2), Vector::Zero(2), Matrix::Ones(2, 2)), Error);
}

TEST(LinearControl, HandSubstitution) {
    const auto res = linear_control(hand_theta(), hand_regressor(), scalar_design(1, 300.0));
    EXPECT_NEAR(res.e_star(0), 168.0, 1e-12);
    EXPECT_FALSE(res.clamped);
}

TEST(LinearControl, ZeroReferenceZeroHistory) {
    RegressorState reg(2, 2, 1);
    reg.push_output(Vector::Zero(2));
    reg.push_input(Vector::Zero(2));
    reg.push_output(Vector::Zero(2));
    Rng rng(1);
    Matrix theta = rng.uniform_matrix(reg.length(), 2, -1, 1);
    theta.block(4, 0, 2, 2) = Matrix::Identity(2, 2);
    const auto res = linear_control(theta, reg, scalar_design(2, 0.0, -10, 10));
    EXPECT_EQ(res.e_star, Vector::Zero(2));
}

TEST(LinearControl, SolvesTheRegressionEquation) {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        RegressorState reg(2, 2, 2);
        for (int k = 0; k < 4; ++k) {
            reg.push_output(rng.uniform_vector(2, 290, 310));
            if (k < 3) reg.push_input(rng.uniform_vector(2, 290, 310));
        }
        Matrix theta = rng.uniform_matrix(reg.length(), 2, -0.3, 0.3);
        theta.block(4, 0, 2, 2) += Matrix::Identity(2, 2);
        const auto design = scalar_design(2, 300.0, -1e9, 1e9);
        const auto res = linear_control(theta, reg, design);
        const Vector achieved = theta.transpose() * reg.assemble(res.e_star);
        EXPECT_LE((achieved - design.R * design.v_ref).norm(), 1e-9);
    }
}

TEST(LinearControl, ClampReported) {
    const auto res = linear_control(hand_theta(), hand_regressor(), scalar_design(1, 300.0, 0.0, 100.0));
    EXPECT_TRUE(res.clamped);
    EXPECT_EQ(res.e_star(0), 100.0);
    EXPECT_NEAR(res.unclamped(0), 168.0, 1e-12);
}

TEST(LinearControl, SingularBlockIsIllConditioned) {
    RegressorState reg(2, 1, 1);
    reg.push_output(Vector::Ones(2));
    Matrix theta = Matrix::Zero(4, 2);
    theta(2, 0) = 1.0;  // LB0 = diag(1, 0)
    try {
        (void)linear_control(theta, reg, scalar_design(2, 300.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::ill_conditioned);
    }
}

TEST(NonlinearControl, ZeroResidualMatchesLinear) {
    const auto a = linear_control(hand_theta(), hand_regressor(), scalar_design(1, 300.0));
    const auto b = nonlinear_control(hand_theta(), Vector::Zero(1), hand_regressor(), scalar_design(1, 300.0));
    EXPECT_EQ(a.e_star, b.e_star);
}

TEST(NonlinearControl, ConstantResidualShiftsInput) {
    Matrix theta = hand_theta();
    theta(2, 0) = 2.0;
    const auto a = nonlinear_control(theta, Vector::Zero(1), hand_regressor(), scalar_design(1, 300.0));
    const auto b = nonlinear_control(theta, Vector::Constant(1, 5.0), hand_regressor(), scalar_design(1, 300.0));
    EXPECT_NEAR(b.e_star(0) - a.e_star(0), -2.5, 1e-12);
}

TEST(Switching, TiesGoToLinear) {
    SwitchState sw(SwitchSettings{0.1, 1.0, 10});
    Rng rng(3);
    for (int k = 0; k < 30; ++k) {
        const Vector e = rng.uniform_vector(2, -1, 1);
        EXPECT_EQ(sw.update(e, e, rng.uniform_vector(4, -1, 1)), ControllerId::linear);
    }
    EXPECT_EQ(sw.switches(), 0);
}

TEST(Switching, PerfectNonlinearWinsImmediately) {
    SwitchState sw(SwitchSettings{0.1, 1.0, 10});
    EXPECT_EQ(sw.update(Vector::Constant(2, 5.0), Vector::Zero(2), Vector::Ones(4)), ControllerId::nonlinear);
}

TEST(Switching, MatchesHandEvaluation) {
    const std::vector<double> el{1.0, 0.15, 0.05, 0.5, 0.19, 0.0, 2.0, 0.1};
    const std::vector<double> en{0.3, 0.1, 0.9, 0.02, 0.25, 0.18, 0.0, 0.3};
    std::vector<double> xn2;
    std::vector<Vector> xs;
    Rng rng(2);
    for (std::size_t k = 0; k < el.size(); ++k) {
        xs.push_back(rng.uniform_vector(3, -2, 2));
        xn2.push_back(xs.back().squaredNorm());
    }
    const auto want = oracle::hand_switch(el, en, xn2, 0.1, 1.0, 2);
    SwitchState sw(SwitchSettings{0.1, 1.0, 2});
    for (std::size_t k = 0; k < el.size(); ++k) {
        const auto got = sw.update(Vector::Constant(1, el[k]), Vector::Constant(1, en[k]), xs[k]);
        EXPECT_NEAR(sw.xi_linear(), want.xi_l[k], 1e-15) << k;
        EXPECT_NEAR(sw.xi_nonlinear(), want.xi_n[k], 1e-15) << k;
        EXPECT_EQ(got == ControllerId::linear ? 0 : 1, want.active[k]) << k;
    }
}

TEST(Switching, IncrementSignAndReplay) {
    Rng rng(4);
    std::vector<std::tuple<Vector, Vector, Vector>> log;
    SwitchState a(SwitchSettings{0.2, 0.5, 5});
    std::vector<ControllerId> first;
    for (int k = 0; k < 200; ++k) {
        const Vector el = rng.uniform_vector(2, -1, 1), en = rng.uniform_vector(2, -1, 1), x = rng.uniform_vector(3, -1, 1);
        const double inc = SwitchState::increment(el, x, 0.2);
        EXPECT_GE(inc, 0.0);
        if (el.norm() <= 0.4) {
            EXPECT_EQ(inc, 0.0);
        }
        log.emplace_back(el, en, x);
        first.push_back(a.update(el, en, x));
    }
    SwitchState b(SwitchSettings{0.2, 0.5, 5});
    for (std::size_t k = 0; k < log.size(); ++k) {
        EXPECT_EQ(b.update(std::get<0>(log[k]), std::get<1>(log[k]), std::get<2>(log[k])), first[k]);
    }
    EXPECT_EQ(a.switches(), b.switches());
}

TEST(OracleController, ExactClosedLoopWithoutDisturbance) {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Index m = 2;
        const int n = 2, d = 1 + trial % 2;
        std::vector<Matrix> ac{Matrix::Identity(m, m)}, bc{Matrix::Identity(m, m) + rng.uniform_matrix(m, m, -0.2, 0.2)};
        for (int i = 1; i <= n; ++i) ac.push_back(rng.uniform_matrix(m, m, -0.3, 0.3));
        bc.push_back(rng.uniform_matrix(m, m, -0.2, 0.2));
        const PolyMatrix A(ac), B(bc);
        auto plant = make_linear_oracle_plant(A, B, d);
        const auto design = scalar_design(m, 3.0, -1e6, 1e6);
        auto oc = std::make_shared<const OracleController>(A, B, design.F, d);
        EXPECT_LE((oc->theta() - regression_parameters(A, B, design.F, d)).norm(), 1e-12);

        LoopSettings s;
        s.kind = ControllerKind::oracle;
        s.n = n;
        s.d = d;
        s.design = design;
        s.nominal_input = Vector::Zero(m);
        SvcLoop loop(s, m, 1);
        loop.attach_oracle(oc);
        std::vector<Vector> outs;
        for (int k = 0; k < 60; ++k) {
            outs.push_back(plant->output());
            const auto r = loop.step(k, outs.back(), true);
            plant->advance(r.e_star);
            if (k >= 10) {
                const Vector y = apply(design.F, outs, static_cast<std::size_t>(k));
                EXPECT_LE((y - design.R * design.v_ref).norm(), 1e-9) << "k=" << k;
            }
        }
    }
}

TEST(OracleController, ZeroReferenceZeroState) {
    const std::vector<double> ac{1.0, -0.5}, bc{1.0};
    const auto design = scalar_design(1, 0.0, -10, 10);
    OracleController oc(PolyMatrix::scalar(ac, 1), PolyMatrix::scalar(bc, 1), design.F, 1);
    RegressorState reg(1, 1, 1);
    reg.push_output(Vector::Zero(1));
    EXPECT_EQ(oc.control(reg, design, Vector::Zero(1)).e_star, Vector::Zero(1));
}

TEST(OracleController, SingularLeadingInputRejected) {
    const std::vector<double> ac{1.0, -0.5}, bc{0.0, 1.0};
    const auto design = scalar_design(1, 1.0);
    EXPECT_THROW(OracleController(PolyMatrix::scalar(ac, 1), PolyMatrix::scalar(bc, 1), design.F, 1), Error);
}
