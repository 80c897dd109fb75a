#include "mmsvc/error.hpp"
#include "mmsvc/neural_network.hpp"
#include "mmsvc/nonlinear_estimator.hpp"
#include "mmsvc/parameter_estimator.hpp"
#include "mmsvc/regressor.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mmsvc;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

// Relative error of analytic vs central-difference gradient, worst entry.
double gradient_check(NeuralNetwork& net, const Vector& x, const Vector& target) {
    const auto g = net.gradient(x, target);
    const double h = 1e-6;
    double worst = 0.0;
    auto check = [&](bool hidden_layer) {
        Matrix w = hidden_layer ? net.w_hidden() : net.w_output();
        const Matrix& analytic = hidden_layer ? g.hidden : g.output;
        for (Index i = 0; i < w.rows(); ++i) {
            for (Index j = 0; j < w.cols(); ++j) {
                const double orig = w(i, j);
                w(i, j) = orig + h;
                hidden_layer ? net.set_weights(w, net.w_output()) : net.set_weights(net.w_hidden(), w);
                const double up = net.loss(x, target);
                w(i, j) = orig - h;
                hidden_layer ? net.set_weights(w, net.w_output()) : net.set_weights(net.w_hidden(), w);
                const double down = net.loss(x, target);
                w(i, j) = orig;
                hidden_layer ? net.set_weights(w, net.w_output()) : net.set_weights(net.w_hidden(), w);
                const double fd = (up - down) / (2 * h);
                const double denom = std::max({std::abs(fd), std::abs(analytic(i, j)), 1e-3});
                worst = std::max(worst, std::abs(fd - analytic(i, j)) / denom);
            }
        }
    };
    check(true);
    check(false);
    return worst;
}

} // namespace

TEST(Regressor, LayoutAndLength) {
    RegressorState reg(2, 2, 2);
    EXPECT_EQ(reg.length(), 10);
    EXPECT_FALSE(reg.ready());
    // samples 0..3: V(k) = (k, 10k), E(k) = (100k, 1000k)
    for (int k = 0; k < 4; ++k) {
        reg.push_output(vec({double(k), 10.0 * k}));
        if (k < 3) reg.push_input(vec({100.0 * k, 1000.0 * k}));
    }
    ASSERT_TRUE(reg.ready());
    const Vector x = reg.assemble(vec({-1, -2}));
    const Vector want = vec({3, 30, 2, 20, -1, -2, 200, 2000, 100, 1000});
    EXPECT_EQ(x, want);
    const Vector held = reg.assemble_held();
    EXPECT_EQ(held.segment(4, 2), vec({200, 2000}));
    const Matrix cols = reg.matrix_layout(x);
    EXPECT_EQ(cols.rows(), 2);
    EXPECT_EQ(cols.cols(), 5);
    EXPECT_EQ(cols.col(2), vec({-1, -2}));
}

TEST(Regressor, AssembleBeforeReadyThrows) {
    RegressorState reg(1, 2, 1);
    reg.push_output(vec({1}));
    EXPECT_THROW((void)reg.assemble(vec({0})), Error);
}

TEST(TransformedOutput, Examples) {
    const std::vector<Vector> hist{vec({5, 6}), vec({1, 2})};
    EXPECT_EQ(form_transformed_output(hist, PolyMatrix::identity(2)), hist[0]);
    const std::vector<double> fc{1.0, -0.2};
    const std::vector<Vector> flat(2, Vector::Constant(2, 300.0));
    EXPECT_TRUE(form_transformed_output(flat, PolyMatrix::scalar(fc, 2)).isApprox(Vector::Constant(2, 240.0), 1e-15));
    const std::vector<Vector> short_hist{vec({1, 1})};
    EXPECT_THROW((void)form_transformed_output(short_hist, PolyMatrix::scalar(fc, 2)), Error);
}

TEST(TransformedOutput, MatchesConvolutionOracle) {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        std::vector<Matrix> c;
        for (int i = 0; i < 3; ++i) c.push_back(rng.uniform_matrix(2, 2, -1, 1));
        std::vector<Vector> oldest_first;
        for (int i = 0; i < 3; ++i) oldest_first.push_back(rng.uniform_vector(2, -10, 10));
        const std::vector<Vector> newest_first(oldest_first.rbegin(), oldest_first.rend());
        const Vector got = form_transformed_output(newest_first, PolyMatrix(c));
        EXPECT_LE((got - oracle::direct_apply(c, oldest_first, 2)).norm(), 1e-12);
    }
}

TEST(LinearEstimator, PredictAndError) {
    ParameterEstimator est(2, 2, 1, EstimatorSettings{});
    Matrix zero = Matrix::Zero(est.regressor_length(), 2);
    zero.block(4, 0, 2, 2) = Matrix::Identity(2, 2);
    Rng rng(6);
    const Matrix theta = rng.uniform_matrix(est.regressor_length(), 2, -1, 1);
    est.set_params(theta);
    const Vector x = rng.uniform_vector(est.regressor_length(), -3, 3);
    Vector want(2);
    for (Index c = 0; c < 2; ++c) {
        double acc = 0;
        for (Index r = 0; r < x.size(); ++r) acc += theta(r, c) * x(r);
        want(c) = acc;
    }
    EXPECT_LE((est.predict(x) - want).norm(), 1e-13);
    EXPECT_LE(est.identification_error(want, x).norm(), 1e-13);
    est.set_params(Matrix::Zero(est.regressor_length(), 2));
    EXPECT_EQ(est.predict(x), Vector::Zero(2));
    EXPECT_THROW((void)est.predict(Vector::Zero(3)), Error);
}

TEST(LinearEstimator, ScalarUpdateByHand) {
    EstimatorSettings s;
    s.rho = 0.1;
    s.h_min = 0.05;
    ParameterEstimator est(1, 1, 1, s);
    Matrix theta = Matrix::Zero(2, 1);
    theta(1, 0) = 1.0;  // input gain block, untouched by X below
    est.set_params(theta);
    const auto rep = est.update(vec({1.0}), vec({1.0, 0.0}));
    EXPECT_TRUE(rep.adapted);
    EXPECT_DOUBLE_EQ(est.params()(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(est.params()(1, 0), 1.0);
}

TEST(LinearEstimator, DeadZoneFreezesBitwise) {
    EstimatorSettings s;
    s.rho = 0.5;
    ParameterEstimator est(2, 2, 2, s);
    Rng rng(1);
    Matrix theta = rng.uniform_matrix(est.regressor_length(), 2, -1, 1);
    theta.block(4, 0, 2, 2) = 2.0 * Matrix::Identity(2, 2);
    est.set_params(theta);
    const Matrix before = est.update_base();
    const auto rep = est.update(vec({0.6, -0.7}), rng.uniform_vector(est.regressor_length(), -1, 1));  // |e| < 1
    EXPECT_FALSE(rep.adapted);
    EXPECT_TRUE((est.params().array() == before.array()).all());
}

TEST(LinearEstimator, ProjectionFloorIsExact) {
    EstimatorSettings s;
    s.rho = 0.0;
    s.h_min = 0.2;
    ParameterEstimator est(2, 1, 1, s);
    // push the leading block toward singular
    Vector x = Vector::Zero(4);
    x(2) = 10.0;
    const auto rep = est.update(vec({-12.0, 0.0}), x);
    EXPECT_TRUE(rep.floor_projected);
    EXPECT_NEAR(ParameterEstimator::sigma_min(est.leading_block()), 0.2, 1e-12);
}

TEST(LinearEstimator, BoxProjection) {
    EstimatorSettings s;
    s.rho = 0.0;
    s.theta_bound = 1.5;
    ParameterEstimator est(1, 1, 1, s);
    const auto rep = est.update(vec({100.0}), vec({1.0, 1.0}));
    EXPECT_TRUE(rep.box_clamped);
    EXPECT_LE(est.params().cwiseAbs().maxCoeff(), 1.5);
}

TEST(LinearEstimator, UpdateStepIsBounded) {
    EstimatorSettings s;
    s.rho = 0.01;
    s.h_min = 1e-6;
    s.theta_bound = 1e9;
    Rng rng(44);
    for (int t = 0; t < 200; ++t) {
        ParameterEstimator est(2, 2, 1, s);
        const Vector x = rng.uniform_vector(est.regressor_length(), -5, 5);
        const Vector e = rng.uniform_vector(2, -3, 3);
        const Matrix before = est.update_base();
        const auto rep = est.update(e, x);
        if (rep.floor_projected) continue;
        const double step = (est.params() - before).norm();
        EXPECT_LE(step, x.norm() * e.norm() / (1 + x.squaredNorm()) * (1 + 1e-12));
        EXPECT_LE(step, e.norm() / 2 * (1 + 1e-12));
    }
}

TEST(LinearEstimator, LagDHistory) {
    EstimatorSettings s;
    s.rho = 0.0;
    ParameterEstimator est(1, 1, 2, s);  // N = 3
    const Matrix t0 = est.params();
    est.update(vec({1.0}), vec({1.0, 0.0, 0.0}));  // theta(1) from theta(-1) = t0
    const Matrix t1 = est.params();
    EXPECT_EQ(est.update_base(), t0);  // theta(0) is next in line
    est.update(vec({1.0}), vec({1.0, 0.0, 0.0}));  // theta(2) from theta(0) = t0
    EXPECT_DOUBLE_EQ(est.params()(0, 0), 0.5);
    EXPECT_EQ(est.update_base(), t1);
    est.hold();
    EXPECT_EQ(est.params(), est.lagged(1));
}

TEST(Neural, ZeroWeightsGiveZero) {
    NeuralSettings s;
    NeuralNetwork net(Matrix::Zero(5, 4), Matrix::Zero(2, 6), s);
    EXPECT_EQ(net.forward(vec({1, 2, 3})), Vector::Zero(2));
    Rng rng(3);
    NeuralNetwork fresh(3, 2, s, rng);  // output layer starts at zero
    EXPECT_EQ(fresh.forward(vec({300, 1, -5})), Vector::Zero(2));
}

TEST(Neural, ForwardMatchesTwoLoopOracle) {
    NeuralSettings s;
    s.input_scale = 0.1;
    Rng rng(12);
    for (int t = 0; t < 50; ++t) {
        const Matrix wh = rng.uniform_matrix(7, 5, -1, 1), wo = rng.uniform_matrix(3, 8, -1, 1);
        NeuralNetwork net(wh, wo, s);
        const Vector x = rng.uniform_vector(4, -20, 20);
        EXPECT_LE((net.forward(x) - oracle::forward(wh, wo, x, 0.1)).norm(), 1e-12);
    }
}

TEST(Neural, GradientMatchesFiniteDifferences) {
    NeuralSettings s;
    s.input_scale = 0.5;
    Rng rng(100);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        NeuralNetwork net(rng.uniform_matrix(6, 4, -1, 1), rng.uniform_matrix(2, 7, -1, 1), s);
        worst = std::max(worst, gradient_check(net, rng.uniform_vector(3, -2, 2), rng.uniform_vector(2, -1, 1)));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(Neural, SingleNeuronGradient) {
    NeuralSettings s;
    s.input_scale = 1.0;
    NeuralNetwork net((Matrix(1, 2) << 0.7, -0.1).finished(), (Matrix(1, 2) << 1.3, 0.2).finished(), s);
    EXPECT_LT(gradient_check(net, vec({0.4}), vec({0.9})), 1e-5);
}

TEST(Neural, TargetEqualsOutputLeavesWeights) {
    NeuralSettings s;
    Rng rng(5);
    NeuralNetwork net(rng.uniform_matrix(4, 3, -1, 1), rng.uniform_matrix(2, 5, -1, 1), s);
    const Vector x = vec({100, -50});
    const Matrix wh = net.w_hidden(), wo = net.w_output();
    net.train_step(x, net.forward(x));
    EXPECT_EQ(net.w_hidden(), wh);
    EXPECT_EQ(net.w_output(), wo);
}

TEST(Neural, NormProjectionAndSkip) {
    NeuralSettings s;
    s.learn_rate = 50.0;
    s.w_max = 2.0;
    Rng rng(5);
    NeuralNetwork net(3, 2, s, rng);
    for (int t = 0; t < 50; ++t) {
        net.train_step(rng.uniform_vector(3, -300, 300), rng.uniform_vector(2, -100, 100));
        EXPECT_LE(net.w_hidden().norm(), 2.0 * (1 + 1e-12));
        EXPECT_LE(net.w_output().norm(), 2.0 * (1 + 1e-12));
    }
    const Matrix wh = net.w_hidden();
    const auto rep = net.train_step(vec({1, 2, 3}), vec({std::nan(""), 0.0}));
    EXPECT_TRUE(rep.skipped);
    EXPECT_EQ(net.w_hidden(), wh);
}

TEST(NonlinearEstimator, ReducesToLinearWithZeroNetwork) {
    Rng rng(8);
    EstimatorSettings es;
    NonlinearEstimator nl(2, 2, 1, es, NeuralSettings{}, rng);
    ParameterEstimator lin(2, 2, 1, es);
    const Matrix theta = rng.uniform_matrix(lin.regressor_length(), 2, -1, 1);
    lin.set_params(theta);
    nl.parameters().set_params(theta);
    const Vector x = rng.uniform_vector(lin.regressor_length(), -1, 1);
    const Vector y = rng.uniform_vector(2, -1, 1);
    const Vector h = nl.estimate_residual(x);
    EXPECT_EQ(h, Vector::Zero(2));
    EXPECT_EQ(nl.identification_error(y, x, h), lin.identification_error(y, x));
}

TEST(NonlinearEstimator, PerfectResidualGivesZeroError) {
    Rng rng(9);
    NonlinearEstimator nl(1, 1, 1, EstimatorSettings{}, NeuralSettings{}, rng);
    const Vector x = vec({0.3, 2.0});
    const Vector h = vec({0.25});
    const Vector y = nl.parameters().params().transpose() * x + h;
    EXPECT_LE(nl.identification_error(y, x, h).norm(), 1e-15);
    EXPECT_LE((nl.residual_target(y, x) - h).norm(), 1e-15);
}

TEST(NonlinearEstimator, LearnsConstantResidual) {
    // Network alone (theta frozen by a wide dead zone) fits a constant offset.
    Rng rng(10);
    EstimatorSettings es;
    es.rho = 100.0;
    NeuralSettings ns;
    ns.learn_rate = 0.05;
    ns.input_scale = 1.0;
    NonlinearEstimator nl(1, 1, 1, es, ns, rng);
    const Vector h = vec({0.8});
    double first = 0, last = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vector x = rng.uniform_vector(2, -1, 1);
        const Vector y = nl.parameters().update_base().transpose() * x + h;
        const Vector hc = nl.estimate_residual(x);
        const Vector e = nl.identification_error(y, x, hc);
        if (k == 0) first = e.norm();
        last = e.norm();
        nl.update(e, y, x, x);
    }
    EXPECT_LT(last, 0.05 * first);
}
