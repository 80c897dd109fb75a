#include "mmsvc/neural_network.hpp"

#include "mmsvc/error.hpp"

#include <cmath>

namespace mmsvc {

namespace {

bool clip_to_ball(Matrix& w, double radius) {
    const double norm = w.norm();
    if (norm > radius) {
        w *= radius / norm;
        return true;
    }
    return false;
}

} // namespace

void NeuralSettings::validate() const {
    if (hidden < 1) fail(ErrorCategory::config, "hidden width must be >= 1");
    if (!(learn_rate >= 0.0) || !std::isfinite(learn_rate)) fail(ErrorCategory::config, "learn_rate must be >= 0");
    if (!(w_max > 0.0)) fail(ErrorCategory::config, "w_max must be > 0");
    if (!(input_scale > 0.0) || !std::isfinite(input_scale)) fail(ErrorCategory::config, "input_scale must be > 0");
    if (!(init_scale >= 0.0)) fail(ErrorCategory::config, "init_scale must be >= 0");
}

NeuralNetwork::NeuralNetwork(Index inputs, Index outputs, NeuralSettings settings, Rng& rng)
    : settings_(settings) {
    settings_.validate();
    if (inputs < 1 || outputs < 1) {
        fail(ErrorCategory::invalid_argument, "network needs at least one input and output");
    }
    const double a = settings_.init_scale / std::sqrt(static_cast<double>(inputs + 1));
    w_hid_ = rng.uniform_matrix(settings_.hidden, inputs + 1, -a, a);
    w_out_ = Matrix::Zero(outputs, settings_.hidden + 1);
    clip_to_ball(w_hid_, settings_.w_max);
}

NeuralNetwork::NeuralNetwork(Matrix w_hidden, Matrix w_output, NeuralSettings settings) : settings_(settings) {
    settings_.validate();
    set_weights(std::move(w_hidden), std::move(w_output));
    settings_.hidden = static_cast<int>(w_hid_.rows());
}

void NeuralNetwork::set_weights(Matrix w_hidden, Matrix w_output) {
    if (w_hidden.rows() < 1 || w_hidden.cols() < 2 || w_output.cols() != w_hidden.rows() + 1) {
        fail(ErrorCategory::invalid_argument, "network weight shapes are inconsistent");
    }
    w_hid_ = std::move(w_hidden);
    w_out_ = std::move(w_output);
}

Vector NeuralNetwork::augmented_input(const Vector& x) const {
    if (x.size() != inputs()) {
        fail(ErrorCategory::invalid_argument, "network input has wrong size");
    }
    Vector xa(x.size() + 1);
    xa.head(x.size()) = settings_.input_scale * x;
    xa(x.size()) = 1.0;
    return xa;
}

Vector NeuralNetwork::forward(const Vector& x) const {
    const Vector xa = augmented_input(x);
    Vector ha(hidden() + 1);
    ha.head(hidden()) = (w_hid_ * xa).array().tanh().matrix();
    ha(hidden()) = 1.0;
    return w_out_ * ha;
}

double NeuralNetwork::loss(const Vector& x, const Vector& target) const {
    return 0.5 * (target - forward(x)).squaredNorm();
}

NetworkGradient NeuralNetwork::gradient(const Vector& x, const Vector& target) const {
    if (target.size() != outputs()) {
        fail(ErrorCategory::invalid_argument, "network target has wrong size");
    }
    const Vector xa = augmented_input(x);
    const Vector a = (w_hid_ * xa).array().tanh().matrix();
    Vector ha(hidden() + 1);
    ha.head(hidden()) = a;
    ha(hidden()) = 1.0;
    const Vector r = w_out_ * ha - target;  // d loss / d y
    NetworkGradient g;
    g.output = r * ha.transpose();
    const Vector back = (w_out_.leftCols(hidden()).transpose() * r).array() * (1.0 - a.array().square());
    g.hidden = back * xa.transpose();
    return g;
}

TrainReport NeuralNetwork::train_step(const Vector& x, const Vector& target) {
    TrainReport report;
    report.loss_before = loss(x, target);
    const NetworkGradient g = gradient(x, target);
    if (!g.hidden.allFinite() || !g.output.allFinite()) {
        report.skipped = true;
        return report;
    }
    w_hid_ -= settings_.learn_rate * g.hidden;
    w_out_ -= settings_.learn_rate * g.output;
    const bool ph = clip_to_ball(w_hid_, settings_.w_max);
    const bool po = clip_to_ball(w_out_, settings_.w_max);
    report.projected = ph || po;
    return report;
}

double NeuralNetwork::weight_norm() const {
    return std::sqrt(w_hid_.squaredNorm() + w_out_.squaredNorm());
}

} // namespace mmsvc
