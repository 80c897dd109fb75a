#pragma once

// One-hidden-layer tanh network with biases on both layers:
//   y = W_out [tanh(W_hid [s x; 1]); 1]
// trained online by plain gradient steps on 1/2 |target - y|^2, each weight
// matrix projected back onto the Frobenius ball of radius w_max.

#include "mmsvc/types.hpp"

namespace mmsvc {

struct NeuralSettings {
    int hidden = 20;
    double learn_rate = 1e-3;
    double w_max = 100.0;
    double input_scale = 1.0 / 300.0;  ///< applied to x before the hidden layer
    double init_scale = 0.5;           ///< W_hid ~ U(-a, a) / sqrt(inputs + 1); W_out starts at zero

    void validate() const;
};

struct NetworkGradient {
    Matrix hidden;  ///< d loss / d W_hid
    Matrix output;  ///< d loss / d W_out
};

struct TrainReport {
    bool skipped = false;   ///< non-finite gradient, weights untouched
    bool projected = false;
    double loss_before = 0.0;
};

class NeuralNetwork {
public:
    NeuralNetwork(Index inputs, Index outputs, NeuralSettings settings, Rng& rng);
    NeuralNetwork(Matrix w_hidden, Matrix w_output, NeuralSettings settings);

    [[nodiscard]] Index inputs() const noexcept { return w_hid_.cols() - 1; }
    [[nodiscard]] Index outputs() const noexcept { return w_out_.rows(); }
    [[nodiscard]] Index hidden() const noexcept { return w_hid_.rows(); }
    [[nodiscard]] const NeuralSettings& settings() const noexcept { return settings_; }

    [[nodiscard]] Vector forward(const Vector& x) const;
    [[nodiscard]] double loss(const Vector& x, const Vector& target) const;
    [[nodiscard]] NetworkGradient gradient(const Vector& x, const Vector& target) const;
    TrainReport train_step(const Vector& x, const Vector& target);

    [[nodiscard]] const Matrix& w_hidden() const noexcept { return w_hid_; }
    [[nodiscard]] const Matrix& w_output() const noexcept { return w_out_; }
    void set_weights(Matrix w_hidden, Matrix w_output);
    /// sqrt(|W_hid|_F^2 + |W_out|_F^2)
    [[nodiscard]] double weight_norm() const;

private:
    [[nodiscard]] Vector augmented_input(const Vector& x) const;

    NeuralSettings settings_;
    Matrix w_hid_;  // H x (inputs + 1)
    Matrix w_out_;  // outputs x (H + 1)
};

} // namespace mmsvc
