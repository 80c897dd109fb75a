#pragma once

// Discrete MIMO plants A(z^-1) V(k+d) = B(z^-1) E(k) + phi(k) whose regression
// parameters are known exactly. Used to check identifiers and controllers.

#include "mmsvc/plant.hpp"
#include "mmsvc/poly_matrix.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <span>

namespace mmsvc {

/// phi(k) given k, outputs newest first starting at V(k+d-1), and inputs
/// newest first starting at E(k).
using Disturbance =
    std::function<Vector(std::int64_t k, std::span<const Vector> outputs, std::span<const Vector> inputs)>;

class LinearOraclePlant final : public Plant {
public:
    LinearOraclePlant(PolyMatrix a, PolyMatrix b, int d, Disturbance phi = {}, Vector initial_output = {});

    [[nodiscard]] Index channels() const override { return a_.dim(); }
    void advance(const Vector& e_star) override;
    [[nodiscard]] Vector output() const override { return outputs_.front(); }
    [[nodiscard]] std::unique_ptr<Plant> clone() const override;

    [[nodiscard]] const PolyMatrix& a() const noexcept { return a_; }
    [[nodiscard]] const PolyMatrix& b() const noexcept { return b_; }
    [[nodiscard]] int delay() const noexcept { return d_; }
    [[nodiscard]] std::int64_t time() const noexcept { return t_; }
    /// phi values applied so far, indexed by their k.
    [[nodiscard]] const std::vector<Vector>& disturbance_log() const noexcept { return phi_log_; }

private:
    PolyMatrix a_;
    PolyMatrix b_;
    int d_;
    Disturbance phi_;
    std::int64_t t_ = 0;            // index of the newest output
    std::deque<Vector> outputs_;    // V(t), V(t-1), ...
    std::deque<Vector> inputs_;     // E(t), E(t-1), ... (after advance: E(t-1) first)
    std::vector<Vector> phi_log_;
};

/// Rejects unstable or non-monic A and singular B(0).
[[nodiscard]] std::unique_ptr<LinearOraclePlant> make_linear_oracle_plant(const PolyMatrix& a, const PolyMatrix& b,
                                                                          int d, Disturbance phi = {},
                                                                          Vector initial_output = {});

/// Exact regression parameters theta (N x m, N = m(2n+d-1)) of the plant for
/// design F: theta^T X(k) = K(z^-1) V(k) + (LB)(z^-1) E(k), n = deg A.
[[nodiscard]] Matrix regression_parameters(const PolyMatrix& a, const PolyMatrix& b, const PolyMatrix& f, int d);

} // namespace mmsvc
