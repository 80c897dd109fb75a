#pragma once

// Reduced microgrid: per-DER first-order voltage response behind the droop,
// filtered powers, and loads/couplings that draw power quadratically in the
// voltage magnitudes. Same (E*, V_o) interface as the full model.

#include "mmsvc/microgrid.hpp"
#include "mmsvc/plant.hpp"

#include <vector>

namespace mmsvc {

struct SurrogateLoad {
    std::size_t der = 0;   ///< DER whose terminal the load hangs on
    double R = 20.0;       ///< Ohm
    double X = 5.655;      ///< Ohm, at nominal frequency

    [[nodiscard]] double conductance() const { return R / (R * R + X * X); }
    [[nodiscard]] double susceptance() const { return X / (R * R + X * X); }
};

struct SurrogateParams {
    double tau_v = 5e-3;      ///< closed inner-loop voltage time constant (s)
    double omega_c = 31.41;   ///< power filter cutoff (rad/s)
    std::vector<double> D_Q;  ///< per-DER droop gain (V/Var)
    Matrix coupling_g;        ///< symmetric DER-to-DER conductance, zero diagonal (S)
    Matrix coupling_b;        ///< symmetric DER-to-DER susceptance, zero diagonal (S)
    std::vector<SurrogateLoad> loads;

    /// Collapses a full microgrid description: each load sits on the DER of its
    /// bus, and DER pairs joined by a line couple through r_c + line + r_c.
    [[nodiscard]] static SurrogateParams from_microgrid(const MicrogridParams& grid);
    [[nodiscard]] static SurrogateParams reference_system();

    [[nodiscard]] std::size_t der_count() const noexcept { return D_Q.size(); }
    void validate() const;

    /// Steady-state reactive and active power drawn at each DER for voltages v.
    [[nodiscard]] Vector reactive_demand(const Vector& v) const;
    [[nodiscard]] Vector active_demand(const Vector& v) const;
};

/// States: [v_1..v_m, Q_1..Q_m, P_1..P_m].
class SurrogatePlant final : public Plant {
public:
    SurrogatePlant(SurrogateParams params, double dt_primary, long steps_per_sample);

    [[nodiscard]] Index channels() const override { return static_cast<Index>(params_.der_count()); }
    void advance(const Vector& e_star) override;
    [[nodiscard]] Vector output() const override;
    [[nodiscard]] PowerReadout powers() const override;
    void apply_load_step(std::size_t load_index, double factor) override;
    [[nodiscard]] std::unique_ptr<Plant> clone() const override;

    [[nodiscard]] const SurrogateParams& params() const noexcept { return params_; }
    [[nodiscard]] const Vector& state() const noexcept { return x_; }
    void set_state(const Vector& x);
    void derivative(const Vector& x, const Vector& e_star, Vector& dx) const;

private:
    SurrogateParams params_;
    Vector x_;
    double dt_;
    long steps_per_sample_;
    Vector k1_, k2_, k3_, k4_, tmp_;
};

} // namespace mmsvc
