#pragma once

// Islanded microgrid of droop-controlled voltage-source inverters feeding an
// inductive network. Each DER carries 15 states in its own dq frame; branch
// currents of lines and loads are held in the common frame (DER 1's frame).
// The model equations are written out in docs/plant_model.md.

#include "mmsvc/plant.hpp"
#include "mmsvc/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace mmsvc {

struct DerParams {
    double L_f = 3.9e-3;      ///< filter inductance (H)
    double r_f = 0.50;        ///< filter resistance (Ohm)
    double C_f = 16e-6;       ///< filter capacitance (F)
    double L_c = 0.5e-3;      ///< coupling inductance (H)
    double r_c = 0.09;        ///< coupling resistance (Ohm)
    double R_d = 2.05;        ///< damping resistance in series with C_f (Ohm)
    double D_Q = 1e-3;        ///< voltage droop gain (V/Var)
    double m_P = 9.4e-5;      ///< frequency droop gain (rad/s/W)
    double K_PV = 0.5;
    double K_IV = 52.0;
    double K_PC = 4.5;
    double K_IC = 450.0;
    double omega_c = 31.41;   ///< power low-pass cutoff (rad/s)
    double F_ff = 0.75;       ///< output-current feedforward gain
    double pll_omega_c = 500.0;  ///< q-axis voltage filter cutoff (rad/s)
    double K_P_PLL = 0.25;
    double K_I_PLL = 2.0;

    void validate() const;
};

struct LineParams {
    int from = 0;
    int to = 1;
    double R = 0.15;  ///< Ohm
    double L = 0.42e-3;  ///< H
};

struct LoadParams {
    int bus = 0;
    double R = 20.0;  ///< Ohm
    double L = 15e-3;  ///< H
};

struct NetworkParams {
    int buses = 4;
    std::vector<LineParams> lines;
    std::vector<LoadParams> loads;
    std::vector<int> der_bus;  ///< bus each DER couples into

    /// Throws config on dangling references or a disconnected topology.
    void validate(std::size_t der_count) const;
};

struct MicrogridParams {
    std::vector<DerParams> ders;
    NetworkParams network;
    double omega_n = 2.0 * 3.14159265358979323846 * 60.0;  ///< nominal frequency (rad/s)

    /// Four DERs on a 4-bus ladder with two RL loads, inner-loop gains and
    /// filter, droop, line and load values of the default 4-DER test system.
    [[nodiscard]] static MicrogridParams reference_system();

    void validate() const;
};

/// Indices into a DER's 15-element state block.
enum DerState : int {
    kP = 0,
    kQ,
    kVoqFiltered,
    kPhiPll,
    kDelta,
    kPhiD,
    kPhiQ,
    kGammaD,
    kGammaQ,
    kIld,
    kIlq,
    kIod,
    kIoq,
    kVod,
    kVoq,
    kDerStateCount
};

struct MicrogridState {
    std::size_t der_count = 0;
    std::size_t line_count = 0;
    std::size_t load_count = 0;
    std::vector<double> x;  ///< [DER blocks | line (d,q) | load (d,q)]

    [[nodiscard]] static MicrogridState zero(const MicrogridParams& params);
    [[nodiscard]] static std::size_t size_for(std::size_t ders, std::size_t lines, std::size_t loads) {
        return kDerStateCount * ders + 2 * (lines + loads);
    }

    [[nodiscard]] double der(std::size_t i, DerState s) const { return x[i * kDerStateCount + s]; }
    double& der(std::size_t i, DerState s) { return x[i * kDerStateCount + s]; }
    [[nodiscard]] std::size_t line_offset(std::size_t l) const { return kDerStateCount * der_count + 2 * l; }
    [[nodiscard]] std::size_t load_offset(std::size_t l) const {
        return kDerStateCount * der_count + 2 * (line_count + l);
    }
};

/// Right-hand side of the microgrid ODE with the network bus voltages
/// eliminated algebraically (inductive branches at every bus).
class MicrogridModel {
public:
    explicit MicrogridModel(MicrogridParams params);

    [[nodiscard]] const MicrogridParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t der_count() const noexcept { return params_.ders.size(); }
    [[nodiscard]] std::size_t state_size() const noexcept { return state_size_; }

    void derivative(std::span<const double> x, const Vector& e_star, std::span<double> dx) const;

    /// Bus voltages (d,q) in the common frame for state x.
    [[nodiscard]] std::vector<std::array<double, 2>> bus_voltages(std::span<const double> x) const;

    /// Scales R and L of one load; the bus solve is refactored.
    void scale_load(std::size_t load_index, double factor);

private:
    struct Branch {
        // node encoding: >= 0 bus index, -1 ground, <= -2 DER terminal (-2 - der)
        int from;
        int to;
        double R;
        double L;
    };

    void rebuild_network();
    void solve_buses(std::span<const double> x, std::span<double> bus_d, std::span<double> bus_q) const;

    MicrogridParams params_;
    std::size_t state_size_ = 0;
    std::vector<Branch> branches_;  ///< DER couplings, then lines, then loads
    Matrix bus_solve_;              ///< inverse of the KCL-derivative matrix
};

/// One fixed RK4 step of length dt with E* held. Throws plant_diverged on a
/// non-finite result.
[[nodiscard]] MicrogridState step_primary(const MicrogridModel& model, const MicrogridState& state,
                                          const Vector& e_star, double dt);

/// v_oi = sqrt(v_odi^2 + v_oqi^2) per DER.
[[nodiscard]] Vector measure_output(const MicrogridState& state);

/// Instantaneous and filtered powers.
[[nodiscard]] PowerReadout filtered_powers(const MicrogridState& state);

struct PowerBalance {
    double generated = 0.0;     ///< sum of DER terminal powers (W)
    double load = 0.0;          ///< sum of load resistive losses (W)
    double losses = 0.0;        ///< coupling and line resistive losses (W)
    [[nodiscard]] double mismatch() const { return generated - load - losses; }
};

[[nodiscard]] PowerBalance power_balance(const MicrogridModel& model, const MicrogridState& state);

/// Scales R_load and L_load of one load record by factor (> 0).
void apply_load_step(NetworkParams& network, std::size_t load_index, double factor);

/// The full microgrid behind the Plant interface, integrated with RK4 at
/// dt_primary for `steps_per_sample` steps per secondary interval.
class MicrogridPlant final : public Plant {
public:
    MicrogridPlant(MicrogridParams params, double dt_primary, long steps_per_sample);

    [[nodiscard]] Index channels() const override { return static_cast<Index>(model_.der_count()); }
    void advance(const Vector& e_star) override;
    [[nodiscard]] Vector output() const override { return measure_output(state_); }
    [[nodiscard]] PowerReadout powers() const override { return filtered_powers(state_); }
    void apply_load_step(std::size_t load_index, double factor) override;
    [[nodiscard]] std::unique_ptr<Plant> clone() const override;

    [[nodiscard]] const MicrogridState& state() const noexcept { return state_; }
    void set_state(MicrogridState state);
    [[nodiscard]] const MicrogridModel& model() const noexcept { return model_; }
    [[nodiscard]] long primary_steps() const noexcept { return primary_steps_; }

private:
    MicrogridModel model_;
    MicrogridState state_;
    double dt_;
    long steps_per_sample_;
    long primary_steps_ = 0;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

} // namespace mmsvc
