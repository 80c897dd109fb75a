#pragma once

// Scenario configuration: JSON text with a schema_version, unit-suffixed keys
// and strict rejection of unknown keys. A profile ("ci" or "showcase")
// supplies defaults; keys present in the file override them.

#include "mmsvc/microgrid.hpp"
#include "mmsvc/poly_matrix.hpp"
#include "mmsvc/surrogate.hpp"
#include "mmsvc/svc_loop.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmsvc {

inline constexpr int kSchemaVersion = 1;

enum class PlantKind { full, surrogate, linear_oracle };

struct TimingConfig {
    double t_end = 2.5;
    double dt_primary = 1e-5;
    double dt_secondary = 5e-3;
    double t_svc_on = 1.0;
    double t_event = 2.0;

    [[nodiscard]] long samples() const;            ///< t_end / dt_secondary
    [[nodiscard]] long primary_per_sample() const; ///< dt_secondary / dt_primary
    [[nodiscard]] long svc_sample() const;
    [[nodiscard]] long event_sample() const;
};

struct EventConfig {
    bool enabled = true;
    std::size_t load_index = 1;
    double factor = 0.5;
};

struct DisturbanceConfig {
    enum class Kind { none, uniform_ball } kind = Kind::none;
    double amplitude = 0.0;  ///< |phi(k)| <= amplitude
};

struct LinearOracleConfig {
    PolyMatrix A;
    PolyMatrix B;
    int d = 1;
    DisturbanceConfig disturbance;
    Vector initial_output;
};

struct CalibrationConfig {
    long samples = 200;
    double amplitude = 2.0;  ///< probing perturbation around the nominal input (V)
};

struct ScenarioConfig {
    std::string profile = "ci";
    PlantKind plant = PlantKind::surrogate;
    MicrogridParams full = MicrogridParams::reference_system();
    double surrogate_tau_v = 5e-3;
    LinearOracleConfig oracle;

    ControllerKind controller = ControllerKind::mmac;
    EstimatorUpdate update_policy = EstimatorUpdate::both;
    std::vector<double> f_coeffs{1.0, -0.2};
    std::optional<std::vector<double>> r_diag;
    double mu = 1.0;
    int window = 10;
    double e_min = 0.0;
    double e_max = 600.0;
    std::optional<double> bibo_bound;  ///< default 10 |V_ref|
    double fl_gain = 20.0;

    int n = 2;
    int d = 1;
    std::optional<double> rho;  ///< empty: calibrate
    double h_min = 0.05;
    double theta_bound = 1e3;
    double initial_input_gain = 1.0;
    CalibrationConfig calibration;
    NeuralSettings network;
    bool train_network = true;

    TimingConfig timing;
    EventConfig event;
    double v_ref = 300.0;
    double e_nominal = 300.0;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    bool figures = true;

    [[nodiscard]] Index channels() const;
    [[nodiscard]] SurrogateParams surrogate_params() const;
    [[nodiscard]] PolyMatrix design_polynomial() const;
    [[nodiscard]] ControllerDesign design() const;
    [[nodiscard]] double bibo_limit() const;
    /// Throws config with the offending key on any inconsistency.
    void validate() const;
};

/// Profile defaults ("ci": surrogate at 1e-5 s, "showcase": full plant at 1e-6 s).
[[nodiscard]] ScenarioConfig profile_defaults(std::string_view profile);

/// Parses JSON text. `profile_override` (CLI) wins over the file's "profile".
/// `overrides` are (dotted.path, json value text) pairs applied to the
/// document before parsing, as used by sweeps.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text, std::optional<std::string> profile_override = {},
                                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path,
                                         std::optional<std::string> profile_override = {},
                                         const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Resolved configuration as JSON text (every key, schema-valid).
[[nodiscard]] std::string dump_config(const ScenarioConfig& cfg);

[[nodiscard]] std::string_view to_string(PlantKind kind) noexcept;

} // namespace mmsvc
