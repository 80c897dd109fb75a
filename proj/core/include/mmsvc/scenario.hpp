#pragma once

// Two-rate scenario loop: the plant integrates at the primary step under a
// zero-order-held E*, the SVC pipeline runs once per secondary sample.

#include "mmsvc/config.hpp"
#include "mmsvc/linear_plant.hpp"
#include "mmsvc/run_record.hpp"

#include <functional>
#include <memory>

namespace mmsvc {

/// Lazily generated disturbance sequence phi(0), phi(1), ... shared by the
/// oracle plant and the oracle controller. Negative indices are zero.
class DisturbanceSequence {
public:
    DisturbanceSequence(Index m, DisturbanceConfig cfg, std::uint64_t seed);
    [[nodiscard]] const Vector& at(std::int64_t k);

private:
    Index m_;
    DisturbanceConfig cfg_;
    Rng rng_;
    Vector zero_;
    std::vector<Vector> values_;
};

struct BuiltPlant {
    std::unique_ptr<Plant> plant;
    std::shared_ptr<DisturbanceSequence> disturbance;  ///< linear_oracle only
};

[[nodiscard]] BuiltPlant build_plant(const ScenarioConfig& cfg);

/// Probes a fresh plant around the nominal input after t_svc_on, fits theta by
/// batch least squares and returns max |Y - theta_LS^T X| over the probe.
[[nodiscard]] double calibrate_rho(const ScenarioConfig& cfg);

/// Optional per-sample hook (progress, tests).
using RowObserver = std::function<void(const RunRow&, const StepRecord&)>;

/// Runs the scenario. Throws Error tagged with the sample index on plant
/// divergence or a monitor violation (BIBO bound, dead-zone freeze,
/// projection floor, identity pass rate below 99%).
[[nodiscard]] RunRecord run_scenario(const ScenarioConfig& cfg, const RowObserver& observer = {});

} // namespace mmsvc
