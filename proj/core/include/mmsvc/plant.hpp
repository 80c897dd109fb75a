#pragma once

#include "mmsvc/types.hpp"

#include <memory>

namespace mmsvc {

struct PowerReadout {
    Vector p;  ///< per-DER active power (W)
    Vector q;  ///< per-DER reactive power (Var)
};

/// The plant as seen by the secondary controller: m setpoints in, m voltage
/// magnitudes out. Continuous plants integrate one secondary interval per
/// advance() under a zero-order-held input; discrete plants take one step.
class Plant {
public:
    virtual ~Plant() = default;

    [[nodiscard]] virtual Index channels() const = 0;

    /// Hold e_star over the next secondary interval.
    virtual void advance(const Vector& e_star) = 0;

    /// Output voltage magnitudes V_o at the current sample.
    [[nodiscard]] virtual Vector output() const = 0;

    /// Logged powers; plants without a power model report zeros.
    [[nodiscard]] virtual PowerReadout powers() const;

    /// Scales the impedance of load `load_index` by `factor` (> 0). Plant
    /// states are continuous across the event.
    virtual void apply_load_step(std::size_t load_index, double factor);

    [[nodiscard]] virtual std::unique_ptr<Plant> clone() const = 0;
};

} // namespace mmsvc
