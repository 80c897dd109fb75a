#pragma once

// Model-based comparison controller. It inverts the nominal surrogate
// voltage dynamics  tau_v dv/dt = E* - D_Q Q - v  to impose
// dv/dt = k_fl (V_ref - v), with Q taken from an observer that runs the
// nominal power filter on the measured voltages. It is never told about load
// changes, so a load step leaves a model-mismatch offset.

#include "mmsvc/surrogate.hpp"

namespace mmsvc {

struct FeedbackLinearizationSettings {
    double gain = 20.0;  ///< k_fl (1/s)
};

class FeedbackLinearizationController {
public:
    FeedbackLinearizationController(SurrogateParams nominal, double dt_secondary,
                                    FeedbackLinearizationSettings settings = {});

    /// Advances the reactive-power observer with the sample v(k).
    void observe(const Vector& v);
    [[nodiscard]] Vector control(const Vector& v, const Vector& v_ref) const;

    [[nodiscard]] const Vector& reactive_estimate() const noexcept { return q_hat_; }
    [[nodiscard]] const SurrogateParams& nominal() const noexcept { return nominal_; }

private:
    SurrogateParams nominal_;
    double decay_;
    FeedbackLinearizationSettings settings_;
    Vector q_hat_;
    bool primed_ = false;
};

} // namespace mmsvc
