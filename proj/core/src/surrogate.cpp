#include "mmsvc/surrogate.hpp"

#include "mmsvc/error.hpp"

#include <cmath>
#include <string>

namespace mmsvc {

SurrogateParams SurrogateParams::from_microgrid(const MicrogridParams& grid) {
    grid.validate();
    const std::size_t m = grid.ders.size();
    SurrogateParams s;
    s.omega_c = grid.ders.front().omega_c;
    s.D_Q.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        s.D_Q[i] = grid.ders[i].D_Q;
    }

    auto der_on_bus = [&](int bus) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < m; ++i) {
            if (grid.network.der_bus[i] == bus) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    };

    s.coupling_g = Matrix::Zero(static_cast<Index>(m), static_cast<Index>(m));
    s.coupling_b = Matrix::Zero(static_cast<Index>(m), static_cast<Index>(m));
    for (const auto& line : grid.network.lines) {
        const auto a = der_on_bus(line.from);
        const auto b = der_on_bus(line.to);
        if (a < 0 || b < 0) continue;
        const auto& da = grid.ders[static_cast<std::size_t>(a)];
        const auto& db = grid.ders[static_cast<std::size_t>(b)];
        const double r = da.r_c + line.R + db.r_c;
        const double x = grid.omega_n * (da.L_c + line.L + db.L_c);
        const double z2 = r * r + x * x;
        s.coupling_g(a, b) = s.coupling_g(b, a) = r / z2;
        s.coupling_b(a, b) = s.coupling_b(b, a) = x / z2;
    }
    for (const auto& load : grid.network.loads) {
        const auto i = der_on_bus(load.bus);
        if (i < 0) {
            fail(ErrorCategory::config, "surrogate needs every load on a DER bus");
        }
        s.loads.push_back({static_cast<std::size_t>(i), load.R, grid.omega_n * load.L});
    }
    return s;
}

SurrogateParams SurrogateParams::reference_system() {
    return from_microgrid(MicrogridParams::reference_system());
}

void SurrogateParams::validate() const {
    const auto m = static_cast<Index>(D_Q.size());
    if (m == 0) {
        fail(ErrorCategory::config, "surrogate needs at least one DER");
    }
    if (!(tau_v > 0.0) || !(omega_c > 0.0)) {
        fail(ErrorCategory::config, "surrogate tau_v and omega_c must be positive");
    }
    for (double d : D_Q) {
        if (!(d >= 0.0)) fail(ErrorCategory::config, "surrogate D_Q must be non-negative");
    }
    if (coupling_g.rows() != m || coupling_g.cols() != m || coupling_b.rows() != m || coupling_b.cols() != m) {
        fail(ErrorCategory::config, "surrogate coupling matrices must be m x m");
    }
    for (const auto& load : loads) {
        if (load.der >= D_Q.size()) fail(ErrorCategory::config, "surrogate load references a missing DER");
        if (!(load.R > 0.0) || !(load.X > 0.0)) fail(ErrorCategory::config, "surrogate load R and X must be positive");
    }
}

Vector SurrogateParams::reactive_demand(const Vector& v) const {
    Vector q = Vector::Zero(v.size());
    for (const auto& load : loads) {
        const auto i = static_cast<Index>(load.der);
        q(i) += load.susceptance() * v(i) * v(i);
    }
    for (Index i = 0; i < v.size(); ++i) {
        for (Index j = 0; j < v.size(); ++j) {
            q(i) += coupling_b(i, j) * v(i) * (v(i) - v(j));
        }
    }
    return q;
}

Vector SurrogateParams::active_demand(const Vector& v) const {
    Vector p = Vector::Zero(v.size());
    for (const auto& load : loads) {
        const auto i = static_cast<Index>(load.der);
        p(i) += load.conductance() * v(i) * v(i);
    }
    for (Index i = 0; i < v.size(); ++i) {
        for (Index j = 0; j < v.size(); ++j) {
            p(i) += coupling_g(i, j) * v(i) * (v(i) - v(j));
        }
    }
    return p;
}

SurrogatePlant::SurrogatePlant(SurrogateParams params, double dt_primary, long steps_per_sample)
    : params_(std::move(params)), dt_(dt_primary), steps_per_sample_(steps_per_sample) {
    params_.validate();
    if (!(dt_ > 0.0) || steps_per_sample_ <= 0) {
        fail(ErrorCategory::invalid_argument, "primary step and steps per sample must be positive");
    }
    const auto n = static_cast<Index>(3 * params_.der_count());
    x_ = Vector::Zero(n);
    k1_ = k2_ = k3_ = k4_ = tmp_ = Vector::Zero(n);
}

void SurrogatePlant::derivative(const Vector& x, const Vector& e_star, Vector& dx) const {
    const auto m = static_cast<Index>(params_.der_count());
    const Vector v = x.head(m);
    const Vector q = params_.reactive_demand(v);
    const Vector p = params_.active_demand(v);
    for (Index i = 0; i < m; ++i) {
        const double Q = x(m + i);
        dx(i) = (e_star(i) - params_.D_Q[static_cast<std::size_t>(i)] * Q - v(i)) / params_.tau_v;
        dx(m + i) = params_.omega_c * (q(i) - Q);
        dx(2 * m + i) = params_.omega_c * (p(i) - x(2 * m + i));
    }
}

void SurrogatePlant::advance(const Vector& e_star) {
    if (e_star.size() != channels()) {
        fail(ErrorCategory::invalid_argument, "E* must have one entry per DER");
    }
    for (long s = 0; s < steps_per_sample_; ++s) {
        derivative(x_, e_star, k1_);
        tmp_ = x_ + 0.5 * dt_ * k1_;
        derivative(tmp_, e_star, k2_);
        tmp_ = x_ + 0.5 * dt_ * k2_;
        derivative(tmp_, e_star, k3_);
        tmp_ = x_ + dt_ * k3_;
        derivative(tmp_, e_star, k4_);
        x_ += (dt_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }
    if (!x_.allFinite()) {
        fail(ErrorCategory::plant_diverged, "non-finite surrogate state");
    }
}

Vector SurrogatePlant::output() const {
    return x_.head(channels()).cwiseAbs();
}

PowerReadout SurrogatePlant::powers() const {
    const Index m = channels();
    return {x_.segment(2 * m, m), x_.segment(m, m)};
}

void SurrogatePlant::apply_load_step(std::size_t load_index, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        fail(ErrorCategory::invalid_argument, "load step factor must be > 0");
    }
    if (load_index >= params_.loads.size()) {
        fail(ErrorCategory::invalid_argument, "load index " + std::to_string(load_index) + " out of range");
    }
    params_.loads[load_index].R *= factor;
    params_.loads[load_index].X *= factor;
}

std::unique_ptr<Plant> SurrogatePlant::clone() const {
    return std::make_unique<SurrogatePlant>(*this);
}

void SurrogatePlant::set_state(const Vector& x) {
    if (x.size() != x_.size()) {
        fail(ErrorCategory::invalid_argument, "surrogate state size mismatch");
    }
    x_ = x;
}

} // namespace mmsvc
