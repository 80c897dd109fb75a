#include "mmsvc/microgrid.hpp"

#include "mmsvc/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace mmsvc {

namespace {

constexpr int kGround = -1;

constexpr int der_node(std::size_t der) { return -2 - static_cast<int>(der); }

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        fail(ErrorCategory::config, std::string(name) + " must be strictly positive");
    }
}

void require_non_negative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        fail(ErrorCategory::config, std::string(name) + " must be non-negative");
    }
}

struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;

    void resize(std::size_t n) {
        k1.assign(n, 0.0);
        k2.assign(n, 0.0);
        k3.assign(n, 0.0);
        k4.assign(n, 0.0);
        tmp.assign(n, 0.0);
    }
};

void rk4_in_place(const MicrogridModel& model, std::vector<double>& x, const Vector& e_star, double dt,
                  std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
                  std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = x.size();
    model.derivative(x, e_star, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    model.derivative(tmp, e_star, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    model.derivative(tmp, e_star, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    model.derivative(tmp, e_star, k4);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

bool all_finite(const std::vector<double>& x) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace

void DerParams::validate() const {
    require_positive(L_f, "L_f");
    require_positive(r_f, "r_f");
    require_positive(C_f, "C_f");
    require_positive(L_c, "L_c");
    require_positive(r_c, "r_c");
    require_positive(R_d, "R_d");
    require_positive(omega_c, "omega_c");
    require_positive(pll_omega_c, "pll_omega_c");
    require_non_negative(D_Q, "D_Q");
    require_non_negative(m_P, "m_P");
    require_non_negative(K_PV, "K_PV");
    require_non_negative(K_IV, "K_IV");
    require_non_negative(K_PC, "K_PC");
    require_non_negative(K_IC, "K_IC");
    require_non_negative(F_ff, "F_ff");
    require_non_negative(K_P_PLL, "K_P_PLL");
    require_non_negative(K_I_PLL, "K_I_PLL");
}

void NetworkParams::validate(std::size_t der_count) const {
    if (buses <= 0) {
        fail(ErrorCategory::config, "network needs at least one bus");
    }
    if (der_bus.size() != der_count) {
        fail(ErrorCategory::config, "der_bus must list one bus per DER");
    }
    auto check_bus = [&](int b, const char* what) {
        if (b < 0 || b >= buses) {
            fail(ErrorCategory::config, std::string(what) + " references missing bus " + std::to_string(b));
        }
    };
    // Union-find over buses to check connectivity.
    std::vector<int> parent(static_cast<std::size_t>(buses));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        }
        return v;
    };
    for (const auto& line : lines) {
        check_bus(line.from, "line");
        check_bus(line.to, "line");
        if (line.from == line.to) {
            fail(ErrorCategory::config, "line must join two distinct buses");
        }
        require_positive(line.R, "R_line");
        require_positive(line.L, "L_line");
        parent[static_cast<std::size_t>(find(line.from))] = find(line.to);
    }
    for (const auto& load : loads) {
        check_bus(load.bus, "load");
        require_positive(load.R, "R_load");
        require_positive(load.L, "L_load");
    }
    for (int b : der_bus) {
        check_bus(b, "DER");
    }
    for (int b = 1; b < buses; ++b) {
        if (find(b) != find(0)) {
            fail(ErrorCategory::config, "network topology is not connected");
        }
    }
}

MicrogridParams MicrogridParams::reference_system() {
    MicrogridParams p;
    DerParams small;  // DERs 3 and 4
    small.D_Q = 1.5e-3;
    small.m_P = 12.5e-5;
    small.K_PV = 0.25;
    small.K_IV = 34.0;
    small.K_PC = 3.55;
    small.K_IC = 353.0;
    p.ders = {DerParams{}, DerParams{}, small, small};

    p.network.buses = 4;
    p.network.lines = {
        {0, 1, 0.15, 0.42e-3},
        {1, 2, 0.35, 0.33e-3},
        {2, 3, 0.23, 0.55e-3},
    };
    p.network.loads = {
        {0, 20.0, 15e-3},
        {2, 10.0, 25e-3},
    };
    p.network.der_bus = {0, 1, 2, 3};
    return p;
}

void MicrogridParams::validate() const {
    if (ders.empty()) {
        fail(ErrorCategory::config, "microgrid needs at least one DER");
    }
    for (const auto& d : ders) {
        d.validate();
    }
    require_positive(omega_n, "omega_n");
    network.validate(ders.size());
}

MicrogridState MicrogridState::zero(const MicrogridParams& params) {
    MicrogridState s;
    s.der_count = params.ders.size();
    s.line_count = params.network.lines.size();
    s.load_count = params.network.loads.size();
    s.x.assign(size_for(s.der_count, s.line_count, s.load_count), 0.0);
    return s;
}

MicrogridModel::MicrogridModel(MicrogridParams params) : params_(std::move(params)) {
    params_.validate();
    state_size_ = MicrogridState::size_for(params_.ders.size(), params_.network.lines.size(),
                                           params_.network.loads.size());
    rebuild_network();
}

void MicrogridModel::rebuild_network() {
    branches_.clear();
    for (std::size_t i = 0; i < params_.ders.size(); ++i) {
        branches_.push_back({der_node(i), params_.network.der_bus[i], params_.ders[i].r_c, params_.ders[i].L_c});
    }
    for (const auto& line : params_.network.lines) {
        branches_.push_back({line.from, line.to, line.R, line.L});
    }
    for (const auto& load : params_.network.loads) {
        branches_.push_back({load.bus, kGround, load.R, load.L});
    }

    // Differentiated KCL at every bus: sum_b s_nb (V_from - V_to) / L_b = c_n,
    // linear in the unknown bus voltages.
    const int nb = params_.network.buses;
    Matrix kcl = Matrix::Zero(nb, nb);
    for (const auto& b : branches_) {
        for (int n = 0; n < nb; ++n) {
            const double s = (b.to == n ? 1.0 : 0.0) - (b.from == n ? 1.0 : 0.0);
            if (s == 0.0) continue;
            if (b.from >= 0) kcl(n, b.from) += s / b.L;
            if (b.to >= 0) kcl(n, b.to) -= s / b.L;
        }
    }
    Eigen::FullPivLU<Matrix> lu(kcl);
    if (!lu.isInvertible()) {
        fail(ErrorCategory::config, "network bus equations are singular");
    }
    bus_solve_ = lu.inverse();
}

void MicrogridModel::scale_load(std::size_t load_index, double factor) {
    apply_load_step(params_.network, load_index, factor);
    rebuild_network();
}

void MicrogridModel::solve_buses(std::span<const double> x, std::span<double> bus_d,
                                 std::span<double> bus_q) const {
    const std::size_t m = params_.ders.size();
    const int nb = params_.network.buses;
    const double omega_com = params_.omega_n - params_.ders[0].m_P * x[kP] +
                             params_.ders[0].K_P_PLL * x[kVoqFiltered] + params_.ders[0].K_I_PLL * x[kPhiPll];

    double rhs_d[64];
    double rhs_q[64];
    for (int n = 0; n < nb; ++n) {
        rhs_d[n] = 0.0;
        rhs_q[n] = 0.0;
    }

    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const Branch& br = branches_[b];
        double id;
        double iq;
        double known_d = 0.0;  // known part of V_from - V_to
        double known_q = 0.0;
        if (b < m) {
            const double* s = &x[b * kDerStateCount];
            const double c = std::cos(s[kDelta]);
            const double sn = std::sin(s[kDelta]);
            id = c * s[kIod] - sn * s[kIoq];
            iq = sn * s[kIod] + c * s[kIoq];
            known_d = c * s[kVod] - sn * s[kVoq];
            known_q = sn * s[kVod] + c * s[kVoq];
        } else {
            const std::size_t off = kDerStateCount * m + 2 * (b - m);
            id = x[off];
            iq = x[off + 1];
        }
        const double inv_l = 1.0 / br.L;
        // c_n - known_n contribution
        const double cd = br.R * id * inv_l - omega_com * iq - known_d * inv_l;
        const double cq = br.R * iq * inv_l + omega_com * id - known_q * inv_l;
        if (br.to >= 0) {
            rhs_d[br.to] += cd;
            rhs_q[br.to] += cq;
        }
        if (br.from >= 0) {
            rhs_d[br.from] -= cd;
            rhs_q[br.from] -= cq;
        }
    }
    for (int n = 0; n < nb; ++n) {
        double vd = 0.0;
        double vq = 0.0;
        for (int j = 0; j < nb; ++j) {
            vd += bus_solve_(n, j) * rhs_d[j];
            vq += bus_solve_(n, j) * rhs_q[j];
        }
        bus_d[static_cast<std::size_t>(n)] = vd;
        bus_q[static_cast<std::size_t>(n)] = vq;
    }
}

std::vector<std::array<double, 2>> MicrogridModel::bus_voltages(std::span<const double> x) const {
    const auto nb = static_cast<std::size_t>(params_.network.buses);
    std::vector<double> d(nb);
    std::vector<double> q(nb);
    solve_buses(x, d, q);
    std::vector<std::array<double, 2>> out(nb);
    for (std::size_t n = 0; n < nb; ++n) {
        out[n] = {d[n], q[n]};
    }
    return out;
}

void MicrogridModel::derivative(std::span<const double> x, const Vector& e_star, std::span<double> dx) const {
    const std::size_t m = params_.ders.size();
    const int nb = params_.network.buses;
    if (nb > 64) {
        fail(ErrorCategory::config, "at most 64 buses supported");
    }
    double bus_d[64];
    double bus_q[64];
    solve_buses(x, std::span<double>(bus_d, static_cast<std::size_t>(nb)),
                std::span<double>(bus_q, static_cast<std::size_t>(nb)));

    const double omega_n = params_.omega_n;
    double omega_com = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
        const DerParams& p = params_.ders[i];
        const double* s = &x[i * kDerStateCount];
        double* ds = &dx[i * kDerStateCount];

        const double omega = omega_n - p.m_P * s[kP] + p.K_P_PLL * s[kVoqFiltered] + p.K_I_PLL * s[kPhiPll];
        if (i == 0) {
            omega_com = omega;
        }

        const double vod = s[kVod];
        const double voq = s[kVoq];
        const double iod = s[kIod];
        const double ioq = s[kIoq];
        const double ild = s[kIld];
        const double ilq = s[kIlq];

        // power measurement and low-pass filters
        const double p_inst = vod * iod + voq * ioq;
        const double q_inst = voq * iod - vod * ioq;
        ds[kP] = p.omega_c * (p_inst - s[kP]);
        ds[kQ] = p.omega_c * (q_inst - s[kQ]);

        // PLL on the filtered q-axis voltage
        ds[kVoqFiltered] = p.pll_omega_c * (voq - s[kVoqFiltered]);
        ds[kPhiPll] = s[kVoqFiltered];
        // delta_i' = omega_i - omega_com, filled in below once omega_com is known
        ds[kDelta] = omega;

        // droop and voltage PI
        const double vod_ref = e_star(static_cast<Index>(i)) - p.D_Q * s[kQ];
        const double voq_ref = 0.0;
        ds[kPhiD] = vod_ref - vod;
        ds[kPhiQ] = voq_ref - voq;
        const double ild_ref = p.F_ff * iod - omega_n * p.C_f * voq + p.K_PV * (vod_ref - vod) + p.K_IV * s[kPhiD];
        const double ilq_ref = p.F_ff * ioq + omega_n * p.C_f * vod + p.K_PV * (voq_ref - voq) + p.K_IV * s[kPhiQ];

        // current PI producing the (averaged) inverter voltage
        ds[kGammaD] = ild_ref - ild;
        ds[kGammaQ] = ilq_ref - ilq;
        const double vid = -omega_n * p.L_f * ilq + p.K_PC * (ild_ref - ild) + p.K_IC * s[kGammaD];
        const double viq = omega_n * p.L_f * ild + p.K_PC * (ilq_ref - ilq) + p.K_IC * s[kGammaQ];

        // coupling branch to the bus, in the local frame
        const double c = std::cos(s[kDelta]);
        const double sn = std::sin(s[kDelta]);
        const auto bus = static_cast<std::size_t>(params_.network.der_bus[i]);
        const double ubd = c * bus_d[bus] + sn * bus_q[bus];
        const double ubq = -sn * bus_d[bus] + c * bus_q[bus];
        const double diod = (vod - p.r_c * iod - ubd) / p.L_c + omega * ioq;
        const double dioq = (voq - p.r_c * ioq - ubq) / p.L_c - omega * iod;
        ds[kIod] = diod;
        ds[kIoq] = dioq;

        // LC filter with R_d in series with the capacitor
        const double vcd = vod - p.R_d * (ild - iod);
        const double vcq = voq - p.R_d * (ilq - ioq);
        const double dild = (vid - p.r_f * ild - vcd) / p.L_f + omega * ilq;
        const double dilq = (viq - p.r_f * ilq - vcq) / p.L_f - omega * ild;
        ds[kIld] = dild;
        ds[kIlq] = dilq;
        const double dvcd = (ild - iod) / p.C_f + omega * vcq;
        const double dvcq = (ilq - ioq) / p.C_f - omega * vcd;
        ds[kVod] = dvcd + p.R_d * (dild - diod);
        ds[kVoq] = dvcq + p.R_d * (dilq - dioq);
    }
    for (std::size_t i = 0; i < m; ++i) {
        dx[i * kDerStateCount + kDelta] -= omega_com;
    }
    dx[kDelta] = 0.0;

    // lines and loads in the common frame
    for (std::size_t b = m; b < branches_.size(); ++b) {
        const Branch& br = branches_[b];
        const std::size_t off = kDerStateCount * m + 2 * (b - m);
        const double id = x[off];
        const double iq = x[off + 1];
        const double vfd = br.from >= 0 ? bus_d[br.from] : 0.0;
        const double vfq = br.from >= 0 ? bus_q[br.from] : 0.0;
        const double vtd = br.to >= 0 ? bus_d[br.to] : 0.0;
        const double vtq = br.to >= 0 ? bus_q[br.to] : 0.0;
        dx[off] = (vfd - vtd - br.R * id) / br.L + omega_com * iq;
        dx[off + 1] = (vfq - vtq - br.R * iq) / br.L - omega_com * id;
    }
}

MicrogridState step_primary(const MicrogridModel& model, const MicrogridState& state, const Vector& e_star,
                            double dt) {
    if (!(dt > 0.0)) {
        fail(ErrorCategory::invalid_argument, "dt must be positive");
    }
    if (e_star.size() != static_cast<Index>(model.der_count())) {
        fail(ErrorCategory::invalid_argument, "E* must have one entry per DER");
    }
    MicrogridState next = state;
    Rk4Workspace ws;
    ws.resize(next.x.size());
    rk4_in_place(model, next.x, e_star, dt, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    if (!all_finite(next.x)) {
        fail(ErrorCategory::plant_diverged, "non-finite microgrid state after primary step");
    }
    return next;
}

Vector measure_output(const MicrogridState& state) {
    Vector v(static_cast<Index>(state.der_count));
    for (std::size_t i = 0; i < state.der_count; ++i) {
        v(static_cast<Index>(i)) = std::hypot(state.der(i, kVod), state.der(i, kVoq));
    }
    return v;
}

PowerReadout filtered_powers(const MicrogridState& state) {
    PowerReadout out{Vector(static_cast<Index>(state.der_count)), Vector(static_cast<Index>(state.der_count))};
    for (std::size_t i = 0; i < state.der_count; ++i) {
        out.p(static_cast<Index>(i)) = state.der(i, kP);
        out.q(static_cast<Index>(i)) = state.der(i, kQ);
    }
    return out;
}

PowerBalance power_balance(const MicrogridModel& model, const MicrogridState& state) {
    PowerBalance bal;
    const auto& p = model.params();
    for (std::size_t i = 0; i < state.der_count; ++i) {
        const double iod = state.der(i, kIod);
        const double ioq = state.der(i, kIoq);
        bal.generated += state.der(i, kVod) * iod + state.der(i, kVoq) * ioq;
        bal.losses += p.ders[i].r_c * (iod * iod + ioq * ioq);
    }
    for (std::size_t l = 0; l < state.line_count; ++l) {
        const std::size_t off = state.line_offset(l);
        bal.losses += p.network.lines[l].R * (state.x[off] * state.x[off] + state.x[off + 1] * state.x[off + 1]);
    }
    for (std::size_t l = 0; l < state.load_count; ++l) {
        const std::size_t off = state.load_offset(l);
        bal.load += p.network.loads[l].R * (state.x[off] * state.x[off] + state.x[off + 1] * state.x[off + 1]);
    }
    return bal;
}

void apply_load_step(NetworkParams& network, std::size_t load_index, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        fail(ErrorCategory::invalid_argument, "load step factor must be > 0");
    }
    if (load_index >= network.loads.size()) {
        fail(ErrorCategory::invalid_argument, "load index " + std::to_string(load_index) + " out of range");
    }
    network.loads[load_index].R *= factor;
    network.loads[load_index].L *= factor;
}

MicrogridPlant::MicrogridPlant(MicrogridParams params, double dt_primary, long steps_per_sample)
    : model_(std::move(params)),
      state_(MicrogridState::zero(model_.params())),
      dt_(dt_primary),
      steps_per_sample_(steps_per_sample) {
    if (!(dt_ > 0.0) || steps_per_sample_ <= 0) {
        fail(ErrorCategory::invalid_argument, "primary step and steps per sample must be positive");
    }
    const std::size_t n = state_.x.size();
    k1_.assign(n, 0.0);
    k2_.assign(n, 0.0);
    k3_.assign(n, 0.0);
    k4_.assign(n, 0.0);
    tmp_.assign(n, 0.0);
}

void MicrogridPlant::advance(const Vector& e_star) {
    if (e_star.size() != channels()) {
        fail(ErrorCategory::invalid_argument, "E* must have one entry per DER");
    }
    for (long s = 0; s < steps_per_sample_; ++s) {
        rk4_in_place(model_, state_.x, e_star, dt_, k1_, k2_, k3_, k4_, tmp_);
        ++primary_steps_;
    }
    if (!all_finite(state_.x)) {
        fail(ErrorCategory::plant_diverged,
             "non-finite microgrid state by primary step " + std::to_string(primary_steps_));
    }
}

void MicrogridPlant::apply_load_step(std::size_t load_index, double factor) {
    model_.scale_load(load_index, factor);
}

std::unique_ptr<Plant> MicrogridPlant::clone() const {
    return std::make_unique<MicrogridPlant>(*this);
}

void MicrogridPlant::set_state(MicrogridState state) {
    if (state.x.size() != model_.state_size()) {
        fail(ErrorCategory::invalid_argument, "state size does not match the model");
    }
    state_ = std::move(state);
}

} // namespace mmsvc
