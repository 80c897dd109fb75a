// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance [--only N]... [--skip N]...
// Exit status is nonzero when any selected criterion fails.

#include "mmsvc/compare.hpp"
#include "mmsvc/config.hpp"
#include "mmsvc/linear_plant.hpp"
#include "mmsvc/neural_network.hpp"
#include "mmsvc/oracle_controller.hpp"
#include "mmsvc/scenario.hpp"
#include "mmsvc/svc_loop.hpp"
#include "support/oracles.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef MMSVC_CONFIG_DIR
#define MMSVC_CONFIG_DIR "configs"
#endif

using namespace mmsvc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

// Shared across criteria so that 5, 6 and 10 can report on every run.
struct Ledger {
    struct Bibo {
        std::string run;
        double max_v = 0.0;
        double max_e = 0.0;
        double limit = 0.0;
    };
    std::vector<Bibo> bibo;
    struct Identity {
        std::string run;
        long checked = 0;
        long passed = 0;
    };
    std::vector<Identity> identity;
    long freeze_checks = 0;
    long freeze_violations = 0;
    long floor_checks = 0;
    long floor_violations = 0;
    double min_sigma_margin = 1e300;  // sigma_min - h_min
    long property_runs = 0;
};

Ledger ledger;

void note_record(const std::string& name, const RunRecord& rec) {
    ledger.bibo.push_back({name, rec.summary.max_v_norm, rec.summary.max_e_star_norm, rec.bibo_limit});
    ledger.identity.push_back({name, rec.invariants.identity_checked, rec.invariants.identity_passed});
    ledger.freeze_checks += rec.invariants.freeze_checks;
    ledger.freeze_violations += rec.invariants.freeze_violations;
    ledger.floor_checks += rec.invariants.floor_checks;
    ledger.floor_violations += rec.invariants.floor_violations;
}

double smallest_singular_value(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().minCoeff();
}

// Independent per-step watch of an estimator: with eta = 0 the parameters must
// equal those d identification steps earlier; the leading input block must
// keep its smallest singular value above h_min.
class EstimatorWatch {
public:
    EstimatorWatch(const Matrix& theta0, int d, Index m, int n, double rho, double h_min)
        : d_(static_cast<std::size_t>(d)), m_(m), n_(n), rho_(rho), h_min_(h_min) {
        for (std::size_t i = 0; i < d_; ++i) past_.push_front(theta0);
    }

    void observe(const Vector& e, const Matrix& theta) {
        const Matrix& base = past_.back();  // theta d identified steps ago
        if (!(e.norm() > 2.0 * rho_)) {
            ++ledger.freeze_checks;
            if (!(theta.array() == base.array()).all()) ++ledger.freeze_violations;
        }
        const Matrix lead = theta.block(n_ * m_, 0, m_, m_).transpose();
        const double s = smallest_singular_value(lead);
        ++ledger.floor_checks;
        ledger.min_sigma_margin = std::min(ledger.min_sigma_margin, s - h_min_);
        if (s < h_min_ * (1.0 - 1e-12)) ++ledger.floor_violations;
        past_.push_front(theta);
        past_.pop_back();
    }

private:
    std::size_t d_;
    Index m_;
    int n_;
    double rho_;
    double h_min_;
    std::deque<Matrix> past_;
};

struct RandomPlant {
    PolyMatrix A;
    PolyMatrix B;
    Index m;
    int n;
    int d;
};

RandomPlant random_plant(Rng& rng) {
    RandomPlant p{PolyMatrix::identity(1), PolyMatrix::identity(1), 1, 1, 1};
    p.m = 1 + static_cast<Index>(rng.next() % 2);
    p.n = 1 + static_cast<int>(rng.next() % 2);
    p.d = 1 + static_cast<int>(rng.next() % 2);
    for (;;) {
        std::vector<Matrix> c{Matrix::Identity(p.m, p.m)};
        for (int i = 1; i <= p.n; ++i) c.push_back(rng.uniform_matrix(p.m, p.m, -0.5, 0.5) / p.n);
        PolyMatrix a(c);
        if (a.is_stable() && a.companion_spectral_radius() < 0.9) {
            p.A = a;
            break;
        }
    }
    std::vector<Matrix> bc{Matrix::Identity(p.m, p.m) + rng.uniform_matrix(p.m, p.m, -0.3, 0.3)};
    for (int i = 1; i < p.n; ++i) bc.push_back(rng.uniform_matrix(p.m, p.m, -0.3, 0.3));
    p.B = PolyMatrix(bc);
    return p;
}

// Signals in the property runs are O(1); this is their configured BIBO bound.
constexpr double kPropertyBibo = 100.0;
constexpr double kHMin = 0.05;

struct LoopRunResult {
    double tail_max_active_error = 0.0;
    double max_v = 0.0;
    double max_e = 0.0;
    std::vector<Vector> e_star;
    InvariantStats stats;
};

LoopRunResult run_linear_loop(const RandomPlant& rp, ControllerKind kind, double rho, double v_ref, long steps,
                              Disturbance phi, std::uint64_t seed, bool watch) {
    const std::vector<double> fc{1.0, -0.2};
    const PolyMatrix F = PolyMatrix::scalar(fc, rp.m);
    auto plant = make_linear_oracle_plant(rp.A, rp.B, rp.d, std::move(phi));

    LoopSettings s;
    s.kind = kind;
    s.n = rp.n;
    s.d = rp.d;
    s.estimator.rho = rho;
    s.estimator.h_min = kHMin;
    s.switching.rho = rho;
    s.design = ControllerDesign::make(F, Vector::Constant(rp.m, v_ref), {}, -1e6, 1e6);
    s.nominal_input = Vector::Zero(rp.m);
    SvcLoop loop(s, rp.m, seed);
    if (kind == ControllerKind::oracle) {
        loop.attach_oracle(std::make_shared<const OracleController>(rp.A, rp.B, F, rp.d));
    }

    std::optional<EstimatorWatch> wl, wn;
    if (watch) {
        wl.emplace(loop.linear().params(), rp.d, rp.m, rp.n, rho, kHMin);
        wn.emplace(loop.nonlinear().parameters().params(), rp.d, rp.m, rp.n, rho, kHMin);
    }

    LoopRunResult out;
    for (long k = 0; k < steps; ++k) {
        const Vector v = plant->output();
        const auto r = loop.step(k, v, true);
        out.max_v = std::max(out.max_v, v.norm());
        out.max_e = std::max(out.max_e, r.e_star.norm());
        out.e_star.push_back(r.e_star);
        if (r.identified) {
            if (watch) {
                wl->observe(r.e_linear, loop.linear().params());
                wn->observe(r.e_nonlinear, loop.nonlinear().parameters().params());
            }
            const Vector& e = r.active == ControllerId::linear ? r.e_linear : r.e_nonlinear;
            if (k >= steps * 8 / 10) out.tail_max_active_error = std::max(out.tail_max_active_error, e.norm());
        }
        plant->advance(r.e_star);
    }
    out.stats = loop.stats();
    return out;
}

void note_loop(const std::string& name, const LoopRunResult& r) {
    ledger.bibo.push_back({name, r.max_v, r.max_e, kPropertyBibo});
    ledger.identity.push_back({name, r.stats.identity_checked, r.stats.identity_passed});
    ledger.freeze_checks += r.stats.freeze_checks;
    ledger.freeze_violations += r.stats.freeze_violations;
    ledger.floor_checks += r.stats.floor_checks;
    ledger.floor_violations += r.stats.floor_violations;
    ++ledger.property_runs;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Verdict scenario_check(const std::string& file, double budget_s, const std::string& tag) {
    const auto t0 = Clock::now();
    const auto cfg = load_config(std::string(MMSVC_CONFIG_DIR) + "/" + file);
    const auto rec = run_scenario(cfg);
    const double elapsed = seconds_since(t0);
    note_record(tag, rec);
    const auto& s = rec.summary;
    const double pre = *std::max_element(s.pre_svc_error.begin(), s.pre_svc_error.end());
    const double post = *std::max_element(s.post_svc_error.begin(), s.post_svc_error.end());
    const bool a = pre > 0.5;
    const bool b = post < 1.0 && s.svc_settle_time && *s.svc_settle_time <= 0.3;
    const bool c = s.recovery_time && *s.recovery_time <= 0.3;
    const bool t = elapsed < budget_s;
    std::ostringstream os;
    os << "pre-SVC max " << fmt("%.3f", pre) << " V (a " << (a ? "ok" : "no") << "), post-SVC max "
       << fmt("%.4f", post) << " V settle " << (s.svc_settle_time ? fmt("%.3f s", *s.svc_settle_time) : "never")
       << " (b " << (b ? "ok" : "no") << "), recovery "
       << (s.recovery_time ? fmt("%.3f s", *s.recovery_time) : "never") << " (c " << (c ? "ok" : "no")
       << "), runtime " << fmt("%.1f s", elapsed) << " < " << fmt("%.0f s", budget_s);
    return {a && b && c && t, os.str()};
}

Verdict criterion1() { return scenario_check("ci.json", 60.0, "ci"); }
Verdict criterion2() { return scenario_check("showcase.json", 900.0, "showcase"); }

Verdict criterion3() {
    const auto base = load_config(std::string(MMSVC_CONFIG_DIR) + "/ci.json");
    auto fl = base;
    fl.controller = ControllerKind::feedback_linearization;
    const auto cmp = compare_runs(base, fl);
    if (!cmp.a.record) return {false, "MMAC run failed: " + cmp.a.failure->message};
    note_record("ci-mmac", *cmp.a.record);
    const double mmac = cmp.a.record->summary.worst_terminal_error;
    double baseline = 0.0;
    std::string how;
    if (cmp.b.record) {
        note_record("ci-feedback-linearization", *cmp.b.record);
        baseline = cmp.b.record->summary.worst_terminal_error;
        how = fmt("%.2f V", baseline);
    } else {
        baseline = 1e300;  // a baseline that blows up certainly exceeds 5%
        how = "run failed (" + cmp.b.failure->message + ")";
    }
    const double vref = std::abs(base.v_ref);
    const bool ok = baseline > 0.05 * vref && mmac < 0.01 * vref;
    return {ok, "feedback-linearization worst terminal error " + how + " vs limit > " + fmt("%.1f V", 0.05 * vref) +
                    "; MMAC " + fmt("%.4f V", mmac) + " vs limit < " + fmt("%.1f V", 0.01 * vref)};
}

Verdict criterion4() {
    const auto t0 = Clock::now();
    int fails = 0;
    double worst_ratio = 0.0;
    const std::vector<double> fc{1.0, -0.2};
    for (int run = 0; run < 50; ++run) {
        Rng rng(1000 + static_cast<std::uint64_t>(run));
        const auto rp = random_plant(rng);
        const auto sol = solve_diophantine(rp.A, PolyMatrix::scalar(fc, rp.m), rp.d);
        const double amp = 0.5;
        double lsum = 0.0;
        for (const auto& l : sol.L.coeffs()) lsum += l.norm();  // Frobenius >= spectral norm
        const double rho = amp * lsum;                            // bound on |L phi|
        auto prng = std::make_shared<Rng>(77 + static_cast<std::uint64_t>(run));
        const Index m = rp.m;
        Disturbance phi = [prng, m, amp](std::int64_t, std::span<const Vector>, std::span<const Vector>) {
            Vector u = prng->uniform_vector(m, -1, 1);
            if (u.norm() > 1.0) u /= u.norm();
            return Vector(amp * u);
        };
        const auto res = run_linear_loop(rp, ControllerKind::mmac, rho, 0.0, 4000, phi,
                                         static_cast<std::uint64_t>(run), true);
        note_loop("bound-" + std::to_string(run), res);
        const double ratio = res.tail_max_active_error / (2.0 * rho);
        worst_ratio = std::max(worst_ratio, ratio);
        if (!(res.tail_max_active_error <= 2.0 * rho * (1.0 + 1e-6))) ++fails;
    }
    const double elapsed = seconds_since(t0);
    return {fails == 0 && elapsed < 120.0,
            std::to_string(50 - fails) + "/50 runs with tail max |e_active| <= 2 rho (worst ratio " +
                fmt("%.3f", worst_ratio) + "), runtime " + fmt("%.1f s", elapsed)};
}

Verdict criterion5() {
    int bad = 0;
    long checked = 0;
    std::string worst;
    for (const auto& r : ledger.identity) {
        checked += r.checked;
        const double frac = r.checked == 0 ? 1.0 : static_cast<double>(r.passed) / r.checked;
        if (frac < 0.99) {
            ++bad;
            worst = r.run;
        }
    }
    if (ledger.identity.empty()) return {false, "no runs recorded (run the other criteria first)"};
    return {bad == 0, std::to_string(ledger.identity.size() - bad) + "/" + std::to_string(ledger.identity.size()) +
                          " runs at >= 99% identity over " + std::to_string(checked) + " checked steps" +
                          (bad ? ", first failing run " + worst : "")};
}

Verdict criterion6() {
    if (ledger.bibo.empty()) return {false, "no runs recorded"};
    int bad = 0;
    double worst = 0.0;
    for (const auto& b : ledger.bibo) {
        const double peak = std::max(b.max_v, b.max_e);
        worst = std::max(worst, peak / b.limit);
        if (!(peak <= b.limit)) ++bad;
    }
    return {bad == 0, std::to_string(ledger.bibo.size() - bad) + "/" + std::to_string(ledger.bibo.size()) +
                          " runs within their bound (largest peak/limit " + fmt("%.3f", worst) + ")"};
}

Verdict criterion7() {
    const auto t0 = Clock::now();
    Rng rng(20240607);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Index m = 1 + static_cast<Index>(rng.next() % 3);
        const int n = 1 + static_cast<int>(rng.next() % 4);
        const int d = 1 + static_cast<int>(rng.next() % 3);
        const int nf = static_cast<int>(rng.next() % static_cast<unsigned>(n + 1));
        std::vector<Matrix> ac{Matrix::Identity(m, m)}, fcoef{Matrix::Identity(m, m)};
        for (int i = 1; i <= n; ++i) ac.push_back(rng.uniform_matrix(m, m, -1, 1));
        for (int i = 1; i <= nf; ++i) fcoef.push_back(rng.uniform_matrix(m, m, -1, 1));
        const auto sol = solve_diophantine(PolyMatrix(ac), PolyMatrix(fcoef), d);
        worst = std::max(worst, oracle::diophantine_residual(ac, fcoef, d, sol.L.coeffs(), sol.K.coeffs()));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-12 && elapsed < 10.0,
            "max coefficient residual " + fmt("%.2e", worst) + " over 1000 instances, runtime " + fmt("%.2f s", elapsed)};
}

Verdict criterion8() {
    int fails = 0;
    double worst = 0.0;
    const double v_ref = 1.0;
    for (int run = 0; run < 10; ++run) {
        Rng rng(5000 + static_cast<std::uint64_t>(run));
        const auto rp = random_plant(rng);
        const long steps = 3000;
        const auto adaptive = run_linear_loop(rp, ControllerKind::linear_only, 1e-12, v_ref, steps, {},
                                              static_cast<std::uint64_t>(run), true);
        const auto known = run_linear_loop(rp, ControllerKind::oracle, 1e-12, v_ref, steps, {},
                                           static_cast<std::uint64_t>(run), false);
        note_loop("oracle-equivalence-" + std::to_string(run), adaptive);
        double dev = 0.0;
        for (long k = steps - 100; k < steps; ++k) {
            dev = std::max(dev, (adaptive.e_star[static_cast<std::size_t>(k)] -
                                 known.e_star[static_cast<std::size_t>(k)]).norm());
        }
        const double limit = 1e-3 * v_ref * std::sqrt(static_cast<double>(rp.m));
        worst = std::max(worst, dev / limit);
        if (!(dev <= limit)) ++fails;
    }
    return {fails == 0, std::to_string(10 - fails) + "/10 plants with final-100 max |dE*| <= 1e-3 |V_ref| (worst ratio " +
                            fmt("%.2e", worst) + ")"};
}

Verdict criterion9() {
    Rng rng(99);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const Index in = 1 + static_cast<Index>(rng.next() % 6);
        const Index out = 1 + static_cast<Index>(rng.next() % 3);
        const Index hid = 1 + static_cast<Index>(rng.next() % 12);
        NeuralSettings s;
        s.hidden = static_cast<int>(hid);
        s.input_scale = 0.5;
        const Matrix wh = rng.uniform_matrix(hid, in + 1, -1, 1);
        const Matrix wo = rng.uniform_matrix(out, hid + 1, -1, 1);
        NeuralNetwork net(wh, wo, s);
        const Vector x = rng.uniform_vector(in, -2, 2);
        const Vector target = rng.uniform_vector(out, -1, 1);
        const auto g = net.gradient(x, target);

        auto loss = [&](const Matrix& a, const Matrix& b) {
            return 0.5 * (target - oracle::forward(a, b, x, s.input_scale)).squaredNorm();
        };
        const double h = 1e-6;
        Matrix fh(wh.rows(), wh.cols()), fo(wo.rows(), wo.cols());
        for (Index i = 0; i < wh.size(); ++i) {
            Matrix p = wh, q = wh;
            p.data()[i] += h;
            q.data()[i] -= h;
            fh.data()[i] = (loss(p, wo) - loss(q, wo)) / (2 * h);
        }
        for (Index i = 0; i < wo.size(); ++i) {
            Matrix p = wo, q = wo;
            p.data()[i] += h;
            q.data()[i] -= h;
            fo.data()[i] = (loss(wh, p) - loss(wh, q)) / (2 * h);
        }
        const double num = std::sqrt((g.hidden - fh).squaredNorm() + (g.output - fo).squaredNorm());
        const double den = std::max(std::sqrt(fh.squaredNorm() + fo.squaredNorm()), 1e-8);
        worst = std::max(worst, num / den);
    }
    return {worst < 1e-5, "max relative error " + fmt("%.2e", worst) + " over 100 draws"};
}

Verdict criterion10() {
    if (ledger.property_runs == 0) return {false, "no property runs recorded"};
    const bool ok = ledger.freeze_violations == 0 && ledger.floor_violations == 0 && ledger.freeze_checks > 0 &&
                    ledger.floor_checks > 0;
    return {ok, std::to_string(ledger.freeze_checks) + " freeze checks, " + std::to_string(ledger.freeze_violations) +
                    " violations; " + std::to_string(ledger.floor_checks) + " floor checks, " +
                    std::to_string(ledger.floor_violations) + " violations (min sigma - h_min " +
                    fmt("%.3g", ledger.min_sigma_margin) + ")"};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, skip;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if ((a == "--only" || a == "--skip") && i + 1 < argc) {
            (a == "--only" ? only : skip).insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--only N]... [--skip N]...\n");
            return 2;
        }
    }
    // 5, 6 and 10 aggregate over runs made by the others, so order matters.
    const std::vector<std::pair<int, std::function<Verdict()>>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {7, criterion7},
        {8, criterion8}, {9, criterion9}, {5, criterion5}, {6, criterion6}, {10, criterion10}};
    std::vector<std::pair<int, Verdict>> results;
    for (const auto& [id, fn] : all) {
        if ((!only.empty() && !only.count(id)) || skip.count(id)) continue;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        results.emplace_back(id, v);
    }
    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    int failed = 0;
    for (const auto& [id, v] : results) {
        std::printf("criterion %2d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        failed += v.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
