// mmsvc command-line front end: run | sweep | compare | validate.

#include "mmsvc/compare.hpp"
#include "mmsvc/config.hpp"
#include "mmsvc/error.hpp"
#include "mmsvc/outputs.hpp"
#include "mmsvc/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace mmsvc;

namespace {

enum Exit : int { kOk = 0, kOther = 1, kConfig = 2, kDiverged = 3, kMonitor = 4, kIo = 5 };

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return kConfig;
        case ErrorCategory::plant_diverged: return kDiverged;
        case ErrorCategory::monitor_violation: return kMonitor;
        case ErrorCategory::io: return kIo;
        default: return kOther;
    }
}

struct Common {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
    std::vector<std::string> set;
    bool no_figures = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "output directory (overrides output.dir)");
    app->add_option("--seed", c.seed, "random seed (overrides seed)");
    app->add_option("--profile", c.profile, "defaults profile")->check(CLI::IsMember({"ci", "showcase"}));
    app->add_option("--set", c.set, "override a config key: path=json")->allow_extra_args(false);
    app->add_flag("--no-figures", c.no_figures, "skip the per-figure CSV files");
}

std::vector<std::pair<std::string, std::string>> overrides(const Common& c) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : c.set) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCategory::config, "--set expects path=value, got '" + s + "'");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.seed) out.emplace_back("seed", std::to_string(*c.seed));
    return out;
}

ScenarioConfig load(const std::string& path, const Common& c) {
    return parse_config(read_text(path), c.profile, overrides(c));
}

void print_summary(const RunRecord& rec) {
    const auto& s = rec.summary;
    std::printf("plant=%s controller=%s rows=%zu rho=%.6g%s\n", rec.plant.c_str(), rec.controller.c_str(), s.rows,
                rec.rho, rec.rho_calibrated ? " (calibrated)" : "");
    auto vec = [](const char* name, const std::vector<double>& v) {
        std::printf("  %-18s", name);
        for (double x : v) std::printf(" %9.4f", x);
        std::printf("\n");
    };
    vec("pre_svc_error_V", s.pre_svc_error);
    vec("post_svc_error_V", s.post_svc_error);
    vec("terminal_error_V", s.terminal_error);
    auto opt = [](const std::optional<double>& x) { return x ? std::to_string(*x) : std::string("-"); };
    std::printf("  settle_s=%s recovery_s=%s switches=%ld max|V|=%.2f max|E*|=%.2f\n", opt(s.svc_settle_time).c_str(),
                opt(s.recovery_time).c_str(), s.switches, s.max_v_norm, s.max_e_star_norm);
    const auto& inv = rec.invariants;
    std::printf("  identity %ld/%ld (max residual %.2e)  freeze violations %ld/%ld  floor violations %ld/%ld\n",
                inv.identity_passed, inv.identity_checked, inv.identity_max_residual, inv.freeze_violations,
                inv.freeze_checks, inv.floor_violations, inv.floor_checks);
}

int report(const Error& e) {
    std::fprintf(stderr, "error [%s]%s: %s\n", std::string(to_string(e.category())).c_str(),
                 e.sample() ? (" at sample " + std::to_string(*e.sample())).c_str() : "", e.what());
    return exit_code(e.category());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-free secondary voltage control simulator"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts, cmp_opts, val_opts;
    std::string run_cfg, sweep_cfg, cmp_a, cmp_b, val_cfg;
    std::vector<std::string> params;
    unsigned workers = 0;
    bool print = false;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("config", run_cfg, "scenario config (JSON)")->required();
    add_common(run, run_opts);

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid in parallel");
    sweep->add_option("config", sweep_cfg, "scenario config (JSON)")->required();
    sweep->add_option("--param", params, "path=[v1,v2,...]; repeat for a grid")->required();
    sweep->add_option("--workers", workers, "parallel workers (default: hardware threads)");
    add_common(sweep, sweep_opts);

    auto* cmp = app.add_subcommand("compare", "run two scenarios side by side");
    cmp->add_option("config_a", cmp_a)->required();
    cmp->add_option("config_b", cmp_b)->required();
    add_common(cmp, cmp_opts);

    auto* val = app.add_subcommand("validate", "check a config and exit");
    val->add_option("config", val_cfg)->required();
    val->add_flag("--print", print, "print the resolved config");
    add_common(val, val_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*run) {
            const ScenarioConfig cfg = load(run_cfg, run_opts);
            const auto t0 = std::chrono::steady_clock::now();
            const RunRecord rec = run_scenario(cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::string dir = run_opts.out.value_or(cfg.output_dir);
            const auto files = emit_outputs(rec, dir, cfg.figures && !run_opts.no_figures);
            print_summary(rec);
            std::printf("  wall time %.2f s; wrote %zu files to %s\n", secs, files.size(), dir.c_str());
        } else if (*sweep) {
            const ScenarioConfig base = load(sweep_cfg, sweep_opts);  // validates the unswept config
            std::vector<SweepAxis> axes;
            for (const auto& p : params) axes.push_back(parse_sweep_axis(p));
            const auto points = run_sweep(read_text(sweep_cfg), sweep_opts.profile, overrides(sweep_opts), axes, workers);
            const std::string dir = sweep_opts.out.value_or(base.output_dir);
            emit_sweep(points, dir, base.figures && !sweep_opts.no_figures);
            for (const auto& pt : points) {
                std::printf("%-6s", pt.outcome.label.c_str());
                for (const auto& [k, v] : pt.assignment) std::printf(" %s=%s", k.c_str(), v.c_str());
                std::printf("  -> %s", pt.outcome.verdict.c_str());
                if (pt.outcome.failure) std::printf(" (%s)", pt.outcome.failure->message.c_str());
                std::printf("\n");
            }
            std::printf("wrote %s/sweep.json\n", dir.c_str());
        } else if (*cmp) {
            const ScenarioConfig a = load(cmp_a, cmp_opts);
            const ScenarioConfig b = load(cmp_b, cmp_opts);
            const Comparison c = compare_runs(a, b);
            const std::string dir = cmp_opts.out.value_or(a.output_dir);
            emit_comparison(c, dir, a.figures && !cmp_opts.no_figures);
            for (const RunOutcome* o : {&c.a, &c.b}) {
                std::printf("%s: %s", o->label.c_str(), o->verdict.c_str());
                if (o->record) {
                    std::printf(" (%s, worst terminal error %.4f V)", o->record->controller.c_str(),
                                o->record->summary.worst_terminal_error);
                }
                if (o->failure) std::printf(" (%s)", o->failure->message.c_str());
                std::printf("\n");
            }
            std::printf("wrote %s/comparison.json\n", dir.c_str());
        } else if (*val) {
            ScenarioConfig cfg = load(val_cfg, val_opts);
            if (val_opts.out) cfg.output_dir = *val_opts.out;
            if (print) std::cout << dump_config(cfg) << "\n";
            std::fprintf(print ? stderr : stdout, "ok: %s plant, %s controller, %ld samples, %ld primary steps per sample\n",
                        std::string(to_string(cfg.plant)).c_str(), std::string(to_string(cfg.controller)).c_str(),
                        cfg.timing.samples(), cfg.timing.primary_per_sample());
        }
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kOther;
    }
    return kOk;
}
