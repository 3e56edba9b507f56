// Command-line front end: validate, trial, sweep, theory.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dawc/experiment_config.hpp"
#include "dawc/harness.hpp"
#include "dawc/theory.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kAcceptanceFailure = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

int cmd_validate(const std::string& path) {
    const dawc::ExperimentConfig cfg = dawc::load_config(path);
    const auto points = dawc::resolve_points(cfg);
    double b_min = cfg.signal.bandwidth_pool_hz.front();
    for (double b : cfg.signal.bandwidth_pool_hz) b_min = std::min(b_min, b);

    bool usable = true;
    int last_fe = -1, last_rate = -1;
    for (const auto& pt : points) {
        if (pt.index.frontend == last_fe && pt.index.rate == last_rate) continue;
        last_fe = pt.index.frontend;
        last_rate = pt.index.rate;
        const auto& fc = pt.frontend;
        dawc::MultibandSpec probe;
        probe.f_max_hz = cfg.signal.f_max_hz;
        probe.window_s = cfg.signal.window_s;
        probe.subbands.push_back({1.0, b_min, 0.0, 0.0});
        const auto rep = dawc::validate_params(fc, &probe);
        usable = usable && rep.usable();
        std::cout << "frontend " << pt.index.frontend << " (" << dawc::to_string(fc.architecture) << ") axis "
                  << pt.axis_value << ": p=" << fc.p << " L=" << fc.L << " D=" << fc.row_count() << " r=" << fc.r
                  << " N=" << fc.N << '\n';
        std::cout << "  ordering=" << rep.ordering << " disjoint=" << rep.disjoint << " exact_tiling=" << rep.exact_tiling
                  << " integral_L=" << rep.integral_L << " compressive=" << rep.compressive
                  << " dimensions=" << rep.dimensions;
        if (rep.narrowband) std::cout << " narrowband=" << *rep.narrowband;
        std::cout << '\n';
        for (const auto& msg : rep.messages) std::cout << "  note: " << msg << '\n';
    }
    std::cout << (usable ? "config ok\n" : "config unusable\n");
    return usable ? kOk : kConfigError;
}

int cmd_trial(const std::string& path, std::uint64_t seed, int point_index) {
    const dawc::ExperimentConfig cfg = dawc::load_config(path);
    const auto points = dawc::resolve_points(cfg);
    if (point_index < 0 || point_index >= static_cast<int>(points.size()))
        throw dawc::ConfigError("--point", "outside [0, " + std::to_string(points.size()) + ")");
    const auto m = dawc::run_trial(points[static_cast<std::size_t>(point_index)], seed);
    nlohmann::json j = {{"seed", m.seed},
                        {"pd", m.pd},
                        {"pf", m.pf},
                        {"nmse_measured", m.nmse_measured},
                        {"nmse_predicted", m.nmse_predicted},
                        {"overall_rate_hz", m.overall_rate_hz},
                        {"elapsed_s", m.elapsed_s},
                        {"row_dimension", m.row_dimension},
                        {"true_support", m.true_support},
                        {"estimated_support", m.estimated_support},
                        {"iterations", m.iterations},
                        {"converged", m.converged},
                        {"failed", m.failed},
                        {"error", m.error}};
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int cmd_sweep(const std::string& path, std::optional<int> trials, const std::string& out, bool assert_thresholds,
              int workers) {
    const dawc::ExperimentConfig cfg = dawc::load_config(path);
    if (trials && *trials < 1) throw dawc::ConfigError("--trials", "must be at least 1");
    std::signal(SIGINT, on_sigint);
    dawc::SweepOptions opts;
    opts.trials_override = trials;
    opts.workers = workers;
    opts.out_dir = std::filesystem::path(out);
    opts.stop = &g_stop;
    const auto res = dawc::sweep(cfg, opts);
    std::cout << dawc::summary_csv(res);
    if (res.interrupted) {
        std::cerr << "interrupted; partial results written to " << out << '\n';
        return 130;
    }
    if (assert_thresholds) {
        const auto failures = dawc::check_acceptance(res, cfg.acceptance);
        for (const auto& f : failures) std::cerr << "FAIL " << f << '\n';
        if (!failures.empty()) return kAcceptanceFailure;
        std::cerr << "all acceptance thresholds met\n";
    }
    return kOk;
}

int cmd_theory(bool fig5, const std::string& out) {
    if (!fig5) {
        std::cerr << "nothing to do; pass --fig5\n";
        return kConfigError;
    }
    std::filesystem::create_directories(out);
    const std::vector<double> gammas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto rows = dawc::fig5_sweep(gammas, 1e-3);
    const auto csv = (std::filesystem::path(out) / "fig5.csv").string();
    const auto svg = (std::filesystem::path(out) / "fig5.svg").string();
    dawc::write_fig5_csv(csv, rows);
    dawc::write_fig5_svg(svg, rows);
    for (double g : gammas)
        std::cout << "gamma=" << g << " gap sign changes=" << dawc::gap_sign_changes(rows, g) << '\n';
    const auto spot = dawc::mssp_feasibility(0.1, 1.0);
    std::cout << "gamma=0.1 omega=1: C=" << spot.C << " delta_bound=" << spot.delta_bound
              << " unclipped=" << spot.unclipped_bound << '\n';
    std::cout << "wrote " << csv << " and " << svg << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-frequency aliasing wideband converter simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int point = 0, workers = 0;
    std::optional<int> trials;
    bool assert_flag = false, fig5 = false;

    auto* validate = app.add_subcommand("validate", "check a config and report front-end parameters");
    validate->add_option("--config", config_path, "experiment config (JSON)")->required();

    auto* trial = app.add_subcommand("trial", "run one seeded trial and print its metrics");
    trial->add_option("--config", config_path, "experiment config (JSON)")->required();
    trial->add_option("--seed", seed, "trial seed")->required();
    trial->add_option("--point", point, "sweep point index (default 0)");

    auto* sweep = app.add_subcommand("sweep", "run the full Monte Carlo sweep");
    sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--trials", trials, "override the trial count");
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--workers", workers, "worker threads (default: DAWC_WORKERS or all cores)");
    sweep->add_flag("--assert", assert_flag, "exit 2 when a configured acceptance threshold fails");

    auto* theory = app.add_subcommand("theory", "emit theory curves");
    theory->add_flag("--fig5", fig5, "RIC bound and feasibility gap against omega");
    theory->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*validate) return cmd_validate(config_path);
        if (*trial) return cmd_trial(config_path, seed, point);
        if (*sweep) return cmd_sweep(config_path, trials, out_dir, assert_flag, workers);
        if (*theory) return cmd_theory(fig5, out_dir);
    } catch (const dawc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
