#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dawc/experiment_config.hpp"
#include "dawc/harness.hpp"
#include "dawc/svg_plot.hpp"

using namespace dawc;
using Catch::Approx;

namespace {

const std::filesystem::path kSource = DAWC_SOURCE_DIR;

ExperimentConfig small_config() { return load_config(kSource / "tests/data/small_mwc.json"); }

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

/// Drops the trailing elapsed_s column from every CSV line.
std::string without_elapsed(const std::string& csv) {
    std::istringstream in(csv);
    std::string out, line;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

bool same_metrics(const TrialMetrics& a, const TrialMetrics& b) {
    return a.seed == b.seed && a.pd == b.pd && a.pf == b.pf && a.nmse_measured == b.nmse_measured &&
           a.nmse_predicted == b.nmse_predicted && a.overall_rate_hz == b.overall_rate_hz &&
           a.row_dimension == b.row_dimension && a.true_support == b.true_support &&
           a.estimated_support == b.estimated_support && a.iterations == b.iterations && a.converged == b.converged &&
           a.failed == b.failed && a.error == b.error;
}

std::string config_error_field(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("detection metrics", "[harness]") {
    const auto m = detection_metrics({1, 2, 3}, {1, 2, 4}, 600);
    CHECK(m.pd == Approx(2.0 / 3.0));
    CHECK(m.pf == Approx(1.0 / 597.0));
    const auto perfect = detection_metrics({5, 6}, {5, 6}, 10);
    CHECK(perfect.pd == 1.0);
    CHECK(perfect.pf == 0.0);
    CHECK_THROWS_AS(detection_metrics({}, {1}, 10), std::invalid_argument);
    CHECK_THROWS_AS(detection_metrics({0, 1, 2}, {1}, 3), std::invalid_argument);
}

TEST_CASE("seeds ignore the algorithm index", "[harness]") {
    AxisIndex a{0, 1, 0, 0}, b{0, 1, 0, 3}, c{0, 2, 0, 0};
    CHECK(trial_seed(7, a, 4) == trial_seed(7, b, 4));
    CHECK(trial_seed(7, a, 4) != trial_seed(7, c, 4));
    CHECK(trial_seed(7, a, 4) != trial_seed(7, a, 5));
    CHECK(trial_seed(7, a, 4) != trial_seed(8, a, 4));
}

TEST_CASE("rate axis to channel count", "[harness]") {
    SignalTemplate sig{3, 3, {50e6}, 5e9, 20e-6};
    FrontendTemplate dawc_fe{Architecture::dawc, 100e6, 19.8e6, 1e6, 6, 6};
    CHECK(channels_for_rate(dawc_fe, sig, 300e6) == 31);
    FrontendTemplate mwc_fe{Architecture::mwc, 100e6, 0.0, 100e6, 1, 6};
    CHECK(channels_for_rate(mwc_fe, sig, 2300e6) == 23);
    CHECK(channels_for_rate(mwc_fe, sig, 300e6) == 3);
}

TEST_CASE("points are the full axis product", "[harness]") {
    auto cfg = load_config(kSource / "configs/rate_sweep.json");
    const auto pts = resolve_points(cfg);
    CHECK(pts.size() ==
          cfg.frontends.size() * cfg.sweep.values.size() * cfg.sweep.snr_db.size() * cfg.algorithms.size());
    for (const auto& p : pts) {
        CHECK(p.frontend.p >= 1);
        CHECK(p.frontend.N >= 1);
    }
}

TEST_CASE("noiseless trials with ample channels are exact", "[harness]") {
    // One column block: with r > 1 an edge row can be empty in some blocks,
    // and padding each block to the oracle sparsity adds false rows.
    for (const char* name : {"tests/data/small_mwc.json", "configs/min_rate_dawc.json"}) {
        auto cfg = load_config(kSource / name);
        cfg.signal.window_s = 2e-6;
        cfg.frontends[0].r = 1;
        cfg.sweep.kind = RateAxis::channels;
        cfg.sweep.values = {cfg.frontends[0].architecture == Architecture::dawc ? 60.0 : 16.0};
        cfg.sweep.snr_db = {std::nullopt};
        const auto pts = resolve_points(cfg);
        REQUIRE(pts.size() == 1);
        for (int t = 0; t < 10; ++t) {
            INFO(name << " trial " << t);
            const auto m = run_trial(pts[0], trial_seed(cfg.base_seed, pts[0].index, t));
            REQUIRE_FALSE(m.failed);
            CHECK(m.pd == 1.0);
            CHECK(m.pf == 0.0);
        }
    }
}

TEST_CASE("trials are deterministic", "[harness]") {
    const auto pts = resolve_points(small_config());
    for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL}) {
        const auto a = run_trial(pts[0], seed);
        const auto b = run_trial(pts[0], seed);
        CHECK(same_metrics(a, b));
        CHECK(a.pd >= 0.0);
        CHECK(a.pd <= 1.0);
        CHECK(a.pf >= 0.0);
        CHECK(a.pf <= 1.0);
    }
}

TEST_CASE("broken points fail softly", "[harness]") {
    auto pts = resolve_points(small_config());
    auto bad = pts[0];
    bad.algorithm = "lasso";
    const auto m = run_trial(bad, 3);
    CHECK(m.failed);
    CHECK_FALSE(m.error.empty());
    CHECK(m.pd == 0.0);
}

TEST_CASE("one point and one trial gives one row equal to the trial", "[harness]") {
    auto cfg = small_config();
    cfg.sweep.values = {8};
    SweepOptions opts;
    opts.trials_override = 1;
    opts.workers = 1;
    const auto res = sweep(cfg, opts);
    REQUIRE(res.rows.size() == 1);
    REQUIRE(res.trials.size() == 1);
    REQUIRE(res.trials[0].size() == 1);
    const auto direct = run_trial(res.rows[0].point, trial_seed(cfg.base_seed, res.rows[0].point.index, 0));
    CHECK(same_metrics(direct, res.trials[0][0]));
    CHECK(res.rows[0].mean_pd == direct.pd);
    CHECK(res.rows[0].mean_pf == direct.pf);
    CHECK(res.rows[0].mean_nmse == direct.nmse_measured);
    CHECK(res.rows[0].trials == 1);
}

TEST_CASE("summary rows are the means of the stored trials", "[harness]") {
    SweepOptions opts;
    opts.workers = 2;
    const auto res = sweep(small_config(), opts);
    REQUIRE(res.rows.size() == 2);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& tr = res.trials[i];
        double pd = 0, pf = 0, nmse = 0, pred = 0, rate = 0;
        for (const auto& m : tr) {
            pd += m.pd;
            pf += m.pf;
            nmse += m.nmse_measured;
            pred += m.nmse_predicted;
            rate += m.overall_rate_hz;
            CHECK(m.pd >= 0.0);
            CHECK(m.pd <= 1.0);
            CHECK(m.pf >= 0.0);
            CHECK(m.pf <= 1.0);
        }
        const double n = static_cast<double>(tr.size());
        CHECK(res.rows[i].mean_pd == Approx(pd / n).epsilon(1e-14));
        CHECK(res.rows[i].mean_pf == Approx(pf / n).epsilon(1e-14));
        CHECK(res.rows[i].mean_nmse == Approx(nmse / n).epsilon(1e-14));
        CHECK(res.rows[i].mean_nmse_predicted == Approx(pred / n).epsilon(1e-14));
        CHECK(res.rows[i].mean_rate_hz == Approx(rate / n).epsilon(1e-14));
        double var = 0;
        for (const auto& m : tr) var += (m.pd - pd / n) * (m.pd - pd / n);
        CHECK(res.rows[i].stderr_pd == Approx(std::sqrt(var / (n - 1) / n)).epsilon(1e-12).margin(1e-15));
    }
}

TEST_CASE("summary CSV has one row per point and deterministic content", "[harness]") {
    auto cfg = small_config();
    SweepOptions one, many;
    one.workers = 1;
    many.workers = 3;
    const auto a = sweep(cfg, one);
    const auto b = sweep(cfg, many);
    const auto csv = summary_csv(a);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(resolve_points(cfg).size()));
    CHECK(csv.substr(0, csv.find('\n')).find("mean_pd") != std::string::npos);
    CHECK(without_elapsed(csv) == without_elapsed(summary_csv(b)));
    CHECK(without_elapsed(trials_csv(a)) == without_elapsed(trials_csv(b)));
}

TEST_CASE("two-point sweep matches the frozen golden files", "[harness]") {
    const auto res = sweep(small_config(), SweepOptions{std::nullopt, 1, std::nullopt, nullptr});
    const auto golden = kSource / "tests/golden";
    REQUIRE(std::filesystem::exists(golden / "small_mwc_summary.csv"));
    CHECK(without_elapsed(summary_csv(res)) == without_elapsed(read_file(golden / "small_mwc_summary.csv")));
    CHECK(without_elapsed(trials_csv(res)) == without_elapsed(read_file(golden / "small_mwc_trials.csv")));
}

TEST_CASE("mean Pd does not fall as channels are added", "[harness]") {
    auto cfg = small_config();
    cfg.sweep.values = {4, 6, 8, 10, 12};
    cfg.trials = 40;
    SweepOptions opts;
    opts.workers = 1;
    const auto res = sweep(cfg, opts);
    REQUIRE(res.rows.size() == 5);
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& lo = res.rows[i - 1];
        const auto& hi = res.rows[i];
        INFO("p " << lo.point.frontend.p << " -> " << hi.point.frontend.p);
        CHECK(hi.mean_pd + 2.0 * std::hypot(hi.stderr_pd, lo.stderr_pd) >= lo.mean_pd);
    }
}

TEST_CASE("sweep writes outputs and honours the stop flag", "[harness]") {
    const auto dir = std::filesystem::temp_directory_path() / "dawc_harness_out";
    std::filesystem::remove_all(dir);
    auto cfg = small_config();
    SweepOptions opts;
    opts.workers = 1;
    opts.out_dir = dir;
    const auto res = sweep(cfg, opts);
    CHECK_FALSE(res.interrupted);
    CHECK(read_file(dir / cfg.outputs.summary_csv) == summary_csv(res));
    CHECK(read_file(dir / cfg.outputs.trials_csv) == trials_csv(res));
    CHECK(read_file(dir / cfg.outputs.svg).find("<svg") != std::string::npos);

    std::atomic<bool> stop{true};
    opts.stop = &stop;
    opts.out_dir.reset();
    const auto halted = sweep(cfg, opts);
    CHECK(halted.interrupted);
    CHECK(halted.rows.size() < 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("acceptance thresholds", "[harness]") {
    SweepResult res;
    SummaryRow row;
    row.mean_pd = 0.8;
    row.mean_pf = 0.05;
    row.mean_nmse = 0.02;
    res.rows.push_back(row);
    CHECK(check_acceptance(res, {0.7, 0.1, 0.03}).empty());
    CHECK(check_acceptance(res, {0.9, std::nullopt, std::nullopt}).size() == 1);
    CHECK(check_acceptance(res, {0.9, 0.01, 0.01}).size() == 3);
    CHECK(check_acceptance(res, {}).empty());
}

TEST_CASE("worker count comes from the environment", "[harness]") {
    ::setenv("DAWC_WORKERS", "3", 1);
    CHECK(worker_count_from_env() == 3);
    ::setenv("DAWC_WORKERS", "0", 1);
    CHECK(worker_count_from_env() >= 1);
    ::unsetenv("DAWC_WORKERS");
    CHECK(worker_count_from_env() >= 1);
}

TEST_CASE("configs round trip through JSON", "[config]") {
    for (const char* name : {"configs/min_rate_dawc.json", "configs/mwc_low_channels.json", "configs/rate_sweep.json",
                             "tests/data/small_mwc.json"}) {
        const auto cfg = load_config(kSource / name);
        CHECK(parse_config(config_to_json(cfg)) == cfg);
        CHECK_NOTHROW(validate_config(cfg));
    }
    auto cfg = small_config();
    cfg.sparsity = 4;
    cfg.blocks_N = 7;
    cfg.reconstruction_snr_f.reset();
    cfg.sweep.snr_db = {std::nullopt, 5.0};
    cfg.acceptance.min_pd = 0.5;
    cfg.signal.n_sig_min = 1;
    const auto path = std::filesystem::temp_directory_path() / "dawc_roundtrip.json";
    save_config(path, cfg);
    CHECK(load_config(path) == cfg);
    std::filesystem::remove(path);
}

TEST_CASE("malformed configs name the offending field", "[config]") {
    const std::string base = read_file(kSource / "tests/data/small_mwc.json");
    auto with = [&](const std::string& from, const std::string& to) {
        std::string s = base;
        const auto at = s.find(from);
        REQUIRE(at != std::string::npos);
        return s.replace(at, from.size(), to);
    };
    CHECK(config_error_field(base) == "<accepted>");
    CHECK(config_error_field(with("\"window_s\": 1e-6", "\"window_seconds\": 1e-6")) == "signal.window_seconds");
    CHECK(config_error_field(with("\"window_s\": 1e-6", "\"window_s\": \"1us\"")) == "signal.window_s");
    CHECK(config_error_field(with("\"snr_db\": [20]", "\"snr_db\": [20, \"loud\"]")) == "sweep.snr_db[1]");
    CHECK(config_error_field(with("\"architecture\": \"mwc\"", "\"architecture\": \"fft\"")) ==
          "frontends[0].architecture");
    CHECK(config_error_field(with("\"algorithms\": [\"mssp\"]", "\"algorithms\": [\"mssp\", \"lasso\"]")) ==
          "algorithms[1]");
    CHECK(config_error_field(with("\"trials\": 6", "\"trials\": 0")) == "trials");
    CHECK(config_error_field(with("\"omega\": 0.9", "\"omega\": 1.5")) == "omega");
    CHECK(config_error_field(with("\"channels\": [8, 12]", "\"channels\": [8, 12], \"rate_hz\": [1e9]")) == "sweep");
    CHECK(config_error_field("{ not json") == "$");
}

TEST_CASE("svg output is deterministic and labelled", "[plot]") {
    LineChart c;
    c.title = "t";
    c.x_label = "channels";
    c.y_label = "Pd";
    c.series.push_back({"mssp", {1, 2, 3}, {0.5, 0.7, 0.9}});
    c.series.push_back({"sp", {1, 2, 3}, {0.4, 0.6, 0.95}});
    const auto a = render_svg(c);
    CHECK(a == render_svg(c));
    CHECK(a.find("channels") != std::string::npos);
    CHECK(a.find("mssp") != std::string::npos);
    CHECK(a.find("<polyline") != std::string::npos);
}
