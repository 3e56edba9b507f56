#include "dawc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dawc/localization.hpp"
#include "dawc/signal_model.hpp"
#include "dawc/svg_plot.hpp"

namespace dawc {

namespace {

enum SeedStream : std::uint64_t { kSpec = 1, kFrontend = 2, kNoise = 3, kChannel = 4, kCount = 5 };

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string snr_label(const std::optional<double>& snr) { return snr ? num(*snr) : std::string("noiseless"); }

std::string join_indices(const IndexSet& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(s[i]);
    }
    return out;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    return s;
}

}  // namespace

PdPf detection_metrics(const IndexSet& truth, const IndexSet& estimate, int D) {
    if (truth.empty()) throw std::invalid_argument("true support is empty");
    if (static_cast<int>(truth.size()) >= D) throw std::invalid_argument("true support covers every row");
    PdPf m;
    m.pd = static_cast<double>(set_intersection(truth, estimate).size()) / static_cast<double>(truth.size());
    m.pf = static_cast<double>(set_difference(estimate, truth).size()) / static_cast<double>(D - static_cast<int>(truth.size()));
    return m;
}

std::uint64_t trial_seed(std::uint64_t base_seed, const AxisIndex& idx, int trial) {
    std::uint64_t h = mix_seed(base_seed);
    for (std::uint64_t part : {static_cast<std::uint64_t>(idx.frontend), static_cast<std::uint64_t>(idx.rate),
                               static_cast<std::uint64_t>(idx.snr), static_cast<std::uint64_t>(trial)})
        h = derive_seed(h, part);
    return h;
}

int channels_for_rate(const FrontendTemplate& fe, const SignalTemplate& sig, double rate_hz) {
    double budget = rate_hz;
    if (fe.architecture == Architecture::dawc) {
        const double b_max = *std::max_element(sig.bandwidth_pool_hz.begin(), sig.bandwidth_pool_hz.end());
        budget -= sig.n_sig_max * b_max + 2.0 * sig.n_sig_max * fe.f_c_hz;
    }
    return static_cast<int>(std::floor(budget / fe.f_s_hz + 1e-9));
}

std::vector<TrialPoint> resolve_points(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<TrialPoint> out;
    for (std::size_t fi = 0; fi < cfg.frontends.size(); ++fi) {
        const auto& fe = cfg.frontends[fi];
        for (std::size_t ri = 0; ri < cfg.sweep.values.size(); ++ri) {
            const double v = cfg.sweep.values[ri];
            const int p = cfg.sweep.kind == RateAxis::channels ? static_cast<int>(v) : channels_for_rate(fe, cfg.signal, v);
            if (p < 1)
                throw ConfigError("sweep.rate_hz[" + std::to_string(ri) + "]",
                                  "leaves no sampling channels for frontends[" + std::to_string(fi) + "]");
            FrontendConfig fc;
            fc.architecture = fe.architecture;
            fc.f_p_hz = fe.f_p_hz;
            fc.f_c_hz = fe.f_c_hz;
            fc.f_s_hz = fe.f_s_hz;
            fc.n = fe.n;
            fc.r = fe.r;
            fc.p = p;
            fc.L = static_cast<int>(std::lround(2.0 * cfg.signal.f_max_hz / fe.f_p_hz));
            fc = with_window(fc, cfg.signal.window_s);
            if (cfg.blocks_N) fc.N = *cfg.blocks_N;
            for (std::size_t si = 0; si < cfg.sweep.snr_db.size(); ++si) {
                for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
                    TrialPoint tp;
                    tp.index = {static_cast<int>(fi), static_cast<int>(ri), static_cast<int>(si), static_cast<int>(ai)};
                    tp.signal = cfg.signal;
                    tp.frontend = fc;
                    tp.axis_value = v;
                    tp.snr_db = cfg.sweep.snr_db[si];
                    tp.algorithm = cfg.algorithms[ai];
                    tp.omega = cfg.omega;
                    tp.sparsity = cfg.sparsity;
                    tp.max_iterations = cfg.max_iterations;
                    tp.reconstruction_snr_f = cfg.reconstruction_snr_f;
                    out.push_back(tp);
                }
            }
        }
    }
    return out;
}

TrialMetrics run_trial(const TrialPoint& point, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialMetrics m;
    m.seed = seed;
    m.row_dimension = point.frontend.row_count();
    try {
        std::mt19937_64 count_rng(derive_seed(seed, kCount));
        std::uniform_int_distribution<int> count(point.signal.n_sig_min, point.signal.n_sig_max);
        const int n_sig = count(count_rng);
        const MultibandSpec spec = make_random_spec(n_sig, point.signal.bandwidth_pool_hz, point.signal.f_max_hz,
                                                    point.signal.window_s, derive_seed(seed, kSpec));
        FrontendConfig cfg = point.frontend;
        cfg.seed = derive_seed(seed, kFrontend);

        m.true_support = oracle_support(spec, cfg);
        const CMatrix x = build_signal_matrix(spec, cfg);
        const CMatrix a = draw_sensing_matrix(cfg);
        const MeasurementSet ms = measure(a, x, point.snr_db, derive_seed(seed, kNoise));

        MsspConfig mc;
        mc.sparsity = point.sparsity.value_or(static_cast<int>(m.true_support.size()));
        mc.omega = point.omega;
        mc.max_iterations = point.max_iterations;
        mc.block_count = cfg.r;
        const RecoveryOutput rec = recover(point.algorithm, a, split_columns(ms.Y, cfg.r), mc);
        m.estimated_support = rec.support_union();
        m.iterations = rec.iterations_used;
        m.converged = rec.converged;

        const PdPf dm = detection_metrics(m.true_support, m.estimated_support, m.row_dimension);
        m.pd = dm.pd;
        m.pf = dm.pf;

        const SubbandBounds sb = subband_bounds(support_blocks(m.estimated_support), cfg);
        m.overall_rate_hz = cfg.is_dawc() ? overall_rate(cfg, &sb.bounds) : overall_rate(cfg);
        const auto bounds = clip_to_band(sb.bounds, spec.f_max_hz);

        std::optional<ChannelNoise> noise;
        if (point.reconstruction_snr_f) noise = ChannelNoise{*point.reconstruction_snr_f, derive_seed(seed, kChannel)};
        const ReconstructedWaveform w = reconstruct(spec, bounds, spec.window_s, default_eval_grid(spec), noise);
        m.nmse_measured = nmse_measured(w.samples, reference_waveform(spec, w.times_s));
        const Coverage cov = coverage(spec, bounds);
        const double snr_f = point.reconstruction_snr_f.value_or(std::numeric_limits<double>::infinity());
        m.nmse_predicted = nmse_predicted(cov.rho_d, cov.rho_f, snr_f, spec.nyquist_rate_hz(), spec.total_bandwidth_hz());
    } catch (const std::exception& e) {
        m.failed = true;
        m.converged = false;
        m.error = e.what();
        m.estimated_support.clear();
        m.pd = 0.0;
        m.pf = 0.0;
        m.nmse_measured = 1.0;
        m.nmse_predicted = 1.0;
    }
    m.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

SummaryRow summarize(const TrialPoint& point, const std::vector<TrialMetrics>& trials) {
    SummaryRow row;
    row.point = point;
    row.trials = static_cast<int>(trials.size());
    if (trials.empty()) return row;
    for (const auto& t : trials) {
        row.failed += t.failed ? 1 : 0;
        row.mean_pd += t.pd;
        row.mean_pf += t.pf;
        row.mean_nmse += t.nmse_measured;
        row.mean_nmse_predicted += t.nmse_predicted;
        row.mean_rate_hz += t.overall_rate_hz;
        row.elapsed_s += t.elapsed_s;
    }
    const double n = static_cast<double>(trials.size());
    row.mean_pd /= n;
    row.mean_pf /= n;
    row.mean_nmse /= n;
    row.mean_nmse_predicted /= n;
    row.mean_rate_hz /= n;
    if (trials.size() > 1) {
        double ss = 0.0;
        for (const auto& t : trials) ss += (t.pd - row.mean_pd) * (t.pd - row.mean_pd);
        row.stderr_pd = std::sqrt(ss / (n - 1.0) / n);
    }
    return row;
}

int worker_count_from_env() {
    if (const char* env = std::getenv("DAWC_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

void flush(const std::filesystem::path& dir, const ExperimentConfig& cfg, const SweepResult& res) {
    std::filesystem::create_directories(dir);
    write_summary_csv(dir / cfg.outputs.summary_csv, res);
    write_trials_csv(dir / cfg.outputs.trials_csv, res);
    if (!cfg.outputs.svg.empty()) write_sweep_svg(dir / cfg.outputs.svg, cfg, res);
}

}  // namespace

SweepResult sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
    ExperimentConfig effective = cfg;
    if (opts.trials_override) effective.trials = *opts.trials_override;
    const std::vector<TrialPoint> points = resolve_points(effective);
    const int trials = effective.trials;
    const int workers = std::max(1, std::min(opts.workers > 0 ? opts.workers : worker_count_from_env(), trials));

    SweepResult res;
    for (const auto& point : points) {
        std::vector<TrialMetrics> records(static_cast<std::size_t>(trials));
        std::vector<char> done(static_cast<std::size_t>(trials), 0);
        std::atomic<int> next{0};
        auto work = [&] {
            while (true) {
                if (opts.stop && opts.stop->load()) return;
                const int t = next.fetch_add(1);
                if (t >= trials) return;
                records[static_cast<std::size_t>(t)] = run_trial(point, trial_seed(effective.base_seed, point.index, t));
                done[static_cast<std::size_t>(t)] = 1;
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }

        std::vector<TrialMetrics> kept;
        for (int t = 0; t < trials; ++t)
            if (done[static_cast<std::size_t>(t)]) kept.push_back(std::move(records[static_cast<std::size_t>(t)]));
        const bool partial = static_cast<int>(kept.size()) < trials;
        if (!kept.empty()) {
            res.rows.push_back(summarize(point, kept));
            res.trials.push_back(std::move(kept));
        }
        if (partial) res.interrupted = true;
        if (opts.out_dir) flush(*opts.out_dir, effective, res);
        if (res.interrupted) break;
    }
    return res;
}

std::string summary_csv(const SweepResult& result) {
    std::ostringstream o;
    o << "point,architecture,algorithm,axis_value,p,D,snr_db,trials,failed,mean_pd,stderr_pd,mean_pf,mean_nmse,"
         "mean_nmse_predicted,mean_rate_hz,elapsed_s\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        o << i << ',' << to_string(r.point.frontend.architecture) << ',' << r.point.algorithm << ','
          << num(r.point.axis_value) << ',' << r.point.frontend.p << ',' << r.point.frontend.row_count() << ','
          << snr_label(r.point.snr_db) << ',' << r.trials << ',' << r.failed << ',' << num(r.mean_pd) << ','
          << num(r.stderr_pd) << ',' << num(r.mean_pf) << ',' << num(r.mean_nmse) << ','
          << num(r.mean_nmse_predicted) << ',' << num(r.mean_rate_hz) << ',' << num(r.elapsed_s) << '\n';
    }
    return o.str();
}

std::string trials_csv(const SweepResult& result) {
    std::ostringstream o;
    o << "point,trial,seed,pd,pf,nmse_measured,nmse_predicted,overall_rate_hz,iterations,converged,failed,"
         "true_support,estimated_support,error,elapsed_s\n";
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        for (std::size_t t = 0; t < result.trials[i].size(); ++t) {
            const auto& m = result.trials[i][t];
            o << i << ',' << t << ',' << m.seed << ',' << num(m.pd) << ',' << num(m.pf) << ','
              << num(m.nmse_measured) << ',' << num(m.nmse_predicted) << ',' << num(m.overall_rate_hz) << ','
              << m.iterations << ',' << (m.converged ? 1 : 0) << ',' << (m.failed ? 1 : 0) << ','
              << join_indices(m.true_support) << ',' << join_indices(m.estimated_support) << ','
              << sanitize(m.error) << ',' << num(m.elapsed_s) << '\n';
        }
    }
    return o.str();
}

void write_summary_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << summary_csv(result);
}

void write_trials_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << trials_csv(result);
}

void write_sweep_svg(const std::filesystem::path& path, const ExperimentConfig& cfg, const SweepResult& result) {
    LineChart chart;
    chart.title = cfg.name + ": detection probability";
    const bool rate = cfg.sweep.kind == RateAxis::rate_hz;
    chart.x_label = rate ? "total rate (MHz)" : "channels p";
    chart.y_label = "mean Pd";
    chart.y_lo = 0.0;
    chart.y_hi = 1.0;
    for (const auto& r : result.rows) {
        const std::string label = std::string(to_string(r.point.frontend.architecture)) + "/" + r.point.algorithm +
                                  " " + snr_label(r.point.snr_db) + (r.point.snr_db ? " dB" : "");
        auto it = std::find_if(chart.series.begin(), chart.series.end(), [&](const Series& s) { return s.label == label; });
        if (it == chart.series.end()) {
            chart.series.push_back({label, {}, {}});
            it = chart.series.end() - 1;
        }
        it->x.push_back(rate ? r.point.axis_value / 1e6 : r.point.axis_value);
        it->y.push_back(r.mean_pd);
    }
    write_svg(path.string(), chart);
}

std::vector<std::string> check_acceptance(const SweepResult& result, const AcceptanceThresholds& thr) {
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        const std::string tag = "point " + std::to_string(i) + " (" + std::string(to_string(r.point.frontend.architecture)) +
                                "/" + r.point.algorithm + ", axis " + num(r.point.axis_value) + ", snr " +
                                snr_label(r.point.snr_db) + ")";
        if (thr.min_pd && r.mean_pd < *thr.min_pd)
            failures.push_back(tag + ": mean Pd " + num(r.mean_pd) + " < " + num(*thr.min_pd));
        if (thr.max_pf && r.mean_pf > *thr.max_pf)
            failures.push_back(tag + ": mean Pf " + num(r.mean_pf) + " > " + num(*thr.max_pf));
        if (thr.max_nmse && r.mean_nmse > *thr.max_nmse)
            failures.push_back(tag + ": mean NMSE " + num(r.mean_nmse) + " > " + num(*thr.max_nmse));
    }
    return failures;
}

}  // namespace dawc
