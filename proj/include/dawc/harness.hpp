#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dawc/experiment_config.hpp"
#include "dawc/frontend.hpp"
#include "dawc/linalg.hpp"
#include "dawc/recovery.hpp"

namespace dawc {

/// Indices into the sweep axes of an ExperimentConfig.
struct AxisIndex {
    int frontend = 0;
    int rate = 0;
    int snr = 0;
    int algorithm = 0;
};

/// One fully resolved sweep point; everything run_trial needs.
struct TrialPoint {
    AxisIndex index;
    SignalTemplate signal;
    FrontendConfig frontend;  // p, L and N resolved; seed set per trial
    double axis_value = 0.0;  // p or rate in Hz, as configured
    std::optional<double> snr_db;
    std::string algorithm = "mssp";
    double omega = 0.9;
    std::optional<int> sparsity;
    int max_iterations = 0;
    std::optional<double> reconstruction_snr_f;
};

struct TrialMetrics {
    std::uint64_t seed = 0;
    double pd = 0.0;
    double pf = 0.0;
    double nmse_measured = 1.0;
    double nmse_predicted = 1.0;
    double overall_rate_hz = 0.0;
    double elapsed_s = 0.0;
    int row_dimension = 0;
    IndexSet true_support;
    IndexSet estimated_support;
    int iterations = 0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

struct PdPf {
    double pd = 0.0;
    double pf = 0.0;
};

/// pd = |T n S| / |T|, pf = |S \ T| / (D - |T|). Throws when T is empty or
/// covers all D rows.
PdPf detection_metrics(const IndexSet& truth, const IndexSet& estimate, int D);

/// hash(base_seed, frontend, rate, snr, trial). The algorithm index is left
/// out so every algorithm sees the same instances.
std::uint64_t trial_seed(std::uint64_t base_seed, const AxisIndex& idx, int trial);

/// p for a total-rate axis value: CSSS uses R / f_s; DAWC first reserves
/// the worst-case reconstruction bandwidth B_max_total + 2 N_sig f_c.
int channels_for_rate(const FrontendTemplate& fe, const SignalTemplate& sig, double rate_hz);

/// Cartesian product of frontends x rate axis x snr axis x algorithms.
std::vector<TrialPoint> resolve_points(const ExperimentConfig& cfg);

/// Never throws for solver or instance failures; those come back with
/// failed = true and an empty estimate.
TrialMetrics run_trial(const TrialPoint& point, std::uint64_t seed);

struct SummaryRow {
    TrialPoint point;
    int trials = 0;
    int failed = 0;
    double mean_pd = 0.0;
    double stderr_pd = 0.0;
    double mean_pf = 0.0;
    double mean_nmse = 0.0;
    double mean_nmse_predicted = 0.0;
    double mean_rate_hz = 0.0;
    double elapsed_s = 0.0;
};

SummaryRow summarize(const TrialPoint& point, const std::vector<TrialMetrics>& trials);

struct SweepResult {
    std::vector<SummaryRow> rows;
    /// Per point, trials ordered by trial index.
    std::vector<std::vector<TrialMetrics>> trials;
    bool interrupted = false;
};

struct SweepOptions {
    std::optional<int> trials_override;
    /// 0 reads DAWC_WORKERS, falling back to hardware concurrency.
    int workers = 0;
    /// When set, CSVs (and the SVG) are rewritten after every point.
    std::optional<std::filesystem::path> out_dir;
    const std::atomic<bool>* stop = nullptr;
};

SweepResult sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});

int worker_count_from_env();

std::string summary_csv(const SweepResult& result);
std::string trials_csv(const SweepResult& result);
void write_summary_csv(const std::filesystem::path& path, const SweepResult& result);
void write_trials_csv(const std::filesystem::path& path, const SweepResult& result);
/// Mean Pd against the axis value, one series per frontend/algorithm/SNR.
void write_sweep_svg(const std::filesystem::path& path, const ExperimentConfig& cfg, const SweepResult& result);

/// Human-readable failures of the configured thresholds; empty when all hold.
std::vector<std::string> check_acceptance(const SweepResult& result, const AcceptanceThresholds& thr);

}  // namespace dawc
