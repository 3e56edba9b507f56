#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dawc/frontend.hpp"

namespace dawc {

/// Malformed configuration. what() starts with the offending field path,
/// e.g. "sweep.snr_db[1]: expected number or null".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct SignalTemplate {
    int n_sig_min = 3;
    int n_sig_max = 3;
    std::vector<double> bandwidth_pool_hz;
    double f_max_hz = 0.0;
    double window_s = 0.0;

    bool operator==(const SignalTemplate&) const = default;
};

/// Front end without p, N and seed; those are filled per axis point/trial.
struct FrontendTemplate {
    Architecture architecture = Architecture::dawc;
    double f_p_hz = 0.0;
    double f_c_hz = 0.0;
    double f_s_hz = 0.0;
    int n = 1;
    int r = 6;

    bool operator==(const FrontendTemplate&) const = default;
};

enum class RateAxis { channels, rate_hz };

struct SweepAxes {
    RateAxis kind = RateAxis::channels;
    /// Channel counts p, or total rates in Hz, depending on `kind`.
    std::vector<double> values;
    /// Empty entries mean noiseless.
    std::vector<std::optional<double>> snr_db;

    bool operator==(const SweepAxes&) const = default;
};

struct AcceptanceThresholds {
    std::optional<double> min_pd;
    std::optional<double> max_pf;
    std::optional<double> max_nmse;

    bool any() const { return min_pd || max_pf || max_nmse; }
    bool operator==(const AcceptanceThresholds&) const = default;
};

struct OutputPaths {
    std::string summary_csv = "summary.csv";
    std::string trials_csv = "trials.csv";
    std::string svg = "pd.svg";  // empty disables the plot

    bool operator==(const OutputPaths&) const = default;
};

struct ExperimentConfig {
    std::string name = "experiment";
    SignalTemplate signal;
    std::vector<FrontendTemplate> frontends;
    SweepAxes sweep;
    std::vector<std::string> algorithms{"mssp"};
    double omega = 0.9;
    /// Empty: s = |oracle support| per trial.
    std::optional<int> sparsity;
    int max_iterations = 0;
    /// SNR_f of the reconstruction channels; empty skips channel noise.
    std::optional<double> reconstruction_snr_f = 100.0;
    /// Pins N; otherwise derived from the window.
    std::optional<int> blocks_N;
    int trials = 200;
    std::uint64_t base_seed = 1;
    OutputPaths outputs;
    AcceptanceThresholds acceptance;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError on any missing, mistyped or out-of-range field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string config_to_json(const ExperimentConfig& cfg);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// Checks cross-field invariants; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

}  // namespace dawc
