#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dawc/linalg.hpp"
#include "dawc/signal_model.hpp"

namespace dawc {

enum class Architecture { dawc, mwc, mcs };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view name);

/// Sampling front end parameters.
///
/// For DAWC each f_p-wide interval holds `n` segments of width f_s spaced
/// f_c apart, giving n*L rows. MWC and MCS tile the band uniformly with
/// f_s = f_p wide segments, giving L rows; f_c and n are ignored there.
struct FrontendConfig {
    Architecture architecture = Architecture::dawc;
    double f_p_hz = 0.0;
    double f_c_hz = 0.0;
    double f_s_hz = 0.0;
    int n = 2;
    int p = 1;
    int L = 1;
    int r = 6;
    int N = 1;
    std::uint64_t seed = 0;

    bool is_dawc() const { return architecture == Architecture::dawc; }
    /// Row dimension D of the signal matrix.
    int row_count() const { return is_dawc() ? n * L : L; }
    int column_count() const { return r * N; }
    double nyquist_rate_hz() const { return L * f_p_hz; }

    bool operator==(const FrontendConfig&) const = default;
};

/// Sets N so that r*N covers T*f_s columns (rounded up).
FrontendConfig with_window(FrontendConfig cfg, double window_s);

struct ValidationReport {
    bool ordering = true;       // f_s < f_c < f_p
    bool disjoint = true;       // f_s + (n-1) f_c <= f_p
    bool exact_tiling = true;   // f_s + (n-1) f_c == f_p
    bool integral_L = true;     // L >= 1 and L f_p == 2 f_max when a spec is given
    bool compressive = true;    // p <= D
    bool dimensions = true;     // p, r, N positive, rN > 1
    std::optional<bool> narrowband;  // f_c - f_s < min B_j, only with a spec
    std::vector<std::string> messages;

    /// Everything needed to build matrices and measure holds.
    bool usable() const { return ordering && disjoint && integral_L && dimensions; }
};

ValidationReport validate_params(const FrontendConfig& cfg,
                                 const MultibandSpec* spec = nullptr);

/// Lowest frequency of the segment sampled by 0-based row `row`
/// (the DAWC frequency map for xi = row + 1). Throws std::out_of_range.
double segment_start(const FrontendConfig& cfg, int row);

/// Whether the segment sampled from `start` meets the subband. DAWC uses
/// the closed segment [start, start + f_s]; MWC/MCS segments tile the band,
/// so they are half-open and a grid-aligned subband hits a single row.
bool segment_meets(const FrontendConfig& cfg, double start, const Subband& sb);

/// Column frequency offsets q f_s / (rN - 1), q = 0..rN-1.
std::vector<double> column_offsets(const FrontendConfig& cfg);

CMatrix build_dawc_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg);
CMatrix build_csss_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg);
/// Dispatches on the architecture.
CMatrix build_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg);

/// p x D sensing matrix with unit-norm columns, seeded by cfg.seed.
CMatrix draw_sensing_matrix(const FrontendConfig& cfg);

struct MeasurementSet {
    CMatrix A;
    CMatrix X;
    CMatrix Y;
    CMatrix E;
    std::optional<double> snr_db;  // empty for noiseless
    std::uint64_t seed = 0;

    double realized_snr_db() const;
};

/// Y = A X + E with E circular Gaussian scaled to the requested SNR.
/// E is stored as Y - A X so the identity holds bit for bit.
MeasurementSet measure(const CMatrix& A,
                       const CMatrix& X,
                       std::optional<double> snr_db,
                       std::uint64_t seed);

struct FrequencyBound {
    double lower_hz = 0.0;
    double upper_hz = 0.0;
    bool merged = false;

    double width_hz() const { return upper_hz - lower_hz; }
};

/// p f_s plus the reconstruction-channel bandwidths when bounds are given.
double overall_rate(const FrontendConfig& cfg,
                    const std::vector<FrequencyBound>* bounds = nullptr);

}  // namespace dawc
