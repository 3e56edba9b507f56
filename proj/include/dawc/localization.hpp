#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dawc/frontend.hpp"
#include "dawc/linalg.hpp"
#include "dawc/signal_model.hpp"

namespace dawc {

/// Maximal run of consecutive row indices, inclusive on both ends.
struct RowBlock {
    int first = 0;
    int last = 0;
    bool operator==(const RowBlock&) const = default;
};

struct SubbandBounds {
    /// Pre-merge blocks, sorted.
    std::vector<RowBlock> blocks;
    /// Estimated frequency ranges after overlapping ranges are united.
    std::vector<FrequencyBound> bounds;

    double total_width_hz() const;
};

std::vector<RowBlock> support_blocks(const IndexSet& support);

/// DAWC: [F(alpha) - f_c + f_s, F(beta) + f_c]. MWC/MCS rows are uniform
/// segments, so the bound is [start(alpha), start(beta) + f_s].
SubbandBounds subband_bounds(const std::vector<RowBlock>& blocks, const FrontendConfig& cfg);

/// Intersects every bound with [-f_max, f_max], dropping empty ones.
std::vector<FrequencyBound> clip_to_band(const std::vector<FrequencyBound>& bounds, double f_max_hz);

/// Additive white noise on the reconstruction-channel samples at a fixed
/// per-frequency SNR relative to the mean in-band signal PSD.
struct ChannelNoise {
    double snr_f = 100.0;
    std::uint64_t seed = 0;
};

struct ReconstructedWaveform {
    std::vector<double> times_s;
    std::vector<cplx> samples;
    std::vector<std::vector<cplx>> channel_spectra;
    std::vector<double> resolution_hz;
};

/// Default evaluation grid: 8 samples per 1 / B_min over the window.
int default_eval_grid(const MultibandSpec& spec);

/// Uniform time grid t_i = i T / count.
std::vector<double> eval_times(double window_s, int count);

/// Channel j samples M_j = max(2, ceil(T W_j)) points across its bound and
/// scales them by M_j * df_j so that the synthesis sum approximates the
/// inverse transform. Bounds must lie inside [-f_max, f_max].
ReconstructedWaveform reconstruct(const MultibandSpec& spec,
                                  const std::vector<FrequencyBound>& bounds,
                                  double window_s,
                                  int eval_grid,
                                  const std::optional<ChannelNoise>& noise = {});

/// time_signal_at over the same grid reconstruct() uses.
std::vector<cplx> reference_waveform(const MultibandSpec& spec, const std::vector<double>& times_s);

double nmse_measured(const std::vector<cplx>& x_hat, const std::vector<cplx>& x_ref);

double nmse_predicted(double rho_d, double rho_f, double snr_f, double band_hz, double occupied_hz);

/// Bandwidth detection and false-alarm ratios of estimated bounds.
struct Coverage {
    double detected_hz = 0.0;  // |estimate ∩ truth|
    double false_hz = 0.0;     // |estimate \ truth|
    double rho_d = 0.0;
    double rho_f = 0.0;
};

Coverage coverage(const MultibandSpec& spec, const std::vector<FrequencyBound>& bounds);

void write_bounds_csv(const std::filesystem::path& path, const SubbandBounds& b);
void write_waveform_csv(const std::filesystem::path& path, const ReconstructedWaveform& w);

}  // namespace dawc
