#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dawc/linalg.hpp"

namespace dawc {

struct FrontendConfig;

/// One modulated sinc pulse: A * sinc(B (t - t0)) * exp(j 2 pi fc t).
struct Subband {
    double amplitude = 1.0;
    double bandwidth_hz = 0.0;
    double carrier_hz = 0.0;
    double delay_s = 0.0;

    double lower_edge_hz() const { return carrier_hz - 0.5 * bandwidth_hz; }
    double upper_edge_hz() const { return carrier_hz + 0.5 * bandwidth_hz; }

    bool operator==(const Subband&) const = default;
};

/// Ground-truth multiband signal. Subbands occupy disjoint half-open
/// intervals [fc - B/2, fc + B/2) inside [-f_max, f_max).
struct MultibandSpec {
    std::vector<Subband> subbands;
    double f_max_hz = 0.0;
    double window_s = 0.0;

    std::size_t subband_count() const { return subbands.size(); }
    double total_bandwidth_hz() const;
    double nyquist_rate_hz() const { return 2.0 * f_max_hz; }
    double min_bandwidth_hz() const;

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;

    bool operator==(const MultibandSpec&) const = default;
};

/// Normalized sinc, sin(pi u) / (pi u).
double sinc(double u);

/// Draws `n_sig` disjoint subbands with bandwidths from `bandwidth_pool_hz`,
/// carriers uniform in [-f_max + B/2, f_max - B/2] and delays uniform in
/// [0.1 T, 0.9 T]. Whole draws are rejected until disjoint; throws
/// std::runtime_error once `max_attempts` draws have failed.
MultibandSpec make_random_spec(int n_sig,
                               const std::vector<double>& bandwidth_pool_hz,
                               double f_max_hz,
                               double window_s,
                               std::uint64_t seed,
                               int max_attempts = 1000);

/// Closed-form Fourier transform of the infinite-support sinc model: A/B
/// times the delay phase inside a subband, half of that on its two edges.
cplx spectrum_at(const MultibandSpec& spec, double f_hz);

cplx time_signal_at(const MultibandSpec& spec, double t_s);

/// Rows whose sampled segment meets the signal support (see segment_meets).
/// Rows are 0-based; row k corresponds to xi = k + 1.
IndexSet oracle_support(const MultibandSpec& spec, const FrontendConfig& cfg);

std::string to_json(const MultibandSpec& spec);
MultibandSpec spec_from_json(const std::string& text);

}  // namespace dawc
