#include "dawc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dawc {

double SubbandBounds::total_width_hz() const {
    double w = 0.0;
    for (const auto& b : bounds) w += b.width_hz();
    return w;
}

std::vector<RowBlock> support_blocks(const IndexSet& support) {
    std::vector<RowBlock> out;
    for (int idx : support) {
        if (!out.empty() && idx == out.back().last + 1)
            out.back().last = idx;
        else
            out.push_back({idx, idx});
    }
    return out;
}

SubbandBounds subband_bounds(const std::vector<RowBlock>& blocks, const FrontendConfig& cfg) {
    SubbandBounds out;
    out.blocks = blocks;
    std::sort(out.blocks.begin(), out.blocks.end(),
              [](const RowBlock& a, const RowBlock& b) { return a.first < b.first; });

    std::vector<FrequencyBound> raw;
    for (const auto& blk : out.blocks) {
        if (blk.first > blk.last) throw std::invalid_argument("block with first > last");
        // segment_start range-checks both ends
        FrequencyBound fb;
        if (cfg.is_dawc()) {
            fb.lower_hz = segment_start(cfg, blk.first) - cfg.f_c_hz + cfg.f_s_hz;
            fb.upper_hz = segment_start(cfg, blk.last) + cfg.f_c_hz;
        } else {
            fb.lower_hz = segment_start(cfg, blk.first);
            fb.upper_hz = segment_start(cfg, blk.last) + cfg.f_s_hz;
        }
        raw.push_back(fb);
    }
    std::sort(raw.begin(), raw.end(),
              [](const FrequencyBound& a, const FrequencyBound& b) { return a.lower_hz < b.lower_hz; });
    for (const auto& fb : raw) {
        if (!out.bounds.empty() && fb.lower_hz < out.bounds.back().upper_hz) {
            auto& cur = out.bounds.back();
            cur.upper_hz = std::max(cur.upper_hz, fb.upper_hz);
            cur.merged = true;
        } else {
            out.bounds.push_back(fb);
        }
    }
    return out;
}

std::vector<FrequencyBound> clip_to_band(const std::vector<FrequencyBound>& bounds, double f_max_hz) {
    std::vector<FrequencyBound> out;
    for (auto b : bounds) {
        b.lower_hz = std::max(b.lower_hz, -f_max_hz);
        b.upper_hz = std::min(b.upper_hz, f_max_hz);
        if (b.upper_hz > b.lower_hz) out.push_back(b);
    }
    return out;
}

int default_eval_grid(const MultibandSpec& spec) {
    const double b = spec.min_bandwidth_hz();
    if (!(b > 0.0) || !(spec.window_s > 0.0)) return 2;
    return std::max(2, static_cast<int>(std::ceil(8.0 * spec.window_s * b - 1e-9)));
}

std::vector<double> eval_times(double window_s, int count) {
    if (count < 1) throw std::invalid_argument("evaluation grid must have at least one point");
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = i * window_s / count;
    return t;
}

namespace {

/// Mean |X(f)|^2 over the occupied band.
double mean_psd(const MultibandSpec& spec) {
    const double b = spec.total_bandwidth_hz();
    if (b <= 0.0) return 0.0;
    double e = 0.0;
    for (const auto& sb : spec.subbands) e += sb.amplitude * sb.amplitude / sb.bandwidth_hz;
    return e / b;
}

}  // namespace

ReconstructedWaveform reconstruct(const MultibandSpec& spec,
                                  const std::vector<FrequencyBound>& bounds,
                                  double window_s,
                                  int eval_grid,
                                  const std::optional<ChannelNoise>& noise) {
    if (!(window_s > 0.0)) throw std::invalid_argument("window must be positive");
    const double tol = 1e-9 * spec.f_max_hz;
    for (const auto& b : bounds) {
        if (!(b.upper_hz > b.lower_hz)) throw std::invalid_argument("empty reconstruction bound");
        if (b.lower_hz < -spec.f_max_hz - tol || b.upper_hz > spec.f_max_hz + tol)
            throw std::invalid_argument("reconstruction bound outside [-f_max, f_max]");
    }
    if (noise && !(noise->snr_f > 0.0)) throw std::invalid_argument("snr_f must be positive");

    ReconstructedWaveform out;
    out.times_s = eval_times(window_s, eval_grid);
    out.samples.assign(out.times_s.size(), cplx(0.0, 0.0));

    std::mt19937_64 rng(noise ? noise->seed : 0);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    const double psd = mean_psd(spec);

    for (const auto& b : bounds) {
        const double w = b.width_hz();
        const int m = std::max(2, static_cast<int>(std::ceil(window_s * w - 1e-9)));
        const double df = w / (m - 1);
        const double gain = m * df;
        std::vector<cplx> y(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) y[static_cast<std::size_t>(k)] = gain * spectrum_at(spec, b.lower_hz + k * df);
        if (noise) {
            const double sigma = gain * std::sqrt(psd / noise->snr_f);
            for (auto& v : y) v += sigma * cplx(g(rng), g(rng));
        }

        // (1/M) sum_k y_k exp(j 2 pi (F_min + k df) t), evaluated by Horner in z = exp(j 2 pi df t)
        for (std::size_t i = 0; i < out.times_s.size(); ++i) {
            const double t = out.times_s[i];
            const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * df * t);
            cplx acc = y.back();
            for (int k = m - 2; k >= 0; --k) acc = acc * z + y[static_cast<std::size_t>(k)];
            out.samples[i] += acc * std::polar(1.0 / m, 2.0 * std::numbers::pi * b.lower_hz * t);
        }
        out.channel_spectra.push_back(std::move(y));
        out.resolution_hz.push_back(df);
    }
    return out;
}

std::vector<cplx> reference_waveform(const MultibandSpec& spec, const std::vector<double>& times_s) {
    std::vector<cplx> out;
    out.reserve(times_s.size());
    for (double t : times_s) out.push_back(time_signal_at(spec, t));
    return out;
}

double nmse_measured(const std::vector<cplx>& x_hat, const std::vector<cplx>& x_ref) {
    if (x_hat.size() != x_ref.size()) throw std::invalid_argument("waveforms differ in length");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < x_ref.size(); ++i) {
        err += std::norm(x_hat[i] - x_ref[i]);
        ref += std::norm(x_ref[i]);
    }
    if (ref == 0.0) throw std::invalid_argument("reference waveform has zero energy");
    return err / ref;
}

double nmse_predicted(double rho_d, double rho_f, double snr_f, double band_hz, double occupied_hz) {
    return (rho_d + (band_hz - occupied_hz) / occupied_hz * rho_f) / snr_f + (1.0 - rho_d);
}

Coverage coverage(const MultibandSpec& spec, const std::vector<FrequencyBound>& bounds) {
    Coverage c;
    double width = 0.0;
    for (const auto& b : bounds) {
        width += b.width_hz();
        for (const auto& sb : spec.subbands) {
            const double lo = std::max(b.lower_hz, sb.lower_edge_hz());
            const double hi = std::min(b.upper_hz, sb.upper_edge_hz());
            if (hi > lo) c.detected_hz += hi - lo;
        }
    }
    c.false_hz = std::max(0.0, width - c.detected_hz);
    const double occupied = spec.total_bandwidth_hz();
    c.rho_d = occupied > 0.0 ? c.detected_hz / occupied : 0.0;
    const double rest = spec.nyquist_rate_hz() - occupied;
    c.rho_f = rest > 0.0 ? std::min(1.0, c.false_hz / rest) : 0.0;
    return c;
}

void write_bounds_csv(const std::filesystem::path& path, const SubbandBounds& b) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "index,F_min_Hz,F_max_Hz,merged\n" << std::setprecision(17);
    for (std::size_t i = 0; i < b.bounds.size(); ++i)
        out << i << ',' << b.bounds[i].lower_hz << ',' << b.bounds[i].upper_hz << ',' << (b.bounds[i].merged ? 1 : 0)
            << '\n';
}

void write_waveform_csv(const std::filesystem::path& path, const ReconstructedWaveform& w) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "t_s,re,im\n" << std::setprecision(17);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        out << w.times_s[i] << ',' << w.samples[i].real() << ',' << w.samples[i].imag() << '\n';
}

}  // namespace dawc
