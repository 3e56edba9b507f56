#include "dawc/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dawc {

namespace {

bool close_rel(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::string_view to_string(Architecture a) {
    switch (a) {
        case Architecture::dawc: return "dawc";
        case Architecture::mwc: return "mwc";
        case Architecture::mcs: return "mcs";
    }
    return "unknown";
}

Architecture architecture_from_string(std::string_view name) {
    if (name == "dawc") return Architecture::dawc;
    if (name == "mwc") return Architecture::mwc;
    if (name == "mcs") return Architecture::mcs;
    throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

FrontendConfig with_window(FrontendConfig cfg, double window_s) {
    if (!(window_s > 0.0) || cfg.r < 1) throw std::invalid_argument("window and r must be positive");
    const double cols = window_s * cfg.f_s_hz / cfg.r;
    cfg.N = std::max(1, static_cast<int>(std::ceil(cols - 1e-9)));
    return cfg;
}

ValidationReport validate_params(const FrontendConfig& cfg, const MultibandSpec* spec) {
    ValidationReport rep;
    auto note = [&](bool& flag, bool ok, const std::string& msg) {
        flag = ok;
        if (!ok) rep.messages.push_back(msg);
    };
    std::ostringstream os;

    if (cfg.is_dawc()) {
        note(rep.ordering, cfg.f_s_hz > 0.0 && cfg.f_s_hz < cfg.f_c_hz && cfg.f_c_hz < cfg.f_p_hz,
             "ordering f_s < f_c < f_p violated");
        const double span = cfg.f_s_hz + (cfg.n - 1) * cfg.f_c_hz;
        note(rep.disjoint, span <= cfg.f_p_hz * (1.0 + 1e-12), "segments overlap: f_s + (n-1) f_c > f_p");
        note(rep.exact_tiling, close_rel(span, cfg.f_p_hz), "f_s + (n-1) f_c != f_p");
    } else {
        note(rep.ordering, cfg.f_s_hz > 0.0 && cfg.f_p_hz > 0.0, "f_s and f_p must be positive");
        note(rep.disjoint, cfg.f_s_hz <= cfg.f_p_hz * (1.0 + 1e-12), "segments overlap: f_s > f_p");
        note(rep.exact_tiling, close_rel(cfg.f_s_hz, cfg.f_p_hz), "uniform tiling needs f_s == f_p");
    }

    bool l_ok = cfg.L >= 1;
    if (l_ok && spec) l_ok = close_rel(cfg.L * cfg.f_p_hz, spec->nyquist_rate_hz());
    note(rep.integral_L, l_ok, "L f_p must equal the Nyquist rate with integral L >= 1");

    note(rep.compressive, cfg.p <= cfg.row_count(), "p exceeds the row dimension");

    bool dims = cfg.p >= 1 && cfg.r >= 1 && cfg.N >= 1 && cfg.r * cfg.N > 1;
    if (cfg.is_dawc()) dims = dims && cfg.n >= 2;
    note(rep.dimensions, dims, "need p, r, N >= 1, rN > 1 and n >= 2 for dawc");

    if (spec && cfg.is_dawc() && !spec->subbands.empty()) {
        const bool nb = cfg.f_c_hz - cfg.f_s_hz < spec->min_bandwidth_hz();
        rep.narrowband = nb;
        if (!nb) rep.messages.push_back("narrowband condition f_c - f_s < min B violated");
    }
    return rep;
}

double segment_start(const FrontendConfig& cfg, int row) {
    if (row < 0 || row >= cfg.row_count())
        throw std::out_of_range("row " + std::to_string(row) + " outside [0, " +
                                std::to_string(cfg.row_count()) + ")");
    const int half = cfg.L / 2;
    if (cfg.is_dawc()) {
        const int m = row / cfg.n;
        const int k = row % cfg.n;
        return (m - half) * cfg.f_p_hz + k * cfg.f_c_hz;
    }
    return (row - half) * cfg.f_s_hz;
}

bool segment_meets(const FrontendConfig& cfg, double start, const Subband& sb) {
    const double end = start + cfg.f_s_hz;
    if (cfg.is_dawc()) return sb.lower_edge_hz() <= end && start < sb.upper_edge_hz();
    return sb.lower_edge_hz() < end && start < sb.upper_edge_hz();
}

std::vector<double> column_offsets(const FrontendConfig& cfg) {
    const int cols = cfg.column_count();
    if (cols <= 1) throw std::invalid_argument("rN must exceed 1");
    std::vector<double> out(static_cast<std::size_t>(cols));
    for (int q = 0; q < cols; ++q) out[static_cast<std::size_t>(q)] = q * cfg.f_s_hz / (cols - 1);
    return out;
}

namespace {

CMatrix sample_rows(const MultibandSpec& spec, const FrontendConfig& cfg) {
    const auto offsets = column_offsets(cfg);
    const int d = cfg.row_count();
    CMatrix x = CMatrix::Zero(d, static_cast<Eigen::Index>(offsets.size()));
    for (int row = 0; row < d; ++row) {
        const double start = segment_start(cfg, row);
        bool hit = false;
        for (const auto& sb : spec.subbands) hit = hit || segment_meets(cfg, start, sb);
        if (!hit) continue;
        for (std::size_t q = 0; q < offsets.size(); ++q)
            x(row, static_cast<Eigen::Index>(q)) = spectrum_at(spec, start + offsets[q]);
    }
    return x;
}

}  // namespace

CMatrix build_dawc_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg) {
    if (!cfg.is_dawc()) throw std::invalid_argument("build_dawc_signal_matrix needs a dawc config");
    const auto rep = validate_params(cfg);
    if (!rep.disjoint || !rep.ordering) throw std::invalid_argument("dawc segments are not disjoint");
    return sample_rows(spec, cfg);
}

CMatrix build_csss_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg) {
    if (cfg.is_dawc()) throw std::invalid_argument("build_csss_signal_matrix needs an mwc or mcs config");
    return sample_rows(spec, cfg);
}

CMatrix build_signal_matrix(const MultibandSpec& spec, const FrontendConfig& cfg) {
    return cfg.is_dawc() ? build_dawc_signal_matrix(spec, cfg) : build_csss_signal_matrix(spec, cfg);
}

CMatrix draw_sensing_matrix(const FrontendConfig& cfg) {
    const int d = cfg.row_count();
    if (cfg.p < 1 || d < 1) throw std::invalid_argument("sensing matrix needs p >= 1 and D >= 1");
    std::mt19937_64 rng(cfg.seed);

    if (cfg.architecture == Architecture::mcs) {
        if (cfg.p > cfg.L) throw std::invalid_argument("mcs needs p <= L");
        std::vector<int> cosets(static_cast<std::size_t>(cfg.L));
        std::iota(cosets.begin(), cosets.end(), 0);
        for (int i = 0; i < cfg.p; ++i) {
            std::uniform_int_distribution<int> pick(i, cfg.L - 1);
            std::swap(cosets[static_cast<std::size_t>(i)], cosets[static_cast<std::size_t>(pick(rng))]);
        }
        cosets.resize(static_cast<std::size_t>(cfg.p));
        std::sort(cosets.begin(), cosets.end());
        CMatrix a(cfg.p, d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.p));
        const int half = cfg.L / 2;
        for (int i = 0; i < cfg.p; ++i) {
            for (int col = 0; col < d; ++col) {
                // reduce the product mod L before scaling to keep the phase exact
                const long long prod = static_cast<long long>(cosets[static_cast<std::size_t>(i)]) * (col - half);
                const long long red = ((prod % cfg.L) + cfg.L) % cfg.L;
                const double phase = -2.0 * std::numbers::pi * static_cast<double>(red) / cfg.L;
                a(i, col) = std::polar(scale, phase);
            }
        }
        return a;
    }

    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMatrix a(cfg.p, d);
    for (int col = 0; col < d; ++col)
        for (int i = 0; i < cfg.p; ++i) a(i, col) = cplx(g(rng), g(rng));
    for (int col = 0; col < d; ++col) {
        const double nrm = a.col(col).norm();
        if (nrm == 0.0) throw std::runtime_error("degenerate sensing column");
        a.col(col) /= nrm;
    }
    return a;
}

double MeasurementSet::realized_snr_db() const {
    const double noise = E.squaredNorm();
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    const CMatrix ax = A * X;
    return 10.0 * std::log10(ax.squaredNorm() / noise);
}

MeasurementSet measure(const CMatrix& A, const CMatrix& X, std::optional<double> snr_db, std::uint64_t seed) {
    if (A.cols() != X.rows()) throw std::invalid_argument("A and X are not conformable");
    MeasurementSet ms;
    ms.A = A;
    ms.X = X;
    ms.snr_db = snr_db;
    ms.seed = seed;
    const CMatrix ax = A * X;
    if (!snr_db) {
        ms.Y = ax;
        ms.E = CMatrix::Zero(ax.rows(), ax.cols());
        return ms;
    }
    const double signal = ax.norm();
    if (signal == 0.0) throw std::invalid_argument("A X is zero; SNR is undefined");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMatrix e(ax.rows(), ax.cols());
    for (Eigen::Index c = 0; c < e.cols(); ++c)
        for (Eigen::Index r = 0; r < e.rows(); ++r) e(r, c) = cplx(g(rng), g(rng));
    e *= signal * std::pow(10.0, -*snr_db / 20.0) / e.norm();
    ms.Y = ax + e;
    ms.E = ms.Y - ax;
    return ms;
}

double overall_rate(const FrontendConfig& cfg, const std::vector<FrequencyBound>* bounds) {
    double rate = cfg.p * cfg.f_s_hz;
    if (bounds)
        for (const auto& b : *bounds) rate += b.width_hz();
    return rate;
}

}  // namespace dawc
