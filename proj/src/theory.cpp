#include "dawc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dawc/recovery.hpp"
#include "dawc/svg_plot.hpp"

namespace dawc {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

double support_isometry_defect(const CMatrix& a, const IndexSet& support) {
    if (support.empty()) return 0.0;
    const CMatrix as = select_columns(a, support);
    const CMatrix g = as.adjoint() * as;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(ev.size() - 1) - 1.0), std::abs(1.0 - ev(0)));
}

namespace {

/// Max defect over all supports whose first element is `first`.
double enumerate_from(const CMatrix& a, int s, int first, std::uint64_t& count) {
    const int d = static_cast<int>(a.cols());
    IndexSet idx(static_cast<std::size_t>(s));
    idx[0] = first;
    for (int k = 1; k < s; ++k) idx[static_cast<std::size_t>(k)] = first + k;
    if (s > 0 && idx.back() >= d) return 0.0;
    double best = 0.0;
    while (true) {
        best = std::max(best, support_isometry_defect(a, idx));
        ++count;
        int k = s - 1;
        while (k >= 1 && idx[static_cast<std::size_t>(k)] == d - s + k) --k;
        if (k < 1) break;
        ++idx[static_cast<std::size_t>(k)];
        for (int m = k + 1; m < s; ++m) idx[static_cast<std::size_t>(m)] = idx[static_cast<std::size_t>(m - 1)] + 1;
    }
    return best;
}

}  // namespace

RicEstimate ric_exact(const CMatrix& a, int s, std::uint64_t budget) {
    const int d = static_cast<int>(a.cols());
    if (s < 0 || s > d) throw std::invalid_argument("support size outside [0, D]");
    const std::uint64_t total = binomial(d, s);
    if (total > budget)
        throw BudgetExceeded("C(" + std::to_string(d) + ", " + std::to_string(s) + ") exceeds the enumeration budget");
    RicEstimate est;
    est.s = s;
    est.mode = RicEstimate::Mode::exact;
    if (s == 0) {
        est.supports_checked = 1;
        return est;
    }
    const int firsts = d - s + 1;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(firsts)));

    // strided split of the first index; max is order independent
    std::vector<std::future<std::pair<double, std::uint64_t>>> jobs;
    for (int w = 0; w < workers; ++w) {
        jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, [&, w] {
            double best = 0.0;
            std::uint64_t count = 0;
            for (int f = w; f < firsts; f += workers) best = std::max(best, enumerate_from(a, s, f, count));
            return std::make_pair(best, count);
        }));
    }
    for (auto& j : jobs) {
        const auto [best, count] = j.get();
        est.delta = std::max(est.delta, best);
        est.supports_checked += count;
    }
    return est;
}

RicEstimate ric_sampled(const CMatrix& a, int s, std::uint64_t trials, std::uint64_t seed) {
    const int d = static_cast<int>(a.cols());
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (s < 0 || s > d) throw std::invalid_argument("support size outside [0, D]");
    if (trials >= binomial(d, s)) return ric_exact(a, s, std::numeric_limits<std::uint64_t>::max());

    RicEstimate est;
    est.s = s;
    est.mode = RicEstimate::Mode::sampled;
    std::mt19937_64 rng(seed);
    std::vector<int> pool(static_cast<std::size_t>(d));
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < s; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        IndexSet support(pool.begin(), pool.begin() + s);
        std::sort(support.begin(), support.end());
        est.delta = std::max(est.delta, support_isometry_defect(a, support));
        ++est.supports_checked;
    }
    return est;
}

int uniqueness_channel_bound(int s) {
    if (s < 0) throw std::invalid_argument("s must be non-negative");
    return 2 * s + 1;
}

SparsityBound sparsity_upper_bound(const std::vector<double>& bandwidths_hz, const FrontendConfig& cfg) {
    if (!cfg.is_dawc() || !(cfg.f_p_hz > 0.0) || !(cfg.f_c_hz > 0.0))
        throw std::invalid_argument("sparsity bound needs a dawc config with positive f_p and f_c");
    SparsityBound out;
    const double tol = 1e-9;
    for (double b : bandwidths_hz) {
        const double q = b / cfg.f_p_hz;
        double whole = std::floor(q + tol);
        double rem = b - whole * cfg.f_p_hz;
        if (rem <= tol * cfg.f_p_hz) rem = 0.0;  // exact multiple: ceil(0) = 0
        const int partial = rem > 0.0 ? static_cast<int>(std::ceil(rem / cfg.f_c_hz - tol)) : 0;
        const int bound = cfg.n * static_cast<int>(whole) + partial + 1;
        out.per_subband.push_back(bound);
        out.total += bound;
    }
    return out;
}

MinRateReport min_rate_check(const MultibandSpec& spec, const FrontendConfig& cfg) {
    if (!cfg.is_dawc() || cfg.n < 2) throw std::invalid_argument("minimum-rate check needs a dawc config");
    const double expect = (cfg.f_p_hz - cfg.f_s_hz) / (cfg.n - 1);
    if (std::abs(cfg.f_c_hz - expect) > 1e-9 * std::abs(expect))
        throw std::invalid_argument("hypothesis f_c = (f_p - f_s)/(n - 1) violated");
    if (!(cfg.f_s_hz < cfg.f_c_hz && cfg.f_c_hz < cfg.f_p_hz))
        throw std::invalid_argument("hypothesis f_s < f_c < f_p violated");

    std::vector<double> widths;
    for (const auto& sb : spec.subbands) widths.push_back(sb.bandwidth_hz);
    const SparsityBound sb = sparsity_upper_bound(widths, cfg);
    const double nsig = static_cast<double>(spec.subband_count());

    MinRateReport rep;
    rep.rhs_hz = spec.total_bandwidth_hz();
    rep.lhs_hz = 2.0 * sb.total * cfg.f_s_hz + 2.0 * nsig * cfg.f_c_hz;
    rep.satisfied = rep.lhs_hz <= rep.rhs_hz;
    rep.realized_support = static_cast<int>(oracle_support(spec, cfg).size());
    rep.realized_lhs_hz = 2.0 * rep.realized_support * cfg.f_s_hz + 2.0 * nsig * cfg.f_c_hz;
    rep.realized_satisfied = rep.realized_lhs_hz <= rep.rhs_hz;
    return rep;
}

double convergence_c(double gamma, double omega) {
    const double root = std::sqrt((1.0 + omega) * (1.0 + gamma)) + std::sqrt(1.0 - gamma);
    return 1.0 + root * root * (1.0 + gamma) / ((1.0 - gamma) * (1.0 - gamma));
}

Feasibility mssp_feasibility(double gamma, double omega) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (!(omega >= 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in [0, 1]");
    Feasibility f;
    f.gamma = gamma;
    f.omega = omega;
    f.C = convergence_c(gamma, omega);
    const double cw = f.C * omega * (2.0 - omega);
    const double miss = f.C * (1.0 - omega);
    f.gap = 1.0 + cw - miss * miss;
    f.unclipped_bound = (std::sqrt(1.0 + cw) - miss) / (f.C + 1.0);
    f.feasible = f.gap > 0.0;
    f.delta_bound = f.feasible ? std::min(gamma, f.unclipped_bound) : 0.0;
    return f;
}

ConvergenceConstants convergence_constants(double delta_3s, double omega) {
    if (!(delta_3s >= 0.0 && delta_3s < 1.0)) throw std::invalid_argument("delta_3s must lie in [0, 1)");
    if (!(omega >= 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in [0, 1]");
    const double d = delta_3s;
    ConvergenceConstants c;
    c.delta_3s = d;
    c.omega = omega;
    c.nu1 = 1.0 - omega + d;
    c.varrho = std::sqrt(1.0 + d);
    c.nu3 = (std::sqrt((1.0 + omega) * (1.0 + d)) + std::sqrt(1.0 - d)) / (1.0 - d);
    const double v2 = c.varrho * c.varrho;
    c.rho = std::sqrt((c.nu1 * c.nu1 + c.nu1 * c.nu1 * c.nu3 * c.nu3 * v2) / (1.0 - d * d));
    c.feasible = c.rho < 1.0;
    if (c.feasible && d < 0.5) {
        const double lhs = (std::sqrt(2.0 * v2 + 2.0 * c.nu3 * c.nu3 * v2 * v2) + c.nu3) / std::sqrt(1.0 - d * d) +
                           std::sqrt(1.0 + d) / (1.0 - 2.0 * d);
        c.tau = lhs / (1.0 - c.rho);
    } else {
        c.tau = std::numeric_limits<double>::quiet_NaN();
    }
    return c;
}

std::optional<int> iteration_bound(double rho, double tau, double x_norm, double e_norm) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
    if (!(x_norm > 0.0) || e_norm < 0.0 || !(tau >= 0.0)) throw std::invalid_argument("norms and tau out of domain");
    if (e_norm == 0.0) return std::nullopt;
    const double ratio = tau * e_norm / x_norm;
    if (ratio >= 1.0) return 0;
    if (rho == 0.0) return 1;
    const double v = std::log(ratio) / std::log(rho);
    return std::max(0, static_cast<int>(std::ceil(v - 1e-9)));
}

bool LemmaReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.passed; });
}

namespace {

CMatrix gaussian_unit(int p, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMatrix a(p, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < p; ++i) a(i, j) = cplx(g(rng), g(rng));
        a.col(j).normalize();
    }
    return a;
}

CMatrix gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

IndexSet random_subset(int d, int k, std::mt19937_64& rng) {
    std::vector<int> pool(static_cast<std::size_t>(d));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, d - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    IndexSet out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

CMatrix keep_rows(const CMatrix& x, const IndexSet& rows) {
    CMatrix out = CMatrix::Zero(x.rows(), x.cols());
    for (int r : rows) out.row(r) = x.row(r);
    return out;
}

void record(LemmaCheck& c, double lhs, double rhs) {
    const double slack = rhs - lhs;
    if (c.instances == 0 || slack < c.worst_slack) c.worst_slack = slack;
    ++c.instances;
    if (slack < -1e-9 * std::max(1.0, std::abs(rhs))) c.passed = false;
}

}  // namespace

LemmaReport lemma_identity_suite(std::uint64_t seed) {
    LemmaReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    LemmaCheck l3{"scalar_product_bound", true, 0.0, 0};
    std::uniform_real_distribution<double> u10(0.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const double a = u10(rng), b = u10(rng), c = u10(rng), d = u10(rng), x = u10(rng), y = u10(rng);
        const double lhs = a * (b * x + c * y) * (b * x + c * y) + d * y * y;
        const double r = std::sqrt(a) * b * x + std::sqrt(a * c * c + d) * y;
        record(l3, lhs, r * r);
    }
    rep.checks.push_back(l3);

    const int p = 10, d = 20, s = 2, ncols = 3;
    LemmaCheck l4{"selection_step", true, 0.0, 0};
    LemmaCheck l6{"weighted_gram", true, 0.0, 0};
    LemmaCheck l6w{"weighted_gram_unit_weight", true, 0.0, 0};
    LemmaCheck l7{"noise_correlation", true, 0.0, 0};

    for (int m = 0; m < 4; ++m) {
        const CMatrix a = gaussian_unit(p, d, rng);
        std::vector<double> ric(static_cast<std::size_t>(3 * s + 1), 0.0);
        for (int k = 1; k <= 3 * s; ++k) ric[static_cast<std::size_t>(k)] = ric_exact(a, k).delta;

        for (int inst = 0; inst < 25; ++inst) {
            const double omega = u01(rng);

            // One selection step against a previous estimate on a random support.
            {
                const IndexSet truth = random_subset(d, s, rng);
                const CMatrix x = keep_rows(gaussian(d, ncols, rng), truth);
                const double e_scale = inst % 3 == 0 ? 0.0 : 0.05 * u01(rng);
                const CMatrix e = e_scale * gaussian(p, ncols, rng);
                const CMatrix y = a * x + e;
                const IndexSet prev = random_subset(d, s, rng);
                const CMatrix x_prev = least_squares_on_support(a, y, prev);
                const CMatrix r = y - a * x_prev;
                const IndexSet side = random_subset(d, s, rng);
                const IndexSet merged = set_union(prev, weighted_select(a, r, side, omega, s));
                double lhs2 = 0.0;
                for (int j : truth)
                    if (!contains(merged, j)) lhs2 += x.row(j).squaredNorm();
                const double d3 = ric[static_cast<std::size_t>(3 * s)];
                const double nu1 = 1.0 - omega + d3;
                const double rhs = nu1 * (x - x_prev).norm() + std::sqrt(2.0 * (1.0 + d3)) * e.norm();
                record(l4, std::sqrt(lhs2), rhs);
            }

            // Weighted Gram bound: ||((I - W A^H A) V)^U|| <= (1 - w + delta_{t+s}) ||V||.
            {
                const int t = 1 + static_cast<int>(u01(rng) * 2);
                const int us = 1 + static_cast<int>(u01(rng) * s);
                const IndexSet vs = random_subset(d, t, rng);
                const IndexSet us_set = random_subset(d, us, rng);
                const IndexSet t0 = random_subset(d, 1 + static_cast<int>(u01(rng) * 6), rng);
                const CMatrix v = keep_rows(gaussian(d, ncols, rng), vs);
                Eigen::VectorXd w = Eigen::VectorXd::Constant(d, omega);
                for (int j : t0) w(j) = 1.0;
                const CMatrix mvec = v - w.asDiagonal() * (a.adjoint() * (a * v));
                const double lhs = keep_rows(mvec, us_set).norm();
                const int ts = std::min(d, t + s);
                record(l6, lhs, (1.0 - omega + ric[static_cast<std::size_t>(std::min(ts, 3 * s))]) * v.norm());

                // omega = 1: ||(I - A_S^H A_S)||_2 over S = U u V bounds the lhs too
                const IndexSet sset = set_union(us_set, vs);
                const CMatrix as = select_columns(a, sset);
                const CMatrix gdiff = CMatrix::Identity(as.cols(), as.cols()) - as.adjoint() * as;
                const double op = Eigen::JacobiSVD<CMatrix>(gdiff).singularValues()(0);
                const CMatrix m1 = v - a.adjoint() * (a * v);
                const double lhs1 = keep_rows(m1, us_set).norm();
                record(l6w, lhs1, op * v.norm());
                record(l6w, op, ric[static_cast<std::size_t>(static_cast<int>(sset.size()))]);
            }

            // Noise correlation with u = |U|.
            {
                const int us = inst % 5 == 0 ? 0 : 1 + static_cast<int>(u01(rng) * (3 * s));
                const IndexSet us_set = random_subset(d, us, rng);
                const IndexSet t0 = random_subset(d, 1 + static_cast<int>(u01(rng) * 6), rng);
                const CMatrix e = inst % 7 == 0 ? CMatrix::Zero(p, ncols) : gaussian(p, ncols, rng);
                Eigen::VectorXd w = Eigen::VectorXd::Constant(d, omega);
                for (int j : t0) w(j) = 1.0;
                const CMatrix wae = w.asDiagonal() * (a.adjoint() * e);
                const double lhs = keep_rows(wae, us_set).norm();
                record(l7, lhs, std::sqrt(1.0 + ric[static_cast<std::size_t>(us)]) * e.norm());
            }
        }
    }
    rep.checks.push_back(l4);
    rep.checks.push_back(l6);
    rep.checks.push_back(l6w);
    rep.checks.push_back(l7);
    return rep;
}

std::vector<Fig5Row> fig5_sweep(const std::vector<double>& gammas, double omega_step) {
    if (!(omega_step > 0.0 && omega_step <= 1.0)) throw std::invalid_argument("omega step must lie in (0, 1]");
    const int steps = static_cast<int>(std::llround(1.0 / omega_step));
    std::vector<Fig5Row> rows;
    for (double g : gammas) {
        for (int i = 0; i <= steps; ++i) {
            const double w = std::min(1.0, i * omega_step);
            const Feasibility f = mssp_feasibility(g, w);
            rows.push_back({g, w, f.gap, f.delta_bound});
        }
    }
    return rows;
}

int gap_sign_changes(const std::vector<Fig5Row>& rows, double gamma) {
    int changes = 0;
    int last = 0;
    for (const auto& r : rows) {
        if (r.gamma != gamma) continue;
        const int sign = r.gap > 0.0 ? 1 : (r.gap < 0.0 ? -1 : 0);
        if (sign == 0) continue;
        if (last != 0 && sign != last) ++changes;
        last = sign;
    }
    return changes;
}

void write_fig5_csv(const std::string& path, const std::vector<Fig5Row>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "gamma,omega,gap,delta_bound\n" << std::setprecision(12);
    for (const auto& r : rows) out << r.gamma << ',' << r.omega << ',' << r.gap << ',' << r.delta_bound << '\n';
}

void write_fig5_svg(const std::string& path, const std::vector<Fig5Row>& rows) {
    LineChart chart;
    chart.title = "RIC bound versus omega";
    chart.x_label = "omega";
    chart.y_label = "delta_3s bound";
    for (const auto& r : rows) {
        if (chart.series.empty() || chart.series.back().label != "gamma=" + std::to_string(r.gamma).substr(0, 3)) {
            chart.series.push_back({"gamma=" + std::to_string(r.gamma).substr(0, 3), {}, {}});
        }
        chart.series.back().x.push_back(r.omega);
        chart.series.back().y.push_back(r.delta_bound);
    }
    write_svg(path, chart);
}

}  // namespace dawc
