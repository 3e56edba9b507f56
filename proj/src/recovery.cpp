#include "dawc/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace dawc {

namespace {

constexpr double kSvdCutoff = 1e-10;

/// Indices of the `s` largest scores; ties go to the smallest index.
IndexSet top_s(const std::vector<double>& scores, const IndexSet& labels, int s) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        if (scores[static_cast<std::size_t>(x)] != scores[static_cast<std::size_t>(y)])
            return scores[static_cast<std::size_t>(x)] > scores[static_cast<std::size_t>(y)];
        return labels[static_cast<std::size_t>(x)] < labels[static_cast<std::size_t>(y)];
    });
    IndexSet out;
    for (int k = 0; k < s && k < static_cast<int>(order.size()); ++k)
        out.push_back(labels[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
    std::sort(out.begin(), out.end());
    return out;
}

IndexSet iota_set(int n) {
    IndexSet out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

struct Projector {
    CMatrix u;  // orthonormal basis of range(A_S), rank columns
    int rank = 0;
};

Projector range_basis(const CMatrix& a_s) {
    Projector pr;
    if (a_s.cols() == 0) {
        pr.u = CMatrix(a_s.rows(), 0);
        return pr;
    }
    Eigen::JacobiSVD<CMatrix> svd(a_s, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = kSvdCutoff * (sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cut) ++rank;
    pr.rank = rank;
    pr.u = svd.matrixU().leftCols(rank);
    return pr;
}

double residual_energy(const CMatrix& a, const CMatrix& y, const IndexSet& support) {
    const Projector pr = range_basis(select_columns(a, support));
    return (y - pr.u * (pr.u.adjoint() * y)).squaredNorm();
}

void check_common(const CMatrix& a, const CMatrix& y, int s) {
    if (y.rows() != a.rows()) throw std::invalid_argument("measurement rows do not match A");
    if (s < 1) throw std::invalid_argument("sparsity must be at least 1");
    if (s > a.rows()) throw std::invalid_argument("sparsity exceeds the number of measurements");
    if (s > a.cols()) throw std::invalid_argument("sparsity exceeds the number of columns");
}

}  // namespace

IndexSet RecoveryOutput::support_union() const {
    IndexSet out;
    for (const auto& s : supports) out = set_union(out, s);
    return out;
}

std::vector<CMatrix> split_columns(const CMatrix& y, int r) {
    if (r < 1 || y.cols() % r != 0) throw std::invalid_argument("cannot split columns into equal blocks");
    const Eigen::Index w = y.cols() / r;
    std::vector<CMatrix> out;
    for (int i = 0; i < r; ++i) out.push_back(y.middleCols(i * w, w));
    return out;
}

void require_unit_columns(const CMatrix& a, double tol) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (std::abs(a.col(j).norm() - 1.0) > tol)
            throw std::invalid_argument("column " + std::to_string(j) + " of A is not unit norm");
}

IndexSet weighted_select(const CMatrix& a, const CMatrix& residual, const IndexSet& side_info, double omega, int s) {
    if (s > a.cols()) throw std::invalid_argument("sparsity exceeds the number of columns");
    const Eigen::VectorXd energy = (a.adjoint() * residual).rowwise().squaredNorm();
    const double w = omega * omega;
    std::vector<double> scores(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        scores[static_cast<std::size_t>(j)] = contains(side_info, static_cast<int>(j)) ? energy(j) : w * energy(j);
    return top_s(scores, iota_set(static_cast<int>(a.cols())), s);
}

RemovalScores removal_scores(const CMatrix& a, const CMatrix& y, const IndexSet& merged) {
    RemovalScores out;
    const std::size_t t = merged.size();
    out.residual_after_removal.assign(t, 0.0);
    const CMatrix a_t = select_columns(a, merged);
    if (t == 0) {
        out.residual_full = y.squaredNorm();
        return out;
    }

    bool deficient = static_cast<Eigen::Index>(t) > a.rows();
    Eigen::JacobiSVD<CMatrix> svd;
    if (!deficient) {
        svd.compute(a_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        deficient = sv(sv.size() - 1) <= kSvdCutoff * sv(0);
    }

    if (deficient) {
        out.explicit_fallback = true;
        out.residual_full = residual_energy(a, y, merged);
        // residuals at rounding level are exact ties; they are common once
        // the merge set spans the whole measurement space
        const double floor = 1e-12 * y.squaredNorm();
        for (std::size_t k = 0; k < t; ++k) {
            IndexSet rest = merged;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
            const double v = residual_energy(a, y, rest);
            out.residual_after_removal[k] = v <= floor ? 0.0 : v;
        }
        // minimum-norm analogue of the downdating term, used to order ties
        Eigen::JacobiSVD<CMatrix> psvd(a_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = psvd.singularValues();
        Eigen::VectorXd inv2 = Eigen::VectorXd::Zero(sv.size());
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > kSvdCutoff * sv(0)) inv(k) = 1.0 / sv(k), inv2(k) = inv(k) * inv(k);
        const CMatrix x_hat = psvd.matrixV() * (inv.asDiagonal() * (psvd.matrixU().adjoint() * y));
        out.tie_break.assign(t, 0.0);
        for (std::size_t k = 0; k < t; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double g = psvd.matrixV().row(kk).cwiseAbs2().transpose().cwiseProduct(inv2).sum();
            out.tie_break[k] = g > 0.0 ? x_hat.row(kk).squaredNorm() / g : 0.0;
        }
        return out;
    }

    // ||P_perp(T\j) Y||^2 = ||P_perp(T) Y||^2 + ||Xhat_j||^2 / [G^-1]_jj
    const CMatrix& u = svd.matrixU();
    const CMatrix& v = svd.matrixV();
    const Eigen::VectorXd inv_sv = svd.singularValues().cwiseInverse();
    const CMatrix uy = u.adjoint() * y;
    out.residual_full = (y - u * uy).squaredNorm();
    const CMatrix x_hat = v * (inv_sv.asDiagonal() * uy);
    const Eigen::VectorXd inv_sv2 = inv_sv.cwiseAbs2();
    for (std::size_t k = 0; k < t; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double g_inv_jj = (v.row(kk).cwiseAbs2().transpose().cwiseProduct(inv_sv2)).sum();
        out.residual_after_removal[k] = out.residual_full + x_hat.row(kk).squaredNorm() / g_inv_jj;
    }
    out.tie_break = out.residual_after_removal;
    return out;
}

IndexSet si_prune(const CMatrix& a,
                  const CMatrix& y,
                  const IndexSet& merged,
                  const IndexSet& side_info,
                  double omega,
                  int s,
                  bool* fell_back,
                  PruneWeighting weighting) {
    if (static_cast<int>(merged.size()) <= s) {
        if (fell_back) *fell_back = false;
        return merged;
    }
    const RemovalScores rs = removal_scores(a, y, merged);
    if (fell_back) *fell_back = rs.explicit_fallback;
    std::vector<double> scores = rs.residual_after_removal;
    std::vector<double> ties = rs.tie_break;
    if (weighting == PruneWeighting::increment) {
        // the common ||P_perp(T) Y||^2 term does not change the order
        for (std::size_t k = 0; k < merged.size(); ++k) {
            scores[k] = std::max(0.0, scores[k] - rs.residual_full);
            ties[k] = std::max(0.0, ties[k] - (rs.explicit_fallback ? 0.0 : rs.residual_full));
        }
    }
    for (std::size_t k = 0; k < merged.size(); ++k) {
        if (contains(side_info, merged[k])) {
            scores[k] *= 1.0 + omega;
            ties[k] *= 1.0 + omega;
        }
    }
    std::vector<int> order(merged.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
        if (scores[ux] != scores[uy]) return scores[ux] > scores[uy];
        if (ties[ux] != ties[uy]) return ties[ux] > ties[uy];
        return merged[ux] < merged[uy];
    });
    IndexSet out;
    for (int k = 0; k < s; ++k) out.push_back(merged[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
    std::sort(out.begin(), out.end());
    return out;
}

CMatrix least_squares_on_support(const CMatrix& a, const CMatrix& y, const IndexSet& support, LeastSquaresInfo* info) {
    CMatrix x = CMatrix::Zero(a.cols(), y.cols());
    if (support.empty()) {
        if (info) *info = {};
        return x;
    }
    const CMatrix a_s = select_columns(a, support);
    Eigen::JacobiSVD<CMatrix> svd(a_s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = kSvdCutoff * sv(0);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cut) ++rank;
    CMatrix coef = CMatrix::Zero(static_cast<Eigen::Index>(support.size()), y.cols());
    if (rank > 0) {
        const CMatrix uy = svd.matrixU().leftCols(rank).adjoint() * y;
        coef = svd.matrixV().leftCols(rank) * (sv.head(rank).cwiseInverse().asDiagonal() * uy);
    }
    for (std::size_t k = 0; k < support.size(); ++k) x.row(support[k]) = coef.row(static_cast<Eigen::Index>(k));
    if (info) {
        info->rank = rank;
        info->rank_deficient = rank < static_cast<int>(support.size());
    }
    return x;
}

RecoveryOutput mssp(const CMatrix& a, const std::vector<CMatrix>& blocks, const MsspConfig& cfg) {
    if (blocks.empty()) throw std::invalid_argument("mssp needs at least one block");
    const int s = cfg.sparsity;
    for (const auto& b : blocks) {
        check_common(a, b, s);
        if (b.cols() != blocks.front().cols()) throw std::invalid_argument("blocks differ in width");
    }
    if (!(cfg.omega >= 0.0 && cfg.omega <= 1.0)) throw std::invalid_argument("omega must lie in [0, 1]");
    require_unit_columns(a);

    const std::size_t r = blocks.size();
    double y_energy = 0.0;
    for (const auto& b : blocks) y_energy += b.squaredNorm();
    const double eps = cfg.residual_tolerance.value_or(1e-6 * std::sqrt(y_energy));
    const int max_it = cfg.max_iterations > 0 ? cfg.max_iterations : std::min(2 * s, 50);

    RecoveryOutput out;
    out.supports.assign(r, IndexSet{});
    out.estimates.assign(r, CMatrix::Zero(a.cols(), blocks.front().cols()));
    out.residual_norms.assign(r, 0.0);
    std::vector<CMatrix> residual = blocks;

    double prev_total = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int k = 1; k <= max_it; ++k) {
        // side information is frozen at the start of the iteration
        std::vector<IndexSet> side(r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                if (j != i) side[i] = set_union(side[i], out.supports[j]);

        std::vector<IndexSet> next(r);
        double total = 0.0;
        bool all_small = true;
        for (std::size_t i = 0; i < r; ++i) {
            const IndexSet picked = weighted_select(a, residual[i], side[i], cfg.omega, s);
            const IndexSet merged = set_union(out.supports[i], picked);
            bool fell_back = false;
            next[i] = si_prune(a, blocks[i], merged, side[i], cfg.omega, s, &fell_back, cfg.prune_weighting);
            if (fell_back) ++out.rank_deficient_prunes;
            out.estimates[i] = least_squares_on_support(a, blocks[i], next[i]);
            residual[i] = blocks[i] - a * out.estimates[i];
            out.residual_norms[i] = residual[i].norm();
            total += residual[i].squaredNorm();
            all_small = all_small && out.residual_norms[i] <= eps;
        }
        out.supports = std::move(next);
        out.iterations_used = k;
        if (all_small) {
            out.converged = true;
            break;
        }
        total = std::sqrt(total);
        stalled = total >= prev_total * (1.0 - 1e-12) ? stalled + 1 : 0;
        if (stalled >= 3) break;
        prev_total = total;
    }
    return out;
}

IndexSet somp(const CMatrix& a, const CMatrix& y, int s) {
    check_common(a, y, s);
    IndexSet support;
    CMatrix r = y;
    for (int k = 0; k < s; ++k) {
        const Eigen::VectorXd energy = (a.adjoint() * r).rowwise().squaredNorm();
        int best = -1;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (contains(support, static_cast<int>(j))) continue;
            if (best < 0 || energy(j) > energy(best)) best = static_cast<int>(j);
        }
        support = set_union(support, IndexSet{best});
        r = y - a * least_squares_on_support(a, y, support);
    }
    return support;
}

IndexSet sp_mmv(const CMatrix& a, const CMatrix& y, int s, std::optional<double> tolerance) {
    MsspConfig cfg;
    cfg.sparsity = s;
    cfg.omega = 1.0;
    cfg.residual_tolerance = tolerance;
    return mssp(a, {y}, cfg).supports.front();
}

IndexSet ssmp(const CMatrix& a, const CMatrix& y, int s, std::optional<double> tolerance) {
    check_common(a, y, s);
    const double eps = tolerance.value_or(1e-6 * y.norm());
    IndexSet support;
    CMatrix r = y;
    while (static_cast<int>(support.size()) < s) {
        if (r.norm() <= eps && !support.empty()) break;
        // signal subspace of the residual
        Eigen::JacobiSVD<CMatrix> svd(r, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > kSvdCutoff * sv(0)) ++rank;
        const int keep = std::max(1, std::min(rank, s - static_cast<int>(support.size())));
        const CMatrix u = svd.matrixU().leftCols(std::min<Eigen::Index>(keep, svd.matrixU().cols()));

        const Projector ps = range_basis(select_columns(a, support));
        const CMatrix b = a - ps.u * (ps.u.adjoint() * a);
        const CMatrix ub = u.adjoint() * b;
        int best = -1;
        double best_score = -1.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (contains(support, static_cast<int>(j))) continue;
            const double nb = b.col(j).squaredNorm();
            const double score = nb > kSvdCutoff ? ub.col(j).squaredNorm() / nb : 0.0;
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(j);
            }
        }
        support = set_union(support, IndexSet{best});
        r = y - a * least_squares_on_support(a, y, support);
    }
    return support;
}

IndexSet mp_mmv(const CMatrix& a, const CMatrix& y, int s) {
    check_common(a, y, s);
    CMatrix coef = CMatrix::Zero(a.cols(), y.cols());
    CMatrix r = y;
    for (int k = 0; k < s; ++k) {
        const CMatrix corr = a.adjoint() * r;
        const Eigen::VectorXd energy = corr.rowwise().squaredNorm();
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < a.cols(); ++j)
            if (energy(j) > energy(best)) best = j;
        const double nrm2 = a.col(best).squaredNorm();
        const CMatrix step = corr.row(best) / nrm2;
        coef.row(best) += step;
        r -= a.col(best) * step;
    }
    IndexSet support = nonzero_rows(coef);
    if (support.empty()) support.push_back(0);
    return support;
}

bool is_known_algorithm(std::string_view algorithm) {
    return algorithm == "mssp" || algorithm == "somp" || algorithm == "sp" || algorithm == "ssmp" ||
           algorithm == "mp";
}

RecoveryOutput recover(std::string_view algorithm, const CMatrix& a, const std::vector<CMatrix>& blocks,
                       const MsspConfig& cfg) {
    if (!is_known_algorithm(algorithm)) throw std::invalid_argument("unknown algorithm '" + std::string(algorithm) + "'");
    if (blocks.empty()) throw std::invalid_argument("no measurement blocks");
    if (algorithm == "mssp") {
        if (blocks.size() == 1 && cfg.block_count > 1) return mssp(a, split_columns(blocks.front(), cfg.block_count), cfg);
        return mssp(a, blocks, cfg);
    }

    Eigen::Index width = 0;
    for (const auto& b : blocks) width += b.cols();
    CMatrix y(a.rows(), width);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        if (b.rows() != a.rows()) throw std::invalid_argument("measurement rows do not match A");
        y.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    require_unit_columns(a);

    RecoveryOutput out;
    IndexSet support;
    if (algorithm == "somp") {
        support = somp(a, y, cfg.sparsity);
    } else if (algorithm == "sp") {
        MsspConfig one = cfg;
        one.omega = 1.0;
        RecoveryOutput sp = mssp(a, {y}, one);
        return sp;
    } else if (algorithm == "ssmp") {
        support = ssmp(a, y, cfg.sparsity, cfg.residual_tolerance);
    } else {
        support = mp_mmv(a, y, cfg.sparsity);
    }
    const CMatrix est = least_squares_on_support(a, y, support);
    const double res = (y - a * est).norm();
    const double eps = cfg.residual_tolerance.value_or(1e-6 * y.norm());
    out.supports = {support};
    out.estimates = {est};
    out.residual_norms = {res};
    out.iterations_used = static_cast<int>(support.size());
    out.converged = res <= eps;
    return out;
}

}  // namespace dawc
