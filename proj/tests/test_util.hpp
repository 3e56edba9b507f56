#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <random>

#include "dawc/linalg.hpp"

namespace dawc::test {

/// Circular Gaussian p x d matrix with unit-norm columns.
inline CMatrix gaussian_unit_columns(int p, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix a(p, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < p; ++i) a(i, j) = cplx(g(rng), g(rng));
        a.col(j).normalize();
    }
    return a;
}

inline CMatrix gaussian(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

/// Row-sparse d x n matrix with Gaussian rows on `support`.
inline CMatrix row_sparse(int d, int n, const IndexSet& support, std::uint64_t seed) {
    CMatrix x = CMatrix::Zero(d, n);
    const CMatrix rows = gaussian(static_cast<int>(support.size()), n, seed);
    for (std::size_t k = 0; k < support.size(); ++k) x.row(support[k]) = rows.row(static_cast<int>(k));
    return x;
}

/// s distinct sorted indices from [0, d).
inline IndexSet random_support(int d, int s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> all(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng);
    IndexSet out(all.begin(), all.begin() + s);
    std::sort(out.begin(), out.end());
    return out;
}

/// ||Y - A_T pinv(A_T) Y||_F^2 by an explicit QR projection.
inline double explicit_residual(const CMatrix& a, const CMatrix& y, const IndexSet& t) {
    if (t.empty()) return y.squaredNorm();
    const CMatrix at = select_columns(a, t);
    Eigen::ColPivHouseholderQR<CMatrix> qr(at);
    const CMatrix proj = at * qr.solve(y);
    return (y - proj).squaredNorm();
}

/// Calls f(support) for every size-s subset of [0, d), lexicographically.
template <class F>
void for_each_subset(int d, int s, F&& f) {
    IndexSet idx(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        f(idx);
        int i = s - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - s + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < s; ++k) idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
    }
}

}  // namespace dawc::test
