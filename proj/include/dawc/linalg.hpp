#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dawc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Sorted, duplicate-free list of 0-based row or column indices.
using IndexSet = std::vector<int>;

/// Columns of `a` listed in `idx`, in that order.
CMatrix select_columns(const CMatrix& a, const IndexSet& idx);

/// Sorted union of two index sets.
IndexSet set_union(const IndexSet& a, const IndexSet& b);

/// Elements of `a` not in `b`.
IndexSet set_difference(const IndexSet& a, const IndexSet& b);

IndexSet set_intersection(const IndexSet& a, const IndexSet& b);

bool contains(const IndexSet& sorted, int idx);

/// Row indices whose Euclidean row norm exceeds `tol`.
IndexSet nonzero_rows(const CMatrix& x, double tol = 0.0);

/// SplitMix64 finaliser; used to derive independent seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t x);

/// Combine a base seed with a stream tag into a new seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace dawc
