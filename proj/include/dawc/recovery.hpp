#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dawc/linalg.hpp"

namespace dawc {

/// Where Step 6 applies omega' = 1 + omega for side-information members.
///   increment: omega' * ||Xhat_j||^2 / [G^-1]_jj, the reduced criterion the
///              convergence analysis works with (default)
///   residual:  omega' * ||P_perp(T \ {j}) Y||^2, the criterion as displayed
enum class PruneWeighting { increment, residual };

struct MsspConfig {
    int sparsity = 1;
    double omega = 0.9;
    /// Stop once every block residual is at or below this. Defaults to
    /// 1e-6 * ||Y||_F over all blocks.
    std::optional<double> residual_tolerance;
    /// 0 selects min(2s, 50).
    int max_iterations = 0;
    int block_count = 1;
    PruneWeighting prune_weighting = PruneWeighting::increment;

    double omega_prime() const { return 1.0 + omega; }
};

struct RecoveryOutput {
    std::vector<IndexSet> supports;
    /// D x N_i, nonzero only on the matching support.
    std::vector<CMatrix> estimates;
    std::vector<double> residual_norms;
    int iterations_used = 0;
    bool converged = false;
    /// Merge sets whose Gram matrix was numerically singular; pruning fell
    /// back to explicit projections for these.
    int rank_deficient_prunes = 0;

    IndexSet support_union() const;
};

/// Splits Y column-wise into `r` equal blocks. Throws if cols % r != 0.
std::vector<CMatrix> split_columns(const CMatrix& y, int r);

/// Throws std::invalid_argument unless every column norm is 1 within `tol`.
void require_unit_columns(const CMatrix& a, double tol = 1e-8);

/// Step 4: top-s indices of ||A_j^H R||_F^2, scaled by omega^2 off the
/// side-information set. Ties go to the smallest index. Result is sorted.
IndexSet weighted_select(const CMatrix& a,
                         const CMatrix& residual,
                         const IndexSet& side_info,
                         double omega,
                         int s);

/// ||P_perp(T \ {j}) Y||_F^2 for every j in T, in the order of T.
struct RemovalScores {
    std::vector<double> residual_after_removal;
    double residual_full = 0.0;  // ||P_perp(T) Y||_F^2
    bool explicit_fallback = false;
    /// Secondary key for equal scores: the downdating term computed with
    /// the pseudo-inverse. Equals residual_after_removal when A_T has full rank.
    std::vector<double> tie_break;
};

/// Scores via the Gram-inverse downdating identity; falls back to explicit
/// projections when A_T is numerically rank deficient.
RemovalScores removal_scores(const CMatrix& a, const CMatrix& y, const IndexSet& merged);

/// Step 6: keeps the s indices of `merged` with the largest removal score,
/// weighting side-information members by 1 + omega.
IndexSet si_prune(const CMatrix& a,
                  const CMatrix& y,
                  const IndexSet& merged,
                  const IndexSet& side_info,
                  double omega,
                  int s,
                  bool* fell_back = nullptr,
                  PruneWeighting weighting = PruneWeighting::increment);

struct LeastSquaresInfo {
    int rank = 0;
    bool rank_deficient = false;
};

/// D x N matrix holding pinv(A_S) Y on the rows in S and zeros elsewhere.
/// Singular values below 1e-10 of the largest are discarded.
CMatrix least_squares_on_support(const CMatrix& a,
                                 const CMatrix& y,
                                 const IndexSet& support,
                                 LeastSquaresInfo* info = nullptr);

RecoveryOutput mssp(const CMatrix& a, const std::vector<CMatrix>& blocks, const MsspConfig& cfg);

IndexSet somp(const CMatrix& a, const CMatrix& y, int s);
IndexSet sp_mmv(const CMatrix& a, const CMatrix& y, int s, std::optional<double> tolerance = {});
IndexSet ssmp(const CMatrix& a, const CMatrix& y, int s, std::optional<double> tolerance = {});
IndexSet mp_mmv(const CMatrix& a, const CMatrix& y, int s);

/// Uniform entry point: "mssp", "somp", "sp", "ssmp", "mp". Baselines see the
/// blocks concatenated into one measurement matrix.
RecoveryOutput recover(std::string_view algorithm,
                       const CMatrix& a,
                       const std::vector<CMatrix>& blocks,
                       const MsspConfig& cfg);

bool is_known_algorithm(std::string_view algorithm);

}  // namespace dawc
