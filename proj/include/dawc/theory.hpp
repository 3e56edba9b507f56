#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dawc/frontend.hpp"
#include "dawc/linalg.hpp"
#include "dawc/signal_model.hpp"

namespace dawc {

inline constexpr std::uint64_t kRicEnumerationBudget = 200000;

struct RicEstimate {
    enum class Mode { exact, sampled };

    int s = 0;
    double delta = 0.0;
    Mode mode = Mode::exact;
    std::uint64_t supports_checked = 0;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

/// Restricted isometry constant of one column subset: the largest deviation
/// of an eigenvalue of A_S^H A_S from 1.
double support_isometry_defect(const CMatrix& a, const IndexSet& support);

/// Exhaustive delta_s. Throws BudgetExceeded when C(D, s) > budget.
RicEstimate ric_exact(const CMatrix& a, int s, std::uint64_t budget = kRicEnumerationBudget);

/// Lower bound on delta_s from random supports; exhaustive when `trials`
/// covers every support.
RicEstimate ric_sampled(const CMatrix& a, int s, std::uint64_t trials, std::uint64_t seed);

/// Smallest channel count p with p > 2 s.
int uniqueness_channel_bound(int s);

struct SparsityBound {
    std::vector<int> per_subband;
    int total = 0;
};

/// n floor(B/f_p) + ceil(mod(B, f_p) / f_c) + 1 rows per subband.
SparsityBound sparsity_upper_bound(const std::vector<double>& bandwidths_hz, const FrontendConfig& cfg);

struct MinRateReport {
    double lhs_hz = 0.0;            // 2 f_s sum(bound_j) + 2 N_sig f_c
    double rhs_hz = 0.0;            // total occupied bandwidth
    bool satisfied = false;
    double realized_lhs_hz = 0.0;   // 2 f_s |supp X| + 2 N_sig f_c
    bool realized_satisfied = false;
    int realized_support = 0;
};

/// Throws std::invalid_argument unless f_c = (f_p - f_s)/(n - 1) and
/// f_s < f_c < f_p.
MinRateReport min_rate_check(const MultibandSpec& spec, const FrontendConfig& cfg);

/// C(gamma, omega) shared by the feasibility condition and the RIC bound.
double convergence_c(double gamma, double omega);

struct Feasibility {
    double gamma = 0.0;
    double omega = 0.0;
    double C = 0.0;
    double gap = 0.0;              // 1 + C w (2 - w) - C^2 (1 - w)^2
    double unclipped_bound = 0.0;  // (sqrt(1 + C w (2-w)) - C (1-w)) / (C + 1)
    double delta_bound = 0.0;      // min(gamma, unclipped); 0 when infeasible
    bool feasible = false;
};

Feasibility mssp_feasibility(double gamma, double omega);

struct ConvergenceConstants {
    double delta_3s = 0.0;
    double omega = 0.0;
    double nu1 = 0.0;
    double nu3 = 0.0;
    double varrho = 0.0;
    double rho = 0.0;
    double tau = 0.0;  // NaN when infeasible
    bool feasible = false;
};

/// Contraction factor and noise gain of one MSSP iteration; nu3 stands in
/// for nu2 throughout.
ConvergenceConstants convergence_constants(double delta_3s, double omega);

/// ceil(log_rho(tau e / x)), floored at 0. Empty when e_norm == 0.
std::optional<int> iteration_bound(double rho, double tau, double x_norm, double e_norm);

struct LemmaCheck {
    std::string name;
    bool passed = true;
    double worst_slack = 0.0;  // min(rhs - lhs) over instances
    int instances = 0;
};

struct LemmaReport {
    std::vector<LemmaCheck> checks;
    bool all_passed() const;
};

/// Numerically checks the scalar inequality and the three operator bounds
/// used in the convergence analysis on seeded random instances.
LemmaReport lemma_identity_suite(std::uint64_t seed);

struct Fig5Row {
    double gamma = 0.0;
    double omega = 0.0;
    double gap = 0.0;
    double delta_bound = 0.0;
};

std::vector<Fig5Row> fig5_sweep(const std::vector<double>& gammas, double omega_step);

/// Number of sign changes of the gap across one gamma's rows.
int gap_sign_changes(const std::vector<Fig5Row>& rows, double gamma);

void write_fig5_csv(const std::string& path, const std::vector<Fig5Row>& rows);
void write_fig5_svg(const std::string& path, const std::vector<Fig5Row>& rows);

}  // namespace dawc
