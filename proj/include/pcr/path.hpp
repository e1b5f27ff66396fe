#pragma once

#include "pcr/core.hpp"
#include "pcr/lars.hpp"

#include <string>
#include <vector>

namespace pcr {

/**
 * Penalized credible-region problem
 *
 *     min_beta (beta - beta_hat)^T K (beta - beta_hat) + lambda * sum_j w_j |beta_j|
 *
 * with K = Sigma^-1 = L^T L and w_j = min(beta_hat_j^-2, 1e12).
 */
struct SelectionProblem {
    Vector beta_hat;
    /// Triangular L with L^T L = Sigma^-1.
    Matrix sigma_inv_chol;
    /// Sigma^-1, kept to avoid forming L^T L repeatedly.
    Matrix precision;
    Vector weights;

    Index p() const { return beta_hat.size(); }
};

struct PathStep {
    std::vector<Index> entered;
    std::vector<Index> dropped;
    double lambda = 0.0;
    std::vector<Index> active;
    Vector coefficients;
};

struct SelectionPath {
    std::vector<PathStep> steps;
    /// Variables (0-based) in order of first entry. For a complete credible
    /// path every variable appears; a truncated lasso path lists only those
    /// that entered.
    std::vector<Index> ordering;
    /// max_steps ran out before the path ended.
    bool truncated = false;
    /// Fewer than p variables ever entered.
    bool partial = false;
};

inline constexpr double kMaxWeight = 1e12;

SelectionProblem build_problem(const PosteriorSummary& s);
SelectionProblem build_problem(const Vector& beta_hat, const Matrix& beta_cov);

/// Default step budget: 8 min(n, p).
Index default_max_steps(Index n, Index p);

/// Full lambda path of the credible-region problem. Variables whose
/// unpenalized optimum is exactly zero never enter and are appended to the
/// ordering by index.
SelectionPath solve_path(const SelectionProblem& prob, Index max_steps);

/// Lasso path of ||y - X b||^2 + lambda ||b||_1 on a standardized dataset,
/// stopping once min(n - 1, p) variables are active.
SelectionPath lasso_baseline(const Dataset& d, Index max_steps);

/// Design and response of the equivalent lasso problem in b = w * beta:
/// X* = L diag(1/w), y* = L beta_hat.
std::pair<Matrix, Vector> transformed_design(const SelectionProblem& prob);

/// Credible-region objective at beta for penalty lambda.
double credible_objective(const SelectionProblem& prob, const Vector& beta, double lambda);

/// Largest violation of the optimality conditions at (beta, lambda):
/// |2 [K (beta_hat - beta)]_j - lambda w_j sign(beta_j)| on the support and
/// max(0, |2 [K (beta_hat - beta)]_j| - lambda w_j) off it, each divided by
/// max(1, lambda w_j).
double kkt_violation(const SelectionProblem& prob, const Vector& beta, double lambda);

/// Path solution at any lambda, interpolating linearly between knots.
Vector coefficients_at(const SelectionPath& path, double lambda);

struct BicChoice {
    std::vector<Index> support;
    double bic = 0.0;
    double rss = 0.0;
};

/// Among the empty model and every step's active set with fewer than
/// max_size variables, the OLS refit with smallest n log(RSS / n) + k log n.
BicChoice select_bic(const SelectionPath& path, const Dataset& d, Index max_size = 30);

/// OLS coefficients of y on the given columns (QR); zero elsewhere.
Vector ols_refit(const Dataset& d, const std::vector<Index>& support);

/// step, lambda, entering_index, active_size, coefficients. Indices are
/// 1-based; a negative entering_index marks a variable leaving; several
/// events at one knot are separated by ';'.
void write_path_csv(const std::string& path, const SelectionPath& sp);

}  // namespace pcr
