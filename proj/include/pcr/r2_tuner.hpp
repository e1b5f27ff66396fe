#pragma once

#include "pcr/core.hpp"
#include "pcr/distributions.hpp"

#include <span>
#include <string>
#include <vector>

namespace pcr {

/// Target Beta(a, b) distribution for R^2.
struct R2Target {
    double a = 1.0;
    double b = 1.0;

    void validate() const;
};

enum class PriorFamily { normal, laplace, dl };

PriorFamily parse_family(const std::string& s);
std::string to_string(PriorFamily f);

/// R^2 = 1 - 1 / (1 + eta^T X^T X eta / n) for one coefficient vector.
double r2_from_coefficients(const Matrix& x, const Vector& eta);

/**
 * Prior-induced R^2 sample at unit error variance.
 *
 * normal: eta_j ~ N(0, 1 / hyper); laplace: eta_j ~ DE(1 / hyper);
 * dl: phi ~ Dir(hyper), tau ~ Ga(p hyper, rate 1/2), eta_j ~ DE(phi_j tau).
 */
Vector induced_r2_draws(const Dataset& d, PriorFamily family, double hyper, Index n_draws, Rng& rng);

/// Beta(a, b) CDF.
double beta_cdf(double x, const R2Target& target);

/// One-sample Kolmogorov-Smirnov distance to Beta(a, b).
double ks_statistic(std::span<const double> sample, const R2Target& target);

struct TuneResult {
    double hyperparameter = 0.0;
    double ks_statistic = 0.0;
    std::vector<double> grid;
    std::vector<double> ks;
};

/// Grid point k draws from rng.substream(k); the minimum is taken by value
/// and then by grid position, so the result does not depend on `jobs`.
TuneResult tune_by_grid(const Dataset& d, PriorFamily family, std::span<const double> grid, const R2Target& target,
                        Index n_draws, const Rng& rng, int jobs = 1);

/// 50 log-spaced points: gamma over [p/100, 100 p], lambda over [1e-2, 1e3],
/// a over [1 / max(n, p), 1/2].
std::vector<double> default_grid(PriorFamily family, Index n, Index p);

/// Throws InvalidArgument when a grid value is outside the family's range
/// (a must lie in (0, 1/2]).
void validate_grid(PriorFamily family, std::span<const double> grid);

// Closed-form gamma for the normal prior -----------------------------------

/// Coefficients of gamma^3 + P gamma^2 + Q gamma + R = 0 and the Cardano terms.
struct CubicTerms {
    double p, q, r;
    double c, a, b;
};

/// `trace` = sum d_j and `trace_sq` = sum d_j^2 of the gram spectrum.
CubicTerms cubic_terms(double trace, double trace_sq, const R2Target& target);

/// Derivative of the large-p approximation to the KL divergence in gamma.
double kl_derivative(double gamma, double trace, double trace_sq, const R2Target& target);

/// The approximate KL divergence itself, up to an additive constant.
double kl_approx(double gamma, double trace, double trace_sq, const R2Target& target);

struct ClosedFormGamma {
    double gamma = 0.0;
    /// B < 0: the cubic has three real roots and the value is the root of
    /// kl_derivative with smallest kl_approx instead.
    bool numeric_fallback = false;
};

ClosedFormGamma closed_form_gamma_detail(double trace, double trace_sq, const R2Target& target);
double closed_form_gamma(double trace, double trace_sq, const R2Target& target);
double closed_form_gamma(const EigenSpectrum& spectrum, const R2Target& target);

/// Root of kl_derivative on (0, inf) by scanning and bisection.
double numeric_kl_root(double trace, double trace_sq, const R2Target& target);

/// Expected (trace, trace_sq) of X^T X / n when the n rows are iid N(0, R)
/// and R has the given eigenvalues.
std::pair<double, double> expected_gram_moments(const Vector& eigenvalues, Index n);

/// Closed-form gamma from the spectrum of X^T X / n of this dataset.
double derived_gamma(const Dataset& d, const R2Target& target);

/// hypervalue, ks_statistic, rank (1 = best).
void write_tune_csv(const std::string& path, const TuneResult& r);

}  // namespace pcr
