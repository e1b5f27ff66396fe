#pragma once

#include "pcr/core.hpp"
#include "pcr/distributions.hpp"

#include <functional>
#include <span>

namespace pcr {

struct McmcConfig {
    Index n_iter = 15000;
    Index n_burn = 5000;
    Index thin = 1;
    std::uint64_t seed = 1;

    /// n_burn < n_iter, thin >= 1 and at least 100 kept draws.
    void validate() const;
    Index kept() const { return (n_iter - n_burn) / thin; }
};

/// Kept MCMC draws, one row per retained iteration.
struct DrawMatrix {
    Matrix draws;
    Vector sigma2_draws;
    /// Per kept draw: a for the DL grid sampler, lambda^2 for the Laplace
    /// hyperprior, sigma_b^2 for the normal hyperprior. Empty otherwise.
    Vector hyper_draws;
    /// DL grid sampler only: full-conditional mass of each grid point,
    /// averaged over kept sweeps. Sums to one.
    Vector a_grid_mass;
};

/// Full state of the Dirichlet-Laplace chain after a sweep.
struct DLState {
    Vector beta;
    double sigma2 = 1.0;
    Vector psi;
    Vector phi;
    double tau = 1.0;
    double a = 0.5;
};

/// Order of the local/global scale updates within a DL sweep.
enum class DlSweepOrder {
    /// sigma^2, beta, psi, tau, phi. Since tau and phi are drawn with psi
    /// integrated out, psi is left stale and the chain can drift off
    /// (sigma^2 grows without bound on ordinary data). Kept for comparison.
    listed,
    /// sigma^2, beta, then phi | beta, tau | phi, beta and psi | phi, tau, beta:
    /// an exact joint draw of (psi, phi, tau) given (beta, sigma^2).
    blocked,
};

struct DlOptions {
    DlSweepOrder order = DlSweepOrder::blocked;
    /// Called after every sweep (burn-in included) when set.
    std::function<void(Index, const DLState&)> observer;
};

DrawMatrix gibbs_dl(const Dataset& d, double a, const InverseGammaPrior& sigma2_prior, const McmcConfig& cfg,
                    const DlOptions& opts = {});

/// DL sampler with a discrete uniform prior on a over `grid`; each sweep
/// draws a from its full conditional on the grid. A single-point grid
/// reproduces gibbs_dl exactly.
DrawMatrix gibbs_dl_hypergrid(const Dataset& d, std::span<const double> grid, const InverseGammaPrior& sigma2_prior,
                              const McmcConfig& cfg, const DlOptions& opts = {});
DrawMatrix gibbs_dl_hypergrid(const Dataset& d, const DLHyperGrid& grid, const InverseGammaPrior& sigma2_prior,
                              const McmcConfig& cfg, const DlOptions& opts = {});

/// Bayesian lasso via the exponential scale mixture:
///   beta_j | sigma^2, t_j ~ N(0, sigma^2 t_j),  t_j ~ Exp(rate lambda^2 / 2).
/// Full conditionals: 1/t_j ~ InvGaussian(sqrt(lambda^2 sigma^2 / beta_j^2), lambda^2),
/// and with a Gamma(r, delta) hyperprior on lambda^2,
/// lambda^2 ~ Gamma(p + r, delta + sum(t_j) / 2).
DrawMatrix gibbs_laplace(const Dataset& d, const LaplaceFixed& lambda, const InverseGammaPrior& sigma2_prior,
                         const McmcConfig& cfg);
DrawMatrix gibbs_laplace(const Dataset& d, const LaplaceHyper& hyper, const InverseGammaPrior& sigma2_prior,
                         const McmcConfig& cfg);

/// Conjugate normal prior beta | sigma^2 ~ N(0, sigma^2 / gamma I).
DrawMatrix gibbs_normal(const Dataset& d, const NormalFixed& gamma, const InverseGammaPrior& sigma2_prior,
                        const McmcConfig& cfg);
/// Unscaled prior beta ~ N(0, sigma_b^2 I) with sigma_b^2 ~ IG(shape, scale).
DrawMatrix gibbs_normal(const Dataset& d, const NormalHyper& hyper, const InverseGammaPrior& sigma2_prior,
                        const McmcConfig& cfg);

/// Dispatches on the prior family.
DrawMatrix run_gibbs(const Dataset& d, const PriorSpec& prior, const McmcConfig& cfg);

/// Column means and sample covariance (denominator n_draws - 1).
PosteriorSummary summarize(const DrawMatrix& draws);

/// CSV with header beta_1..beta_p,sigma2.
void write_draws_csv(const std::string& path, const DrawMatrix& draws);

/**
 * Draws beta ~ N(V X^T y, sigma^2 V), V = (X^T X + diag(prior_precision))^-1.
 *
 * Uses a Cholesky factorization of the p x p system, or for p >= 4n the
 * O(n^2 p) sampler that factorizes an n x n system instead.
 */
class GaussianConditional {
public:
    explicit GaussianConditional(const Dataset& d);

    Vector draw(const Vector& prior_precision, double sigma2, Rng& rng, Index iteration) const;

    /// Residual sum of squares at beta.
    double rss(const Vector& beta) const;

    bool uses_fast_path() const { return fast_; }

private:
    Vector draw_cholesky(const Vector& prior_precision, double sigma2, Rng& rng, Index iteration) const;
    Vector draw_fast(const Vector& prior_precision, double sigma2, Rng& rng, Index iteration) const;

    const Matrix& x_;
    const Vector& y_;
    Matrix xtx_;
    Vector xty_;
    bool fast_;
};

}  // namespace pcr
