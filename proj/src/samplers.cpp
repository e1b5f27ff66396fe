#include "pcr/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace pcr {

void McmcConfig::validate() const {
    if (thin < 1) throw InvalidArgument("thin must be >= 1");
    if (n_burn < 0 || n_burn >= n_iter) throw InvalidArgument("need 0 <= n_burn < n_iter");
    if (kept() < 100) throw InvalidArgument("MCMC config keeps fewer than 100 draws");
}

// Gaussian full conditional ------------------------------------------------

GaussianConditional::GaussianConditional(const Dataset& d)
    : x_(d.x()), y_(d.y()), xty_(d.x().transpose() * d.y()), fast_(d.p() >= 4 * d.n()) {
    if (!fast_) {
        xtx_ = Matrix::Zero(d.p(), d.p());
        xtx_.selfadjointView<Eigen::Lower>().rankUpdate(x_.transpose());
        xtx_.triangularView<Eigen::StrictlyUpper>() = xtx_.transpose();
    }
}

double GaussianConditional::rss(const Vector& beta) const { return (y_ - x_ * beta).squaredNorm(); }

Vector GaussianConditional::draw(const Vector& prior_precision, double sigma2, Rng& rng, Index iteration) const {
    return fast_ ? draw_fast(prior_precision, sigma2, rng, iteration)
                 : draw_cholesky(prior_precision, sigma2, rng, iteration);
}

Vector GaussianConditional::draw_cholesky(const Vector& prior_precision, double sigma2, Rng& rng,
                                          Index iteration) const {
    const Index p = xtx_.rows();
    Matrix m = xtx_;
    m.diagonal() += prior_precision;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        m.diagonal().array() += 1e-10 * m.trace() / static_cast<double>(p);
        llt.compute(m);
        if (llt.info() != Eigen::Success)
            throw NumericalError("Cholesky of X^T X + S^-1 failed after jitter at iteration " +
                                 std::to_string(iteration));
    }
    Vector z(p);
    for (Index j = 0; j < p; ++j) z(j) = rng.normal();
    Vector mean = llt.solve(xty_);
    // cov = sigma^2 (L L^T)^-1: L^T e = z gives e ~ N(0, (L L^T)^-1).
    Vector e = llt.matrixU().solve(z);
    return mean + std::sqrt(sigma2) * e;
}

Vector GaussianConditional::draw_fast(const Vector& prior_precision, double sigma2, Rng& rng,
                                      Index iteration) const {
    // With Phi = X / sigma, alpha = y / sigma and prior variance D = sigma^2 / prec:
    //   u ~ N(0, D), delta ~ N(0, I_n), v = Phi u + delta,
    //   (Phi D Phi^T + I) w = alpha - v,  theta = u + D Phi^T w.
    const Index n = x_.rows();
    const Index p = x_.cols();
    const double sigma = std::sqrt(sigma2);
    const Vector prior_var = prior_precision.cwiseInverse();  // D / sigma^2
    Vector u(p);
    for (Index j = 0; j < p; ++j) u(j) = sigma * std::sqrt(prior_var(j)) * rng.normal();
    Vector delta(n);
    for (Index i = 0; i < n; ++i) delta(i) = rng.normal();

    const Matrix xs = x_ * prior_var.cwiseSqrt().asDiagonal();
    Matrix k = Matrix::Identity(n, n);
    k.selfadjointView<Eigen::Lower>().rankUpdate(xs);  // X S X^T + I (sigma cancels)
    Eigen::LLT<Matrix> llt(k.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
        throw NumericalError("Cholesky of X S X^T + I failed at iteration " + std::to_string(iteration));
    const Vector v = x_ * u / sigma + delta;
    const Vector w = llt.solve(y_ / sigma - v);
    return u + sigma * prior_var.cwiseProduct(x_.transpose() * w);
}

// Helpers -------------------------------------------------------------------

namespace {

constexpr double kFloor = 1e-12;

struct DrawRecorder {
    DrawRecorder(const McmcConfig& cfg, Index p, bool with_hyper) : cfg_(cfg) {
        out.draws.resize(cfg.kept(), p);
        out.sigma2_draws.resize(cfg.kept());
        if (with_hyper) out.hyper_draws.resize(cfg.kept());
    }

    // Returns true when iteration `it` is kept.
    bool keep(Index it) {
        if (it < cfg_.n_burn || (it - cfg_.n_burn) % cfg_.thin != 0 || row_ >= out.draws.rows()) return false;
        return true;
    }

    void record(const Vector& beta, double sigma2, double hyper = 0.0) {
        out.draws.row(row_) = beta.transpose();
        out.sigma2_draws(row_) = sigma2;
        if (out.hyper_draws.size() > 0) out.hyper_draws(row_) = hyper;
        ++row_;
    }

    const McmcConfig& cfg_;
    Index row_ = 0;
    DrawMatrix out;
};

double initial_sigma2(const Dataset& d) {
    const double v = (d.y().array() - d.y().mean()).square().sum() / static_cast<double>(d.n() - 1);
    return std::max(v, 1e-8);
}

Vector ridge_start(const Dataset& d) {
    // Minimum-norm-ish starting point, (X^T X + I)^-1 X^T y via the n x n form.
    const Index n = d.n();
    Matrix k = Matrix::Identity(n, n);
    k.selfadjointView<Eigen::Lower>().rankUpdate(d.x());
    Eigen::LLT<Matrix> llt(k.selfadjointView<Eigen::Lower>());
    return d.x().transpose() * llt.solve(d.y());
}

// log|v| with exact zeros mapped to the smallest normal double.
double log_abs(double v) { return std::log(std::max(std::abs(v), std::numeric_limits<double>::min())); }

double clamp_exp(double log_v) { return std::exp(std::clamp(log_v, -690.0, 690.0)); }

double log_sum_exp(const Vector& v) {
    const double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

// Dirichlet-Laplace ---------------------------------------------------------

DrawMatrix gibbs_dl(const Dataset& d, double a, const InverseGammaPrior& sigma2_prior, const McmcConfig& cfg,
                    const DlOptions& opts) {
    if (!(a > 0.0 && a <= 0.5)) throw InvalidArgument("DL concentration a must lie in (0, 1/2]");
    const double grid[] = {a};
    return gibbs_dl_hypergrid(d, std::span<const double>(grid, 1), sigma2_prior, cfg, opts);
}

DrawMatrix gibbs_dl_hypergrid(const Dataset& d, const DLHyperGrid& grid, const InverseGammaPrior& sigma2_prior,
                              const McmcConfig& cfg, const DlOptions& opts) {
    validate(PriorSpec{grid, sigma2_prior});
    const auto points = grid.points();
    return gibbs_dl_hypergrid(d, std::span<const double>(points), sigma2_prior, cfg, opts);
}

DrawMatrix gibbs_dl_hypergrid(const Dataset& d, std::span<const double> grid, const InverseGammaPrior& sigma2_prior,
                              const McmcConfig& cfg, const DlOptions& opts) {
    cfg.validate();
    if (grid.empty()) throw InvalidArgument("DL grid is empty");
    for (double a : grid)
        if (!(a > 0.0 && a <= 0.5)) throw InvalidArgument("DL grid values must lie in (0, 1/2]");

    const Index n = d.n();
    const Index p = d.p();
    const auto pd = static_cast<double>(p);
    const auto n_grid = static_cast<Index>(grid.size());
    Rng rng(cfg.seed);
    GaussianConditional cond(d);
    DrawRecorder rec(cfg, p, n_grid > 1);
    if (n_grid > 1) rec.out.a_grid_mass = Vector::Zero(n_grid);

    // State. Local scales are carried on the log scale.
    Vector beta = ridge_start(d);
    double sigma2 = initial_sigma2(d);
    Vector log_psi = Vector::Zero(p);
    Vector log_phi = Vector::Constant(p, -std::log(pd));
    double log_tau = std::log(pd);
    Index a_idx = n_grid - 1;
    Vector a_logpost(n_grid);
    Vector prec(p);

    // phi_j tau is clamped below at kFloor. The same clamped scale enters the
    // psi step and the prior precision, so the two stay consistent.
    const double log_floor = std::log(kFloor);
    auto log_scale = [&](Index j) { return std::max(log_phi(j) + log_tau, log_floor); };
    auto update_precision = [&] {
        for (Index j = 0; j < p; ++j) prec(j) = clamp_exp(-log_psi(j) - 2.0 * log_scale(j));
    };

    auto step_psi = [&] {
        const double log_sigma = 0.5 * std::log(sigma2);
        for (Index j = 0; j < p; ++j) {
            const double log_mu = log_sigma + log_scale(j) - std::max(log_abs(beta(j)), log_floor);
            log_psi(j) = -sample_log_inverse_gaussian(log_mu, 1.0, rng);
        }
    };

    auto step_tau = [&](double a) {
        const double log_sigma = 0.5 * std::log(sigma2);
        Vector terms(p);
        for (Index j = 0; j < p; ++j) terms(j) = log_abs(beta(j)) - log_phi(j);
        const double log_chi = std::log(2.0) - log_sigma + log_sum_exp(terms);
        const double chi = std::exp(log_chi);
        if (!std::isfinite(chi)) throw NumericalError("DL tau update: chi overflow");
        log_tau = sample_log_gig({chi, 1.0, pd * a - pd}, rng);
    };

    auto step_phi = [&](double a) {
        log_phi = sample_log_dirichlet_via_gig(beta.cwiseAbs(), std::sqrt(sigma2), a, rng);
    };

    for (Index it = 0; it < cfg.n_iter; ++it) {
        const double a = grid[static_cast<std::size_t>(a_idx)];

        // (i) sigma^2 | beta, psi, phi, tau, y
        update_precision();
        const double quad = (beta.array().square() * prec.array()).sum();
        sigma2 = sample_inverse_gamma(sigma2_prior.shape + 0.5 * static_cast<double>(n + p),
                                      sigma2_prior.scale + 0.5 * (quad + cond.rss(beta)), rng);
        // (ii) beta | psi, phi, tau, sigma^2, y
        beta = cond.draw(prec, sigma2, rng, it);

        if (opts.order == DlSweepOrder::listed) {
            step_psi();    // (iii)
            step_tau(a);   // (iv)
            step_phi(a);   // (v)
        } else {
            step_phi(a);
            step_tau(a);
            step_psi();
        }

        if (n_grid > 1) {
            // a | phi, tau on the grid: Dir(phi; a) Ga(tau; p a, 1/2) up to constants.
            const double sum_log_phi = log_phi.sum();
            for (Index k = 0; k < n_grid; ++k) {
                const double ak = grid[static_cast<std::size_t>(k)];
                a_logpost(k) = -pd * std::lgamma(ak) + (ak - 1.0) * sum_log_phi - pd * ak * std::log(2.0) +
                               (pd * ak - 1.0) * log_tau;
            }
            const Vector prob = (a_logpost.array() - log_sum_exp(a_logpost)).exp();
            double u = rng.uniform() * prob.sum();
            a_idx = n_grid - 1;
            for (Index k = 0; k < n_grid; ++k) {
                u -= prob(k);
                if (u <= 0.0) {
                    a_idx = k;
                    break;
                }
            }
            if (rec.keep(it)) rec.out.a_grid_mass += prob / prob.sum();
        }

        if (opts.observer) {
            DLState s;
            s.beta = beta;
            s.sigma2 = sigma2;
            s.psi = log_psi.array().exp();
            s.phi = log_phi.array().exp();
            s.tau = std::exp(log_tau);
            s.a = grid[static_cast<std::size_t>(a_idx)];
            opts.observer(it, s);
        }
        if (rec.keep(it)) rec.record(beta, sigma2, grid[static_cast<std::size_t>(a_idx)]);
    }
    if (n_grid > 1) rec.out.a_grid_mass /= static_cast<double>(rec.row_);
    return std::move(rec.out);
}

// Laplace -------------------------------------------------------------------

namespace {

DrawMatrix laplace_impl(const Dataset& d, double lambda2_init, const LaplaceHyper* hyper,
                        const InverseGammaPrior& sigma2_prior, const McmcConfig& cfg) {
    cfg.validate();
    const Index n = d.n();
    const Index p = d.p();
    Rng rng(cfg.seed);
    GaussianConditional cond(d);
    DrawRecorder rec(cfg, p, hyper != nullptr);

    Vector beta = ridge_start(d);
    double sigma2 = initial_sigma2(d);
    double lambda2 = lambda2_init;
    Vector t = Vector::Ones(p);  // latent variances, beta_j ~ N(0, sigma^2 t_j)

    for (Index it = 0; it < cfg.n_iter; ++it) {
        const Vector prec = t.cwiseInverse();
        const double quad = (beta.array().square() * prec.array()).sum();
        sigma2 = sample_inverse_gamma(sigma2_prior.shape + 0.5 * static_cast<double>(n + p),
                                      sigma2_prior.scale + 0.5 * (quad + cond.rss(beta)), rng);
        beta = cond.draw(prec, sigma2, rng, it);
        const double lambda = std::sqrt(lambda2);
        const double sigma = std::sqrt(sigma2);
        for (Index j = 0; j < p; ++j) {
            const double mu = lambda * sigma / std::max(std::abs(beta(j)), kFloor);
            t(j) = 1.0 / sample_inverse_gaussian(mu, lambda2, rng);
        }
        if (hyper) lambda2 = sample_gamma(static_cast<double>(p) + hyper->shape, hyper->rate + 0.5 * t.sum(), rng);
        if (rec.keep(it)) rec.record(beta, sigma2, lambda2);
    }
    return std::move(rec.out);
}

}  // namespace

DrawMatrix gibbs_laplace(const Dataset& d, const LaplaceFixed& lambda, const InverseGammaPrior& sigma2_prior,
                         const McmcConfig& cfg) {
    if (!(lambda.lambda > 0.0)) throw InvalidArgument("laplace lambda must be positive");
    return laplace_impl(d, lambda.lambda * lambda.lambda, nullptr, sigma2_prior, cfg);
}

DrawMatrix gibbs_laplace(const Dataset& d, const LaplaceHyper& hyper, const InverseGammaPrior& sigma2_prior,
                         const McmcConfig& cfg) {
    if (!(hyper.shape > 0.0 && hyper.rate > 0.0)) throw InvalidArgument("laplace hyperprior must be positive");
    return laplace_impl(d, hyper.shape / hyper.rate, &hyper, sigma2_prior, cfg);
}

// Normal --------------------------------------------------------------------

DrawMatrix gibbs_normal(const Dataset& d, const NormalFixed& gamma, const InverseGammaPrior& sigma2_prior,
                        const McmcConfig& cfg) {
    if (!(gamma.gamma > 0.0)) throw InvalidArgument("normal prior gamma must be positive");
    cfg.validate();
    const Index n = d.n();
    const Index p = d.p();
    Rng rng(cfg.seed);
    GaussianConditional cond(d);
    DrawRecorder rec(cfg, p, false);
    const Vector prec = Vector::Constant(p, gamma.gamma);

    Vector beta = ridge_start(d);
    double sigma2 = initial_sigma2(d);
    for (Index it = 0; it < cfg.n_iter; ++it) {
        sigma2 = sample_inverse_gamma(sigma2_prior.shape + 0.5 * static_cast<double>(n + p),
                                      sigma2_prior.scale + 0.5 * (gamma.gamma * beta.squaredNorm() + cond.rss(beta)),
                                      rng);
        beta = cond.draw(prec, sigma2, rng, it);
        if (rec.keep(it)) rec.record(beta, sigma2);
    }
    return std::move(rec.out);
}

DrawMatrix gibbs_normal(const Dataset& d, const NormalHyper& hyper, const InverseGammaPrior& sigma2_prior,
                        const McmcConfig& cfg) {
    if (!(hyper.shape > 0.0 && hyper.scale > 0.0)) throw InvalidArgument("normal hyperprior must be positive");
    cfg.validate();
    const Index n = d.n();
    const Index p = d.p();
    Rng rng(cfg.seed);
    GaussianConditional cond(d);
    DrawRecorder rec(cfg, p, true);

    Vector beta = ridge_start(d);
    double sigma2 = initial_sigma2(d);
    double sigma2_b = 1.0;
    for (Index it = 0; it < cfg.n_iter; ++it) {
        sigma2 = sample_inverse_gamma(sigma2_prior.shape + 0.5 * static_cast<double>(n),
                                      sigma2_prior.scale + 0.5 * cond.rss(beta), rng);
        // N(0, sigma_b^2 I) prior equals precision sigma^2 / sigma_b^2 in units of sigma^2.
        beta = cond.draw(Vector::Constant(p, sigma2 / sigma2_b), sigma2, rng, it);
        sigma2_b = sample_inverse_gamma(hyper.shape + 0.5 * static_cast<double>(p),
                                        hyper.scale + 0.5 * beta.squaredNorm(), rng);
        if (rec.keep(it)) rec.record(beta, sigma2, sigma2_b);
    }
    return std::move(rec.out);
}

DrawMatrix run_gibbs(const Dataset& d, const PriorSpec& prior, const McmcConfig& cfg) {
    validate(prior);
    return std::visit(
        [&](const auto& f) -> DrawMatrix {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, NormalFixed> || std::is_same_v<T, NormalHyper>)
                return gibbs_normal(d, f, prior.sigma2_prior, cfg);
            else if constexpr (std::is_same_v<T, LaplaceFixed> || std::is_same_v<T, LaplaceHyper>)
                return gibbs_laplace(d, f, prior.sigma2_prior, cfg);
            else if constexpr (std::is_same_v<T, DLFixed>)
                return gibbs_dl(d, f.a, prior.sigma2_prior, cfg);
            else
                return gibbs_dl_hypergrid(d, f, prior.sigma2_prior, cfg);
        },
        prior.family);
}

// Summaries -------------------------------------------------------------------

PosteriorSummary summarize(const DrawMatrix& draws) {
    const Index m = draws.draws.rows();
    if (m < 2) throw InvalidArgument("summarize needs at least 2 draws");
    PosteriorSummary s;
    s.beta_mean = draws.draws.colwise().mean().transpose();
    const Matrix centered = draws.draws.rowwise() - s.beta_mean.transpose();
    s.beta_cov = Matrix::Zero(draws.draws.cols(), draws.draws.cols());
    s.beta_cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(m - 1));
    s.beta_cov.triangularView<Eigen::StrictlyUpper>() = s.beta_cov.transpose();
    s.sigma2_mean = draws.sigma2_draws.size() > 0 ? draws.sigma2_draws.mean() : 0.0;
    s.n_draws = m;
    return s;
}

void write_draws_csv(const std::string& path, const DrawMatrix& draws) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    const Index p = draws.draws.cols();
    for (Index j = 0; j < p; ++j) out << "beta_" << (j + 1) << ',';
    out << "sigma2\n";
    for (Index i = 0; i < draws.draws.rows(); ++i) {
        for (Index j = 0; j < p; ++j) out << format_double(draws.draws(i, j)) << ',';
        out << format_double(draws.sigma2_draws(i)) << '\n';
    }
}

}  // namespace pcr
