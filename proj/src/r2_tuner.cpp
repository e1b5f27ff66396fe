#include "pcr/r2_tuner.hpp"

#include "pcr/parallel.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace pcr {

void R2Target::validate() const {
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
        throw InvalidArgument("Beta target shapes must be positive");
}

PriorFamily parse_family(const std::string& s) {
    if (s == "normal") return PriorFamily::normal;
    if (s == "laplace") return PriorFamily::laplace;
    if (s == "dl") return PriorFamily::dl;
    throw InvalidArgument("unknown prior family '" + s + "' (expected normal, laplace or dl)");
}

std::string to_string(PriorFamily f) {
    switch (f) {
        case PriorFamily::normal: return "normal";
        case PriorFamily::laplace: return "laplace";
        case PriorFamily::dl: return "dl";
    }
    return "?";
}

double r2_from_coefficients(const Matrix& x, const Vector& eta) {
    const double q = (x * eta).squaredNorm() / static_cast<double>(x.rows());
    return q / (1.0 + q);
}

namespace {

void draw_prior(PriorFamily family, double hyper, Rng& rng, Vector& eta) {
    const Index p = eta.size();
    switch (family) {
        case PriorFamily::normal: {
            const double sd = 1.0 / std::sqrt(hyper);
            for (Index j = 0; j < p; ++j) eta(j) = sd * rng.normal();
            break;
        }
        case PriorFamily::laplace:
            for (Index j = 0; j < p; ++j) eta(j) = sample_laplace(1.0 / hyper, rng);
            break;
        case PriorFamily::dl: {
            Vector log_g(p);
            for (Index j = 0; j < p; ++j) log_g(j) = sample_log_gamma(hyper, 1.0, rng);
            const double m = log_g.maxCoeff();
            const double lse = m + std::log((log_g.array() - m).exp().sum());
            const double log_tau = sample_log_gamma(static_cast<double>(p) * hyper, 0.5, rng);
            for (Index j = 0; j < p; ++j) {
                const double scale = std::exp(log_g(j) - lse + log_tau);
                eta(j) = scale > 0 ? sample_laplace(scale, rng) : 0.0;
            }
            break;
        }
    }
}

void check_hyper(PriorFamily family, double hyper) {
    if (!(hyper > 0) || !std::isfinite(hyper))
        throw InvalidArgument(to_string(family) + " hyperparameter must be positive and finite");
    if (family == PriorFamily::dl && hyper > 0.5)
        throw InvalidArgument("dl concentration a must lie in (0, 1/2]");
}

}  // namespace

Vector induced_r2_draws(const Dataset& d, PriorFamily family, double hyper, Index n_draws, Rng& rng) {
    check_hyper(family, hyper);
    if (n_draws < 100) throw InvalidArgument("induced R^2 needs at least 100 draws");
    const Index p = d.p();
    // Batches keep the X * eta products matrix-matrix.
    constexpr Index batch = 256;
    Vector out(n_draws);
    Matrix etas(p, batch);
    Vector eta(p);
    const double n = static_cast<double>(d.n());
    for (Index start = 0; start < n_draws; start += batch) {
        const Index m = std::min(batch, n_draws - start);
        for (Index k = 0; k < m; ++k) {
            draw_prior(family, hyper, rng, eta);
            etas.col(k) = eta;
        }
        const Matrix fitted = d.x() * etas.leftCols(m);
        for (Index k = 0; k < m; ++k) {
            const double q = fitted.col(k).squaredNorm() / n;
            out(start + k) = std::isfinite(q) ? q / (1.0 + q) : 1.0 - std::numeric_limits<double>::epsilon();
        }
    }
    return out;
}

double beta_cdf(double x, const R2Target& target) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    return boost::math::ibeta(target.a, target.b, x);
}

double ks_statistic(std::span<const double> sample, const R2Target& target) {
    target.validate();
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double m = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = beta_cdf(s[i], target);
        d = std::max({d, f - static_cast<double>(i) / m, static_cast<double>(i + 1) / m - f});
    }
    return d;
}

void validate_grid(PriorFamily family, std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("tuning grid is empty");
    for (double v : grid) check_hyper(family, v);
}

TuneResult tune_by_grid(const Dataset& d, PriorFamily family, std::span<const double> grid, const R2Target& target,
                        Index n_draws, const Rng& rng, int jobs) {
    target.validate();
    validate_grid(family, grid);
    TuneResult r;
    r.grid.assign(grid.begin(), grid.end());
    r.ks.assign(grid.size(), 0.0);
    parallel_for(grid.size(), jobs, [&](std::size_t k) {
        Rng local = rng.substream(k);
        const Vector draws = induced_r2_draws(d, family, grid[k], n_draws, local);
        r.ks[k] = ks_statistic(std::span<const double>(draws.data(), static_cast<std::size_t>(draws.size())), target);
    });
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (r.ks[k] < r.ks[best]) best = k;
    r.hyperparameter = grid[best];
    r.ks_statistic = r.ks[best];
    return r;
}

std::vector<double> default_grid(PriorFamily family, Index n, Index p) {
    double lo = 0, hi = 0;
    switch (family) {
        case PriorFamily::normal:
            lo = 1e-2 * static_cast<double>(p);
            hi = 1e2 * static_cast<double>(p);
            break;
        case PriorFamily::laplace:
            lo = 1e-2;
            hi = 1e3;
            break;
        case PriorFamily::dl:
            lo = 1.0 / static_cast<double>(std::max(n, p));
            hi = 0.5;
            break;
    }
    constexpr int k = 50;
    std::vector<double> g(k);
    for (int i = 0; i < k; ++i) g[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (k - 1));
    g.back() = hi;
    return g;
}

CubicTerms cubic_terms(double trace, double trace_sq, const R2Target& target) {
    const double a = target.a, b = target.b, s = trace, d2 = trace_sq;
    CubicTerms t{};
    t.p = (2 * a - b) * s / a;
    t.q = 2 * (a + b) * d2 / a + (a - 2 * b) * s * s / a;
    t.r = -b * s * s * s / a;
    t.c = t.p * t.p / 9 - t.q / 3;
    t.a = t.p * t.q / 6 - t.p * t.p * t.p / 27 - t.r / 2;
    t.b = t.a * t.a - t.c * t.c * t.c;
    return t;
}

double kl_derivative(double gamma, double trace, double trace_sq, const R2Target& target) {
    const double a = target.a, b = target.b;
    const double u = trace + gamma;
    return -b / gamma + (a + b) / u + 2 * (a + b) * trace_sq / (u * u * u);
}

double kl_approx(double gamma, double trace, double trace_sq, const R2Target& target) {
    const double a = target.a, b = target.b;
    const double u = trace + gamma;
    return -b * std::log(gamma) + (a + b) * (std::log(u) - trace_sq / (u * u));
}

double numeric_kl_root(double trace, double trace_sq, const R2Target& target) {
    target.validate();
    const double scale = std::max(trace, std::sqrt(trace_sq));
    auto f = [&](double g) { return kl_derivative(g, trace, trace_sq, target); };
    constexpr int k = 4000;
    const double lo = std::log(scale * 1e-10), hi = std::log(scale * 1e10);
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_kl = std::numeric_limits<double>::infinity();
    double g0 = std::exp(lo), f0 = f(g0);
    for (int i = 1; i <= k; ++i) {
        const double g1 = std::exp(lo + (hi - lo) * i / k);
        const double f1 = f(g1);
        if (f0 < 0 && f1 >= 0) {
            double l = g0, h = g1;
            for (int it = 0; it < 200 && h - l > 1e-15 * h; ++it) {
                const double m = 0.5 * (l + h);
                (f(m) < 0 ? l : h) = m;
            }
            const double root = 0.5 * (l + h);
            const double kl = kl_approx(root, trace, trace_sq, target);
            if (kl < best_kl) {
                best_kl = kl;
                best = root;
            }
        }
        g0 = g1;
        f0 = f1;
    }
    if (!std::isfinite(best)) throw NumericalError("no minimum of the KL approximation found");
    return best;
}

ClosedFormGamma closed_form_gamma_detail(double trace, double trace_sq, const R2Target& target) {
    target.validate();
    if (!(trace > 0) || !(trace_sq > 0)) throw InvalidArgument("spectrum is identically zero");
    const CubicTerms t = cubic_terms(trace, trace_sq, target);
    if (t.b < 0) return {numeric_kl_root(trace, trace_sq, target), true};
    const double sb = std::sqrt(t.b);
    const double g = std::cbrt(t.a + sb) + std::cbrt(t.a - sb) - t.p / 3;
    if (!(g > 0) || !std::isfinite(g)) return {numeric_kl_root(trace, trace_sq, target), true};
    return {g, false};
}

double closed_form_gamma(double trace, double trace_sq, const R2Target& target) {
    return closed_form_gamma_detail(trace, trace_sq, target).gamma;
}

double closed_form_gamma(const EigenSpectrum& spectrum, const R2Target& target) {
    const Vector& d = spectrum.eigenvalues;
    return closed_form_gamma(d.sum(), d.squaredNorm(), target);
}

std::pair<double, double> expected_gram_moments(const Vector& eigenvalues, Index n) {
    if (n < 1) throw InvalidArgument("sample size must be positive");
    const double s = eigenvalues.sum();
    const double s2 = eigenvalues.squaredNorm();
    const double nn = static_cast<double>(n);
    return {s, (1.0 + 1.0 / nn) * s2 + s * s / nn};
}

double derived_gamma(const Dataset& d, const R2Target& target) {
    // tr(G) and tr(G^2) = ||G||_F^2 give the same moments as the eigenvalues.
    Matrix g = Matrix::Zero(d.p(), d.p());
    g.selfadjointView<Eigen::Lower>().rankUpdate(d.x().transpose(), 1.0 / static_cast<double>(d.n()));
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return closed_form_gamma(g.trace(), g.squaredNorm(), target);
}

void write_tune_csv(const std::string& path, const TuneResult& r) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    std::vector<std::size_t> order(r.grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return r.ks[i] < r.ks[j]; });
    std::vector<std::size_t> rank(r.grid.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k + 1;
    out << "hypervalue,ks_statistic,rank\n";
    for (std::size_t k = 0; k < r.grid.size(); ++k)
        out << format_double(r.grid[k]) << ',' << format_double(r.ks[k]) << ',' << rank[k] << '\n';
    if (!out) throw Error("write failed: " + path);
}

}  // namespace pcr
