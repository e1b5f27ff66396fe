#include "pcr/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pcr {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

Rng::engine_type make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng::engine_type(seq);
}

constexpr double kTiny = std::numeric_limits<double>::denorm_min();
constexpr double kHuge = std::numeric_limits<double>::max();

double clamp_positive(double v) { return std::clamp(v, kTiny, kHuge); }

double exp_positive(double log_v) {
    if (log_v > 709.0) return kHuge;
    return clamp_positive(std::exp(log_v));
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

Rng Rng::substream(std::uint64_t k) const { return Rng(seed_, mix64(stream_ ^ mix64(k + 1))); }

Rng Rng::substream(std::initializer_list<std::uint64_t> path) const {
    std::uint64_t s = stream_;
    for (auto k : path) s = mix64(s ^ mix64(k + 1));
    return Rng(seed_, s);
}

double Rng::uniform() {
    // 53 random bits mapped to the midpoints of a 2^-53 grid: never 0 or 1.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

// Gamma family -----------------------------------------------------------

double sample_std_normal(Rng& rng) { return rng.normal(); }

double sample_log_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidArgument("gamma needs positive shape and rate");
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(rng.engine())) - std::log(rate);
    }
    // G(shape) = G(shape + 1) * U^(1 / shape)
    std::gamma_distribution<double> g(shape + 1.0, 1.0);
    const double lg = std::log(g(rng.engine()));
    return lg + std::log(rng.uniform()) / shape - std::log(rate);
}

double sample_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidArgument("gamma needs positive shape and rate");
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return clamp_positive(g(rng.engine()) / rate);
    }
    return exp_positive(sample_log_gamma(shape, rate, rng));
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw InvalidArgument("inverse gamma needs positive shape and scale");
    return exp_positive(-sample_log_gamma(shape, scale, rng));
}

double sample_exponential(double rate, Rng& rng) {
    if (!(rate > 0.0)) throw InvalidArgument("exponential needs a positive rate");
    return clamp_positive(-std::log(rng.uniform()) / rate);
}

double sample_laplace(double scale, Rng& rng) {
    if (!(scale > 0.0)) throw InvalidArgument("laplace needs a positive scale");
    const double e = -std::log(rng.uniform());
    return (rng.uniform() < 0.5 ? -e : e) * scale;
}

// Inverse Gaussian ---------------------------------------------------------

double sample_inverse_gaussian(double mu, double lambda0, Rng& rng) {
    if (!(mu > 0.0) || !(lambda0 > 0.0) || !std::isfinite(mu) || !std::isfinite(lambda0))
        throw InvalidArgument("inverse Gaussian needs positive finite mu and lambda0");
    const double z = rng.normal();
    const double w = mu * (z * z) / lambda0;
    // Smaller root of the chi-square transformation; the rationalized form
    // x = mu / (1 + w/2 + sqrt(w + w^2/4)) avoids cancellation.
    const double x = mu / (1.0 + 0.5 * w + std::sqrt(w * (1.0 + 0.25 * w)));
    const double u = rng.uniform();
    if (u * (mu + x) <= mu) return clamp_positive(x);
    return clamp_positive(mu * (mu / x));
}

double sample_log_inverse_gaussian(double log_mu, double lambda0, Rng& rng) {
    if (std::isnan(log_mu) || !(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw InvalidArgument("inverse Gaussian needs finite lambda0 > 0 and a log mean");
    // IG(1, s) has relative spread 1 / sqrt(s); beyond 1e30 it is 1 to double precision.
    const double log_shape = std::log(lambda0) - log_mu;
    if (log_shape > 69.0) return log_mu;
    return log_mu + std::log(sample_inverse_gaussian(1.0, std::exp(log_shape), rng));
}

// Generalized inverse Gaussian ---------------------------------------------

void validate(const GigParams& p) {
    const bool finite = std::isfinite(p.chi) && std::isfinite(p.rho) && std::isfinite(p.lambda0);
    if (!finite || p.chi < 0.0 || p.rho < 0.0)
        throw InvalidArgument("giG needs finite chi >= 0 and rho >= 0");
    if (p.lambda0 <= 0.0 && !(p.chi > 0.0))
        throw InvalidArgument("giG with lambda0 <= 0 needs chi > 0");
    if (p.lambda0 >= 0.0 && !(p.rho > 0.0))
        throw InvalidArgument("giG with lambda0 >= 0 needs rho > 0");
}

namespace {

// Two-parameter form: density ∝ x^(lambda - 1) exp{-omega/2 (x + 1/x)},
// lambda >= 0, omega > 0. Algorithms after Hoermann & Leydold (2014).

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift.
double gig_rou_noshift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    double x;
    for (;;) {
        const double u = um * rng.uniform();
        const double v = rng.uniform();
        x = u / v;
        if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) break;
    }
    return x;
}

// Ratio-of-uniforms with mode shift, for lambda > 2 or omega > 3.
double gig_rou_shift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    // Extrema of (x - xm) sqrt(f(x)) are roots of a depressed cubic.
    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    const double arg = std::clamp(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)), -1.0, 1.0);
    const double fi = std::acos(arg);
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

    double x;
    for (;;) {
        const double u = uminus + rng.uniform() * (uplus - uminus);
        const double v = rng.uniform();
        x = u / v + xm;
        if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) break;
    }
    return x;
}

// Rejection from a piecewise hat, for 0 <= lambda < 1 and small omega.
double gig_concave(double lambda, double omega, Rng& rng) {
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double area[3];
    double k1, k2;
    area[0] = k0 * x0;
    if (x0 >= 2.0 / omega) {
        k1 = 0.0;
        area[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                                : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = area[0] + area[1] + area[2];

    for (;;) {
        double v = total * rng.uniform();
        double x, hx;
        if (v <= area[0]) {
            x = x0 * v / area[0];
            hx = k0;
        } else if ((v -= area[0]) <= area[1]) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= area[1];
            const double a = std::max(x0, 2.0 / omega);
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * a) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        const double u = rng.uniform() * hx;
        if (x > 0.0 && std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
}

double sample_gig_standard(double lambda, double omega, Rng& rng) {
    if (lambda > 2.0 || omega > 3.0) return gig_rou_shift(lambda, omega, rng);
    if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return gig_rou_noshift(lambda, omega, rng);
    return gig_concave(lambda, omega, rng);
}

}  // namespace

double sample_log_gig(const GigParams& params, Rng& rng) {
    validate(params);
    const double chi = params.chi;
    const double rho = params.rho;
    const double lambda = params.lambda0;

    if (chi == 0.0) return sample_log_gamma(lambda, rho / 2.0, rng);
    if (rho == 0.0) return -sample_log_gamma(-lambda, chi / 2.0, rng);

    // y = alpha * x with x ~ GIG(lambda, omega) in the two-parameter form;
    // negative lambda via the reciprocal of GIG(-lambda).
    const double log_alpha = 0.5 * (std::log(chi) - std::log(rho));
    const double omega = std::sqrt(chi) * std::sqrt(rho);
    const double x = sample_gig_standard(std::abs(lambda), omega, rng);
    return lambda < 0.0 ? log_alpha - std::log(x) : log_alpha + std::log(x);
}

double sample_gig(const GigParams& params, Rng& rng) { return exp_positive(sample_log_gig(params, rng)); }

// Dirichlet via normalized giG draws ---------------------------------------

Vector sample_log_dirichlet_via_gig(const Vector& beta_abs, double sigma, double a, Rng& rng) {
    if (!(a > 0.0)) throw InvalidArgument("Dirichlet concentration must be positive");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (beta_abs.size() < 1) throw InvalidArgument("need at least one coefficient");
    // Only an exact zero needs a guard; chi stays positive.
    constexpr double kBetaFloor = std::numeric_limits<double>::min();
    const Index p = beta_abs.size();
    Vector log_t(p);
    for (Index j = 0; j < p; ++j) {
        const double b = std::max(std::abs(beta_abs(j)), kBetaFloor);
        log_t(j) = sample_log_gig({2.0 * b / sigma, 1.0, a - 1.0}, rng);
    }
    const double m = log_t.maxCoeff();
    if (!std::isfinite(m)) throw NumericalError("Dirichlet-via-giG: no finite component draw (max log T = " +
                                                format_double(m) + ")");
    const double lse = m + std::log((log_t.array() - m).exp().sum());
    return log_t.array() - lse;
}

Vector sample_dirichlet_via_gig(const Vector& beta_abs, double sigma, double a, Rng& rng) {
    Vector phi = sample_log_dirichlet_via_gig(beta_abs, sigma, a, rng).array().exp();
    return phi.cwiseMax(kTiny);
}

}  // namespace pcr
