#pragma once

#include "pcr/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pcr {

/**
 * Seeded random stream.
 *
 * A stream is identified by (seed, stream). Two Rng objects constructed
 * from the same pair produce identical sequences. Independent substreams
 * for replicates, chains and grid points are obtained with substream().
 */
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// A fresh generator for child stream `k` of this stream. Does not
    /// consume draws from *this.
    Rng substream(std::uint64_t k) const;
    Rng substream(std::initializer_list<std::uint64_t> path) const;

    engine_type& engine() { return engine_; }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal() { return normal_(engine_); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Generalized inverse Gaussian with density
/// f(y) ∝ y^(lambda0 - 1) exp{-(rho y + chi / y) / 2}, y > 0.
struct GigParams {
    double chi;
    double rho;
    double lambda0;
};

/// Throws InvalidArgument when the density is not integrable.
void validate(const GigParams& p);

double sample_gig(const GigParams& params, Rng& rng);

/// log of a giG draw, computed without forming the draw itself; usable
/// when the draw would underflow.
double sample_log_gig(const GigParams& params, Rng& rng);

/// Inverse Gaussian with mean mu and shape lambda0 (Michael-Schucany-Haas).
double sample_inverse_gaussian(double mu, double lambda0, Rng& rng);

/// log of an inverse Gaussian draw given log(mu). Uses IG(mu, l) = mu IG(1, l / mu),
/// so mu may lie far outside the double range.
double sample_log_inverse_gaussian(double log_mu, double lambda0, Rng& rng);

/// phi_j = T_j / sum(T) with T_j ~ giG(2|beta_j| / sigma, 1, a - 1).
Vector sample_dirichlet_via_gig(const Vector& beta_abs, double sigma, double a, Rng& rng);

/// log(phi) for the same construction; entries of exp(result) sum to one.
Vector sample_log_dirichlet_via_gig(const Vector& beta_abs, double sigma, double a, Rng& rng);

/// Gamma with shape and rate.
double sample_gamma(double shape, double rate, Rng& rng);
/// log of a Gamma(shape, rate) draw; stable for shape well below 1.
double sample_log_gamma(double shape, double rate, Rng& rng);
/// Inverse gamma with shape and scale (1 / Gamma(shape, rate = scale)).
double sample_inverse_gamma(double shape, double scale, Rng& rng);
double sample_exponential(double rate, Rng& rng);
double sample_std_normal(Rng& rng);
/// Zero-mean Laplace (double exponential) with scale b: density exp(-|y|/b) / (2b).
double sample_laplace(double scale, Rng& rng);

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

}  // namespace pcr
