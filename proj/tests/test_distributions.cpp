#include "pcr/distributions.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace pcr;

namespace {

struct Moments {
    double mean;
    double var;
};

template <class F>
Moments sample_moments(int n, F&& draw) {
    double m = 0, m2 = 0;
    for (int i = 1; i <= n; ++i) {
        const double x = draw();
        const double d = x - m;
        m += d / i;
        m2 += d * (x - m);
    }
    return {m, m2 / (n - 1)};
}

// Checks E[Y^k] against quadrature within 5 Monte-Carlo standard errors.
void check_gig_moment(GigParams g, double k, int n, std::uint64_t seed) {
    Rng rng(seed);
    const double want = oracle::gig_moment(g.chi, g.rho, g.lambda0, k);
    const double want2 = oracle::gig_moment(g.chi, g.rho, g.lambda0, 2 * k);
    const double se = std::sqrt((want2 - want * want) / n);
    const auto got = sample_moments(n, [&] { return std::pow(sample_gig(g, rng), k); });
    INFO("chi=" << g.chi << " rho=" << g.rho << " lambda=" << g.lambda0 << " k=" << k);
    CHECK(std::abs(got.mean - want) < 5 * se);
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        differs = differs || x != c.uniform();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
    CHECK(differs);
    Rng s1 = a.substream(7), s2 = a.substream(7), s3 = a.substream({7, 1});
    CHECK(s1.normal() == s2.normal());
    CHECK(s1.stream() != s3.stream());
}

TEST_CASE("giG parameter validation") {
    CHECK_THROWS_AS(validate(GigParams{-1, 1, 0}), InvalidArgument);
    CHECK_THROWS_AS(validate(GigParams{0, 1, -0.5}), InvalidArgument);
    CHECK_THROWS_AS(validate(GigParams{1, 0, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(validate(GigParams{0, 0, 1}), InvalidArgument);
    CHECK_NOTHROW(validate(GigParams{0, 1, 0.5}));
    CHECK_NOTHROW(validate(GigParams{1, 0, -0.5}));
}

TEST_CASE("giG moments match quadrature") {
    // Regimes met by the DL updates: lambda = a - 1 with small a, and
    // lambda = p a - p with large chi.
    check_gig_moment({2.0, 1.0, -0.999}, 1, 200000, 1);
    check_gig_moment({0.1, 1.0, -0.999}, 1, 200000, 2);
    check_gig_moment({1e-3, 1.0, -0.999}, -1, 200000, 3);
    check_gig_moment({2e4, 1.0, -500}, 1, 200000, 4);
    check_gig_moment({200, 1.0, -500}, 1, 200000, 5);
    check_gig_moment({2e4, 1.0, -45}, 1, 200000, 6);
    check_gig_moment({1.0, 1.0, 0.5}, 1, 200000, 7);
    check_gig_moment({0.5, 2.0, 3.0}, 1, 200000, 8);
    check_gig_moment({5.0, 0.2, -2.5}, 1, 200000, 9);
}

TEST_CASE("giG boundary cases reduce to gamma and inverse gamma") {
    Rng rng(11);
    const int n = 200000;
    // chi = 0: Gamma(lambda, rate rho / 2)
    auto g = sample_moments(n, [&] { return sample_gig({0.0, 2.0, 3.0}, rng); });
    CHECK(g.mean == doctest::Approx(3.0).epsilon(0.01));
    // rho = 0: inverse gamma with shape -lambda and scale chi / 2
    auto ig = sample_moments(n, [&] { return 1.0 / sample_gig({4.0, 0.0, -3.0}, rng); });
    CHECK(ig.mean == doctest::Approx(3.0 / 2.0).epsilon(0.01));
}

TEST_CASE("log giG draws agree with the density") {
    Rng rng(12);
    const GigParams g{2e4, 1.0, -500};
    const double want = oracle::gig_moment(g.chi, g.rho, g.lambda0, 1);
    auto m = sample_moments(100000, [&] { return std::exp(sample_log_gig(g, rng)); });
    CHECK(m.mean == doctest::Approx(want).epsilon(0.005));
}

TEST_CASE("inverse gaussian moments") {
    for (auto [mu, lam, k] : {std::tuple{1.0, 1.0, 1.0}, {0.05, 1.0, 1.0}, {3.0, 10.0, 1.0}, {1e4, 1.0, -1.0},
                              {1e-3, 1.0, 1.0}, {50.0, 1.0, -1.0}}) {
        Rng rng(static_cast<std::uint64_t>(mu * 1000 + lam));
        const int n = 200000;
        const double want = oracle::inverse_gaussian_moment(mu, lam, k);
        const double want2 = oracle::inverse_gaussian_moment(mu, lam, 2 * k);
        const double se = std::sqrt((want2 - want * want) / n);
        auto m = sample_moments(n, [&] { return std::pow(sample_inverse_gaussian(mu, lam, rng), k); });
        INFO("mu=" << mu << " lambda=" << lam << " k=" << k);
        CHECK(std::abs(m.mean - want) < 5 * se);
    }
    // closed forms as a check on the quadrature itself
    CHECK(oracle::inverse_gaussian_moment(2.0, 3.0, 1) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(oracle::inverse_gaussian_moment(2.0, 3.0, -1) == doctest::Approx(0.5 + 1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("log inverse gaussian across the double range") {
    Rng rng(13);
    const int n = 200000;
    for (double mu : {0.05, 3.0}) {
        const double want = oracle::inverse_gaussian_moment(mu, 1.0, 1);
        const double se = std::sqrt((oracle::inverse_gaussian_moment(mu, 1.0, 2) - want * want) / n);
        auto m = sample_moments(n, [&] { return std::exp(sample_log_inverse_gaussian(std::log(mu), 1.0, rng)); });
        CHECK(std::abs(m.mean - want) < 5 * se);
    }
    // X / mu ~ IG(1, 1 / mu): mean 1, variance mu
    const double log_mu = -20.0;
    auto r = sample_moments(n, [&] { return std::exp(sample_log_inverse_gaussian(log_mu, 1.0, rng) - log_mu); });
    CHECK(std::abs(r.mean - 1.0) < 5 * std::exp(0.5 * log_mu) / std::sqrt(n));
    CHECK(r.var == doctest::Approx(std::exp(log_mu)).epsilon(0.05));
    // far below the double range the draw is the mean
    CHECK(sample_log_inverse_gaussian(-900.0, 1.0, rng) == -900.0);
    CHECK(std::isfinite(sample_log_inverse_gaussian(700.0, 1.0, rng)));
    CHECK_THROWS_AS(sample_log_inverse_gaussian(0.0, 0.0, rng), InvalidArgument);
}

TEST_CASE("dirichlet via giG lies on the simplex") {
    Rng rng(13);
    Vector beta(6);
    beta << 0.0, 1e-30, 0.5, 2.0, 1e3, 0.1;
    for (double a : {0.001, 0.02, 0.5}) {
        for (int rep = 0; rep < 200; ++rep) {
            const Vector phi = sample_dirichlet_via_gig(beta, 1.0, a, rng);
            CHECK(std::abs(phi.sum() - 1.0) < 1e-12);
            CHECK(phi.minCoeff() > 0.0);
            const Vector lp = sample_log_dirichlet_via_gig(beta, 0.7, a, rng);
            CHECK(std::abs(lp.array().exp().sum() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("dirichlet with equal inputs is exchangeable") {
    Rng rng(14);
    const Vector beta = Vector::Constant(4, 0.3);
    Vector acc = Vector::Zero(4);
    const int n = 40000;
    for (int i = 0; i < n; ++i) acc += sample_dirichlet_via_gig(beta, 1.0, 0.5, rng);
    acc /= n;
    for (Index j = 0; j < 4; ++j) CHECK(acc(j) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("elementary samplers") {
    Rng rng(15);
    const int n = 200000;
    CHECK(sample_moments(n, [&] { return sample_gamma(2.5, 2.0, rng); }).mean == doctest::Approx(1.25).epsilon(0.01));
    CHECK(sample_moments(n, [&] { return sample_gamma(0.01, 1.0, rng); }).mean ==
          doctest::Approx(0.01).epsilon(0.05));
    CHECK(sample_moments(n, [&] { return std::exp(sample_log_gamma(0.001, 1.0, rng)); }).mean ==
          doctest::Approx(0.001).epsilon(0.1));
    CHECK(sample_moments(n, [&] { return sample_inverse_gamma(5.0, 8.0, rng); }).mean ==
          doctest::Approx(2.0).epsilon(0.01));
    CHECK(sample_moments(n, [&] { return sample_exponential(4.0, rng); }).mean == doctest::Approx(0.25).epsilon(0.01));
    const auto lap = sample_moments(n, [&] { return sample_laplace(0.5, rng); });
    CHECK(std::abs(lap.mean) < 0.01);
    CHECK(lap.var == doctest::Approx(0.5).epsilon(0.02));
    const auto z = sample_moments(n, [&] { return sample_std_normal(rng); });
    CHECK(std::abs(z.mean) < 0.01);
    CHECK(z.var == doctest::Approx(1.0).epsilon(0.02));
}
