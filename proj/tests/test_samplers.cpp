#include "pcr/samplers.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace pcr;

namespace {

Dataset make_data(Index n, Index p, std::uint64_t seed, double noise = 1.0) {
    Rng rng(seed, 99);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    Vector beta = Vector::Zero(p);
    beta(0) = 1.5;
    if (p > 2) beta(2) = -1.0;
    Vector y = x * beta;
    for (Index i = 0; i < n; ++i) y(i) += noise * rng.normal();
    return standardize(Dataset(y, x));
}

/// Dataset whose design has X^T X = I exactly.
Dataset orthonormal_data(Index n, Index p, std::uint64_t seed) {
    Rng rng(seed, 98);
    Matrix z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(z).householderQ() * Matrix::Identity(n, p);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.normal();
    y += q * Vector::LinSpaced(p, 3.0, -1.0);
    return Dataset(y, q);
}

/// Standard error of the mean of a series from non-overlapping batch means.
double batch_se(const Vector& x, Index batches = 20) {
    const Index m = x.size() / batches;
    Vector means(batches);
    for (Index b = 0; b < batches; ++b) means(b) = x.segment(b * m, m).mean();
    const double v = (means.array() - means.mean()).square().sum() / static_cast<double>(batches - 1);
    return std::sqrt(v / static_cast<double>(batches));
}

/// Geweke z comparing the first 10% and last 50% of a series.
double geweke_z(const Vector& x) {
    const Index n = x.size();
    const Vector a = x.head(n / 10);
    const Vector b = x.tail(n / 2);
    return (a.mean() - b.mean()) / std::sqrt(std::pow(batch_se(a, 10), 2) + std::pow(batch_se(b, 10), 2));
}

Vector ridge_mean(const Dataset& d, double gamma) {
    Matrix m = d.x().transpose() * d.x();
    m.diagonal().array() += gamma;
    return m.ldlt().solve(d.x().transpose() * d.y());
}

}  // namespace

TEST_CASE("mcmc config validation") {
    CHECK_THROWS_AS((McmcConfig{100, 100, 1, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((McmcConfig{300, 100, 0, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((McmcConfig{250, 100, 2, 1}.validate()), InvalidArgument);
    CHECK_NOTHROW((McmcConfig{300, 100, 2, 1}.validate()));
    CHECK(McmcConfig{}.kept() == 10000);
}

TEST_CASE("normal prior with fixed gamma reproduces the ridge posterior") {
    const Dataset d = make_data(40, 6, 1);
    const double gamma = 2.0;
    const InverseGammaPrior ig{};
    const McmcConfig cfg{22000, 2000, 1, 5};
    const DrawMatrix out = gibbs_normal(d, NormalFixed{gamma}, ig, cfg);
    REQUIRE(out.draws.rows() == 20000);

    const Vector want = ridge_mean(d, gamma);
    for (Index j = 0; j < d.p(); ++j) {
        const double se = batch_se(out.draws.col(j));
        INFO("coefficient " << j);
        CHECK(std::abs(out.draws.col(j).mean() - want(j)) < 3 * se + 1e-12);
    }

    // Marginal posterior: sigma^2 | y ~ IG(a0 + n/2, b0 + (y^T y - mu^T (X^T X + gamma I) mu) / 2),
    // cov(beta | y) = E[sigma^2 | y] (X^T X + gamma I)^-1.
    Matrix m = d.x().transpose() * d.x();
    m.diagonal().array() += gamma;
    const double shape = ig.shape + 0.5 * static_cast<double>(d.n());
    const double scale = ig.scale + 0.5 * (d.y().squaredNorm() - want.dot(m * want));
    const double s2 = scale / (shape - 1.0);
    CHECK(out.sigma2_draws.mean() == doctest::Approx(s2).epsilon(0.03));
    const Matrix cov = s2 * m.inverse();
    const PosteriorSummary s = summarize(out);
    for (Index j = 0; j < d.p(); ++j) CHECK(s.beta_cov(j, j) == doctest::Approx(cov(j, j)).epsilon(0.06));
}

TEST_CASE("infinite shrinkage pins the posterior mean at zero") {
    const Dataset d = make_data(30, 5, 2);
    const DrawMatrix out = gibbs_normal(d, NormalFixed{1e12}, {}, McmcConfig{1200, 200, 1, 3});
    CHECK(summarize(out).beta_mean.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("gaussian conditional: fast and cholesky paths agree with the exact moments") {
    for (auto [n, p] : {std::pair<Index, Index>{30, 8}, {10, 40}}) {
        const Dataset d = make_data(n, p, 3 + static_cast<std::uint64_t>(p));
        GaussianConditional cond(d);
        CHECK(cond.uses_fast_path() == (p >= 4 * n));
        Vector prec(p);
        for (Index j = 0; j < p; ++j) prec(j) = 0.5 + 0.1 * static_cast<double>(j);
        const double sigma2 = 0.7;
        Matrix m = d.x().transpose() * d.x();
        m.diagonal() += prec;
        const Matrix v = m.inverse();
        const Vector mean = v * d.x().transpose() * d.y();

        Rng rng(17);
        const int draws = 20000;
        Vector acc = Vector::Zero(p), acc2 = Vector::Zero(p);
        for (int i = 0; i < draws; ++i) {
            const Vector b = cond.draw(prec, sigma2, rng, i);
            acc += b;
            acc2 += b.cwiseAbs2();
        }
        acc /= draws;
        acc2 = acc2 / draws - acc.cwiseAbs2();
        for (Index j = 0; j < p; ++j) {
            const double sd = std::sqrt(sigma2 * v(j, j));
            INFO("n=" << n << " p=" << p << " j=" << j);
            CHECK(std::abs(acc(j) - mean(j)) < 4 * sd / std::sqrt(double(draws)));
            CHECK(acc2(j) == doctest::Approx(sd * sd).epsilon(0.05));
        }
    }
}

TEST_CASE("laplace prior with vanishing lambda recovers OLS") {
    const Dataset d = orthonormal_data(40, 4, 4);
    const Vector ols = d.x().transpose() * d.y();
    const DrawMatrix out = gibbs_laplace(d, LaplaceFixed{1e-6}, {}, McmcConfig{21000, 1000, 1, 9});
    for (Index j = 0; j < d.p(); ++j) {
        const double se = batch_se(out.draws.col(j));
        INFO("coefficient " << j);
        CHECK(std::abs(out.draws.col(j).mean() - ols(j)) < 3 * se);
    }
}

TEST_CASE("dl on a single strong predictor") {
    Rng gen(21);
    Matrix x(50, 1);
    Vector y(50);
    for (Index i = 0; i < 50; ++i) {
        x(i, 0) = gen.normal();
        y(i) = 2.0 * x(i, 0) + gen.normal();
    }
    const Dataset d(y, x);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DrawMatrix out = gibbs_dl(d, 0.5, {}, McmcConfig{3000, 1000, 1, seed});
        const double b = out.draws.col(0).mean();
        const double s2 = out.sigma2_draws.mean();
        CHECK(b > 1.5);
        CHECK(b < 2.5);
        CHECK(s2 > 0.5);
        CHECK(s2 < 2.0);
    }
}

TEST_CASE("single-point grid reproduces the fixed-a sampler") {
    const Dataset d = make_data(30, 5, 6);
    const McmcConfig cfg{600, 100, 1, 12};
    const double grid[] = {0.3};
    const DrawMatrix a = gibbs_dl(d, 0.3, {}, cfg);
    const DrawMatrix b = gibbs_dl_hypergrid(d, std::span<const double>(grid, 1), {}, cfg);
    CHECK(a.draws == b.draws);
    CHECK(a.sigma2_draws == b.sigma2_draws);
}

TEST_CASE("grid mass on a sums to one") {
    Rng gen(22);
    Matrix x(40, 2);
    Vector y(40);
    for (Index i = 0; i < 40; ++i) {
        x(i, 0) = gen.normal();
        x(i, 1) = gen.normal();
        y(i) = 50.0 * x(i, 0) + gen.normal();
    }
    const Dataset d(y, x);
    const double grid[] = {0.01, 0.5};
    const DrawMatrix out = gibbs_dl_hypergrid(d, std::span<const double>(grid, 2), {}, McmcConfig{1100, 100, 1, 3});
    REQUIRE(out.a_grid_mass.size() == 2);
    CHECK(out.a_grid_mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.a_grid_mass.minCoeff() >= 0.0);
    for (Index i = 0; i < out.hyper_draws.size(); ++i)
        CHECK((out.hyper_draws(i) == 0.01 || out.hyper_draws(i) == 0.5));
}

TEST_CASE("dl with p >> n and a = 1/p keeps sigma^2 on the data scale") {
    // Local scales underflow far below any fixed floor here; the chain must
    // still use one consistent set of scales for every conditional.
    const Dataset d = make_data(40, 600, 23);
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        DlOptions opts;
        double min_phitau = 1;
        opts.observer = [&](Index, const DLState& s) { min_phitau = std::min(min_phitau, s.phi.minCoeff() * s.tau); };
        const DrawMatrix out = gibbs_dl(d, 1.0 / 600, {}, McmcConfig{4000, 1000, 1, seed}, opts);
        CHECK(min_phitau < 1e-12);
        worst = std::max(worst, out.sigma2_draws.maxCoeff());
    }
    CHECK(worst < 10.0);
}

TEST_CASE("dl grid validation") {
    const Dataset d = make_data(30, 5, 7);
    const McmcConfig cfg{300, 100, 1, 1};
    CHECK_THROWS_AS(gibbs_dl(d, 0.0, {}, cfg), InvalidArgument);
    CHECK_THROWS_AS(gibbs_dl(d, 0.7, {}, cfg), InvalidArgument);
    const double bad[] = {0.2, 0.6};
    CHECK_THROWS_AS(gibbs_dl_hypergrid(d, std::span<const double>(bad, 2), {}, cfg), InvalidArgument);
    CHECK_THROWS_AS(gibbs_dl_hypergrid(d, DLHyperGrid{0.3, 0.2, 5}, {}, cfg), InvalidArgument);
}

TEST_CASE("dl state stays on the simplex at every sweep") {
    const Dataset d = make_data(30, 8, 8);
    Index sweeps = 0;
    bool ok = true;
    DlOptions opts;
    opts.observer = [&](Index, const DLState& s) {
        ++sweeps;
        ok = ok && std::abs(s.phi.sum() - 1.0) < 1e-12 && s.phi.minCoeff() > 0 && s.psi.minCoeff() > 0 &&
             s.tau > 0 && s.sigma2 > 0 && s.beta.allFinite();
    };
    gibbs_dl(d, 0.2, {}, McmcConfig{700, 200, 1, 4}, opts);
    CHECK(sweeps == 700);
    CHECK(ok);
    sweeps = 0;
    gibbs_dl_hypergrid(d, DLHyperGrid{0.05, 0.5, 20}, {}, McmcConfig{700, 200, 1, 4}, opts);
    CHECK(sweeps == 700);
    CHECK(ok);
}

TEST_CASE("samplers are bit-reproducible") {
    const Dataset d = make_data(30, 5, 9);
    const McmcConfig cfg{400, 100, 1, 77};
    const std::vector<PriorSpec> priors = {
        {NormalFixed{1.0}}, {NormalHyper{}}, {LaplaceFixed{1.0}}, {LaplaceHyper{}}, {DLFixed{0.5}},
        {DLHyperGrid{0.05, 0.5, 30}},
    };
    for (const auto& prior : priors) {
        const DrawMatrix a = run_gibbs(d, prior, cfg);
        const DrawMatrix b = run_gibbs(d, prior, cfg);
        INFO(family_name(prior.family));
        CHECK(a.draws.rows() == 300);
        CHECK(a.draws == b.draws);
        CHECK(a.sigma2_draws == b.sigma2_draws);
        const DrawMatrix c = run_gibbs(d, prior, McmcConfig{400, 100, 1, 78});
        CHECK(a.draws != c.draws);
    }
}

TEST_CASE("thinning keeps the documented row count") {
    const Dataset d = make_data(30, 5, 10);
    const DrawMatrix out = gibbs_normal(d, NormalFixed{1.0}, {}, McmcConfig{1300, 300, 5, 1});
    CHECK(out.draws.rows() == 200);
    CHECK(out.sigma2_draws.size() == 200);
}

TEST_CASE("stationarity of every sampler") {
    const Dataset d = make_data(30, 5, 11);
    const std::vector<PriorSpec> priors = {
        {NormalFixed{1.0}}, {NormalHyper{}}, {LaplaceFixed{1.0}}, {LaplaceHyper{}}, {DLFixed{0.5}},
        {DLHyperGrid{0.05, 0.5, 30}},
    };
    for (const auto& prior : priors) {
        int within = 0;
        for (std::uint64_t seed = 1; seed <= 40; ++seed) {
            const DrawMatrix out = run_gibbs(d, prior, McmcConfig{4500, 500, 1, seed});
            within += std::abs(geweke_z(out.draws.col(0))) < 3.0;
        }
        INFO(family_name(prior.family) << ": " << within << "/40");
        CHECK(within >= 38);
    }
}

TEST_CASE("summarize examples") {
    DrawMatrix same;
    same.draws = Matrix(2, 3);
    same.draws << 1, 2, 3, 1, 2, 3;
    same.sigma2_draws = Vector::Constant(2, 0.5);
    const PosteriorSummary s = summarize(same);
    CHECK(s.beta_mean == Vector::LinSpaced(3, 1, 3));
    CHECK(s.beta_cov.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.sigma2_mean == 0.5);

    Rng rng(31);
    DrawMatrix neg;
    neg.draws = Matrix(500, 2);
    for (Index i = 0; i < 500; ++i) {
        neg.draws(i, 0) = rng.normal();
        neg.draws(i, 1) = -neg.draws(i, 0);
    }
    const PosteriorSummary t = summarize(neg);
    CHECK(t.beta_cov(0, 1) / std::sqrt(t.beta_cov(0, 0) * t.beta_cov(1, 1)) ==
          doctest::Approx(-1.0).epsilon(1e-12));

    DrawMatrix iid;
    iid.draws = Matrix(100000, 3);
    for (Index i = 0; i < iid.draws.rows(); ++i)
        for (Index j = 0; j < 3; ++j) iid.draws(i, j) = rng.normal();
    const PosteriorSummary u = summarize(iid);
    CHECK((u.beta_cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
    CHECK(u.n_draws == 100000);
}
