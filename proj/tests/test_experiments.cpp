#include "pcr/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace pcr;

namespace {

ExperimentConfig short_config() {
    ExperimentConfig cfg;
    cfg.n = 40;
    cfg.ps = {45};
    cfg.rhos = {0.5};
    cfg.reps = 2;
    cfg.options.mcmc = McmcConfig{400, 200, 1, 1};
    cfg.options.n_draws = 300;
    cfg.options.grid_points = 8;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("method names parse case-insensitively") {
    CHECK(parse_method("dl_tune") == MethodKind::dl_tune);
    CHECK(parse_method("Normal_hyper") == MethodKind::normal_hyper);
    CHECK(parse_method("LASSO") == MethodKind::lasso);
    CHECK(method_name(MethodKind::laplace_tune) == "Laplace_tune");
    CHECK_THROWS_AS(parse_method("ridge"), InvalidArgument);
    CHECK(MethodSpec{MethodKind::dl_fixed, 0.5, "a=1/2"}.name() == "a=1/2");
    CHECK(MethodSpec{MethodKind::dl_fixed, 0.5, ""}.name() == "DL_fixed");
}

TEST_CASE("table method lists") {
    CHECK(table_methods("t1", 60, 50).size() == 7);
    const auto t4 = table_methods("t4", 60, 1000);
    REQUIRE(t4.size() == 3);
    CHECK(t4[1].value == doctest::Approx(1.0 / 60));
    CHECK(t4[2].value == doctest::Approx(1.0 / 1000));
    CHECK(table_methods("t5", 60, 50).front().kind == MethodKind::normal_tune);
    CHECK_THROWS_AS(table_methods("t9", 60, 50), InvalidArgument);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
}

TEST_CASE("method grids") {
    const auto g = method_grid(PriorFamily::laplace, 60, 50, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(1e-2));
    CHECK(g.back() == doctest::Approx(1e3));
    CHECK(g[2] == doctest::Approx(std::sqrt(10.0)));
    CHECK(method_grid(PriorFamily::dl, 60, 50, 1) == std::vector<double>{0.5});
    CHECK_THROWS_AS(method_grid(PriorFamily::dl, 60, 50, 0), InvalidArgument);
}

TEST_CASE("experiment datasets are shared across methods and tables") {
    const ExperimentConfig cfg = short_config();
    const auto [a, ta] = experiment_dataset(cfg, 45, 0.5, 1);
    const auto [b, tb] = experiment_dataset(cfg, 45, 0.5, 1);
    const auto [c, tc] = experiment_dataset(cfg, 45, 0.5, 0);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    CHECK(a.x() != c.x());
}

TEST_CASE("run_method is deterministic for every method") {
    const ExperimentConfig cfg = short_config();
    const auto [data, truth] = experiment_dataset(cfg, 45, 0.5, 0);
    for (const auto& m : table_methods("t1", cfg.n, 45)) {
        const MethodFit a = run_method(data, m, cfg.options, 11);
        const MethodFit b = run_method(data, m, cfg.options, 11);
        INFO(m.name());
        CHECK(a.path.ordering == b.path.ordering);
        CHECK(a.beta_original == b.beta_original);
        CHECK(a.summary.has_value() == (m.kind != MethodKind::lasso));
        const bool tuned = m.kind == MethodKind::normal_tune || m.kind == MethodKind::laplace_tune ||
                           m.kind == MethodKind::dl_tune;
        CHECK(a.tune.has_value() == tuned);
        CHECK(std::isfinite(a.hyper) == tuned);
    }
    const MethodFit f = run_method(data, {MethodKind::dl_fixed, 0.2, ""}, cfg.options, 11);
    CHECK(f.hyper == 0.2);
    CHECK(f.path.ordering.size() == 45);
}

TEST_CASE("small table run yields finite areas and a summary") {
    ExperimentConfig cfg = short_config();
    cfg.methods = table_methods("t1", cfg.n, 45);
    cfg.jobs = 2;
    int lines = 0;
    cfg.log = [&](const std::string&) { ++lines; };
    const auto results = run_selection_experiment(cfg);
    CHECK(results.size() == 14);
    CHECK(lines == 14);
    for (const auto& r : results) {
        INFO(r.method << " rep " << r.replicate << ": " << r.error);
        CHECK(r.ok());
        CHECK(std::isfinite(r.roc_area));
        CHECK(std::isfinite(r.prc_area));
        CHECK(std::isnan(r.squared_error) == (r.method == "Lasso"));
    }
    const auto rows = summarize_results(results);
    CHECK(rows.size() == 21);
    for (const auto& row : rows)
        if (row.metric != "squared_error" || row.method != "Lasso") CHECK(row.count == 2);

    cfg.jobs = 1;
    cfg.log = nullptr;
    const auto again = run_selection_experiment(cfg);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].roc_area == again[i].roc_area);
        CHECK(results[i].prc_area == again[i].prc_area);
    }
}

TEST_CASE("failed replicates are reported, not thrown") {
    ExperimentConfig cfg = short_config();
    cfg.reps = 1;
    cfg.methods = {{MethodKind::dl_fixed, 0.9, ""}};
    const auto results = run_selection_experiment(cfg);
    REQUIRE(results.size() == 1);
    CHECK_FALSE(results[0].ok());
    CHECK(results[0].error.find("(0, 1/2]") != std::string::npos);
}

TEST_CASE("ar spectrum") {
    const Vector s = ar_spectrum(50, 0.5);
    CHECK(s.sum() == doctest::Approx(50.0));
    CHECK(s.minCoeff() > 0);
    CHECK(ar_spectrum(10, 0.0).isApprox(Vector::Ones(10)));
}

TEST_CASE("gamma experiment rows") {
    ExperimentConfig cfg = short_config();
    cfg.n = 60;
    cfg.ps = {50};
    cfg.reps = 3;
    const auto rows = run_gamma_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].count == 3);
    CHECK(std::isfinite(rows[0].derived_mean));
    CHECK(std::isfinite(rows[0].tuned_mean));
    CHECK(rows[0].theoretic > rows[0].theoretic_expected_gram);
}
