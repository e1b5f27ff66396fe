#include "pcr/core.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace pcr;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("pcr_core_" + name);
    std::ofstream(path) << content;
    return path.string();
}

Dataset small() {
    Matrix x(4, 2);
    x << 1, 2, 2, 1, 3, 5, 4, 3;
    Vector y(4);
    y << 1, 2, 3, 5;
    return Dataset(y, x, {"a", "b"});
}

}  // namespace

TEST_CASE("dataset rejects bad shapes") {
    CHECK_THROWS_AS(Dataset(Vector::Zero(1), Matrix::Zero(1, 2)), InvalidArgument);
    CHECK_THROWS_AS(Dataset(Vector::Zero(3), Matrix::Zero(2, 2)), InvalidArgument);
    Matrix x = Matrix::Ones(3, 2);
    x(1, 1) = std::nan("");
    CHECK_THROWS_AS(Dataset(Vector::Zero(3), x), InvalidArgument);
}

TEST_CASE("csv round trip") {
    const Dataset d = small();
    const auto path = (std::filesystem::temp_directory_path() / "pcr_core_rt.csv").string();
    write_csv(path, d);
    const Dataset e = load_csv(path, "y");
    CHECK(e.n() == 4);
    CHECK(e.p() == 2);
    CHECK(e.x_names() == std::vector<std::string>{"a", "b"});
    CHECK((e.x() - d.x()).norm() == 0.0);
    CHECK((e.y() - d.y()).norm() == 0.0);
}

TEST_CASE("csv response column may sit anywhere") {
    const auto path = temp_file("mid.csv", "x1,resp,x2\n1,10,2\n3,20,4\n5,31,7\n");
    const Dataset d = load_csv(path, "resp");
    CHECK(d.y()(2) == 31.0);
    CHECK(d.x()(2, 1) == 7.0);
    CHECK(d.x_names() == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("csv errors name the problem") {
    const auto missing = temp_file("missing.csv", "a,b\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(missing, "y"), doctest::Contains("response column absent"), InvalidArgument);
    const auto bad = temp_file("bad.csv", "y,a\n1,2\n3,x\n");
    CHECK_THROWS_WITH_AS(load_csv(bad, "y"), doctest::Contains("non-numeric"), InvalidArgument);
    CHECK_THROWS(load_csv("/nonexistent/file.csv", "y"));
}

TEST_CASE("standardize centers and scales with the n-1 sd") {
    const Dataset s = standardize(small());
    REQUIRE(s.standardized());
    CHECK(std::abs(s.y().mean()) < 1e-14);
    for (Index j = 0; j < s.p(); ++j) {
        CHECK(std::abs(s.x().col(j).mean()) < 1e-14);
        CHECK(s.x().col(j).squaredNorm() / (s.n() - 1) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("standardize is idempotent") {
    const Dataset s = standardize(small());
    const Dataset t = standardize(s);
    CHECK((s.x() - t.x()).norm() == 0.0);
    CHECK((s.y() - t.y()).norm() == 0.0);
    CHECK((s.transform()->x_scale - t.transform()->x_scale).norm() == 0.0);
}

TEST_CASE("standardize rejects a constant column") {
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    CHECK_THROWS_WITH_AS(standardize(Dataset(Vector::LinSpaced(3, 0, 1), x)), doctest::Contains("constant column 2"),
                         InvalidArgument);
}

TEST_CASE("coefficients map back to the raw scale") {
    const Dataset raw = small();
    const Dataset s = standardize(raw);
    // OLS on standardized data, mapped back, equals OLS slopes on raw data with intercept.
    const Vector bs = s.x().colPivHouseholderQr().solve(s.y());
    Matrix xi(raw.n(), 3);
    xi << Vector::Ones(raw.n()), raw.x();
    const Vector braw = xi.colPivHouseholderQr().solve(raw.y());
    const Vector back = s.to_original_scale(bs);
    CHECK(back(0) == doctest::Approx(braw(1)).epsilon(1e-10));
    CHECK(back(1) == doctest::Approx(braw(2)).epsilon(1e-10));
}

TEST_CASE("subsets keep names and shape") {
    const Dataset d = small();
    const Dataset r = d.subset_rows({0, 2});
    CHECK(r.n() == 2);
    CHECK(r.x()(1, 0) == 3.0);
    const Dataset c = d.subset_columns({1});
    CHECK(c.p() == 1);
    CHECK(c.x_names()[0] == "b");
}

TEST_CASE("prior validation") {
    CHECK_NOTHROW(validate(PriorSpec{NormalFixed{1.0}}));
    CHECK_THROWS_AS(validate(PriorSpec{NormalFixed{0.0}}), InvalidArgument);
    CHECK_THROWS_AS(validate(PriorSpec{DLFixed{0.6}}), InvalidArgument);
    CHECK_THROWS_AS(validate(PriorSpec{DLHyperGrid{0.0, 0.5}}), InvalidArgument);
    CHECK_THROWS_AS(validate(PriorSpec{LaplaceFixed{-1}}), InvalidArgument);
    CHECK_THROWS_AS(validate(PriorSpec{NormalFixed{1.0}, InverseGammaPrior{0, 1}}), InvalidArgument);
    const auto pts = DLHyperGrid{0.1, 0.5, 5}.points();
    CHECK(pts.size() == 5);
    CHECK(pts.front() == 0.1);
    CHECK(pts.back() == 0.5);
    CHECK(family_name(PriorSpec{DLHyperGrid{0.1, 0.5}}.family) == "dl_hypergrid");
}

TEST_CASE("eigen_gram on an orthonormal design") {
    const Index n = 40, p = 5;
    Matrix q = Eigen::HouseholderQR<Matrix>(Matrix::Random(n, p)).householderQ() * Matrix::Identity(n, p);
    const Dataset d(Vector::Zero(n), std::sqrt(double(n)) * q);
    const EigenSpectrum s = eigen_gram(d);
    CHECK((s.eigenvalues - Vector::Ones(p)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigen_symmetric sorts descending and rejects indefinite input") {
    Matrix m(2, 2);
    m << 1, 0, 0, 3;
    const auto s = eigen_symmetric(m);
    CHECK(s.eigenvalues(0) == doctest::Approx(3));
    CHECK(s.eigenvalues(1) == doctest::Approx(1));
    m(0, 0) = -1;
    CHECK_THROWS(eigen_symmetric(m));
}

TEST_CASE("summary csv is written") {
    PosteriorSummary s{Vector::Ones(2), Matrix::Identity(2, 2), 0.5, 100};
    const auto path = (std::filesystem::temp_directory_path() / "pcr_core_summary.csv").string();
    write_summary_csv(path, s);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# sigma2_mean=", 0) == 0);
    CHECK(format_double(0.1) == "0.10000000000000001");
}
