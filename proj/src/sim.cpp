#include "pcr/sim.hpp"

#include "pcr/parallel.hpp"
#include "pcr/path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcr {

void SimDesign::validate() const {
    if (n < 2) throw InvalidArgument("design needs n >= 2");
    if (p < 41) throw InvalidArgument("design needs p >= 41 for the coefficient pattern");
    if (!(rho >= 0 && rho < 1)) throw InvalidArgument("rho must lie in [0, 1)");
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw InvalidArgument("sigma2 must be positive");
}

std::vector<Index> truth_support() { return {10, 11, 12, 13, 14, 35, 36, 37, 38, 39}; }

std::pair<Dataset, TruthPattern> simulate(const SimDesign& design, std::uint64_t replicate) {
    design.validate();
    Rng rng(design.seed, replicate);
    TruthPattern truth;
    truth.support = truth_support();
    truth.beta0 = Vector::Zero(design.p);
    for (Index j : truth.support) truth.beta0(j) = rng.uniform();

    const double rho = design.rho;
    const double innov = std::sqrt(1.0 - rho * rho);
    Matrix x(design.n, design.p);
    for (Index i = 0; i < design.n; ++i) {
        x(i, 0) = rng.normal();
        for (Index j = 1; j < design.p; ++j) x(i, j) = rho * x(i, j - 1) + innov * rng.normal();
    }
    const double sd = std::sqrt(design.sigma2);
    Vector y = x * truth.beta0;
    for (Index i = 0; i < design.n; ++i) y(i) += sd * rng.normal();

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(design.p));
    for (Index j = 0; j < design.p; ++j) names.push_back("x" + std::to_string(j + 1));
    return {Dataset(std::move(y), std::move(x), std::move(names)), std::move(truth)};
}

EvalCurves score_ordering(const std::vector<Index>& ordering, const std::vector<Index>& support, Index p) {
    if (p < 1) throw InvalidArgument("p must be positive");
    std::vector<char> is_true(static_cast<std::size_t>(p), 0), used(static_cast<std::size_t>(p), 0);
    for (Index j : support) {
        if (j < 0 || j >= p) throw InvalidArgument("support index out of range");
        is_true[static_cast<std::size_t>(j)] = 1;
    }
    const double n_pos = static_cast<double>(std::count(is_true.begin(), is_true.end(), 1));
    const double n_neg = static_cast<double>(p) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw InvalidArgument("support must be a nonempty proper subset");
    if (static_cast<Index>(ordering.size()) > p) throw InvalidArgument("ordering is not a permutation");

    EvalCurves c;
    c.partial = static_cast<Index>(ordering.size()) < p;
    c.roc_points.push_back({0.0, 0.0});
    c.prc_points.push_back({0.0, 1.0});
    double tp = 0, fp = 0;
    for (Index j : ordering) {
        if (j < 0 || j >= p || used[static_cast<std::size_t>(j)]) throw InvalidArgument("ordering is not a permutation");
        used[static_cast<std::size_t>(j)] = 1;
        (is_true[static_cast<std::size_t>(j)] ? tp : fp) += 1;
        c.roc_points.push_back({fp / n_neg, tp / n_pos});
        c.prc_points.push_back({tp / n_pos, tp / (tp + fp)});
    }
    auto trapezoid = [](const std::vector<std::array<double, 2>>& pts) {
        double a = 0;
        for (std::size_t k = 1; k < pts.size(); ++k)
            a += (pts[k][0] - pts[k - 1][0]) * 0.5 * (pts[k][1] + pts[k - 1][1]);
        return a;
    };
    c.roc_area = trapezoid(c.roc_points);
    c.prc_area = trapezoid(c.prc_points);
    return c;
}

double squared_error(const Vector& estimate, const Vector& truth) {
    if (estimate.size() != truth.size()) throw InvalidArgument("length mismatch");
    return (estimate - truth).squaredNorm();
}

std::vector<Index> screen_by_correlation(const Dataset& d, Index keep) {
    if (keep < 0 || keep > d.p()) throw InvalidArgument("keep must lie in [0, p]");
    const Vector yc = d.y().array() - d.y().mean();
    const double yn = yc.norm();
    std::vector<double> score(static_cast<std::size_t>(d.p()), 0.0);
    for (Index j = 0; j < d.p(); ++j) {
        const Vector xc = d.x().col(j).array() - d.x().col(j).mean();
        const double xn = xc.norm();
        if (xn > 1e-12 * (1.0 + d.x().col(j).cwiseAbs().maxCoeff()) && yn > 0)
            score[static_cast<std::size_t>(j)] = std::abs(xc.dot(yc)) / (xn * yn);
    }
    std::vector<Index> idx(static_cast<std::size_t>(d.p()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(keep));
    return idx;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    if (v.empty()) return {std::nan(""), std::nan("")};
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return {m, std::nan("")};
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

MspeReport split_and_mspe(const Dataset& d, Index train_n, const SelectFn& pipeline, Index n_splits, const Rng& rng,
                          int jobs) {
    if (!(train_n >= 2 && train_n < d.n())) throw InvalidArgument("train_n must lie in [2, n)");
    if (n_splits < 2) throw InvalidArgument("need at least two splits");

    const auto ns = static_cast<std::size_t>(n_splits);
    std::vector<double> mspe(ns, 0.0), size(ns, 0.0);
    std::vector<std::string> error(ns);
    std::vector<char> ok(ns, 0);

    parallel_for(ns, jobs, [&](std::size_t s) {
        try {
            Rng perm_rng = rng.substream({s, 0});
            std::vector<Index> rows(static_cast<std::size_t>(d.n()));
            std::iota(rows.begin(), rows.end(), Index{0});
            std::shuffle(rows.begin(), rows.end(), perm_rng.engine());
            std::vector<Index> train_rows(rows.begin(), rows.begin() + train_n);
            std::vector<Index> test_rows(rows.begin() + train_n, rows.end());
            std::sort(train_rows.begin(), train_rows.end());
            std::sort(test_rows.begin(), test_rows.end());

            const Dataset train = standardize(d.subset_rows(train_rows));
            Rng pipe_rng = rng.substream({s, 1});
            const std::vector<Index> support = pipeline(train, pipe_rng);
            const Vector beta = ols_refit(train, support);

            const Standardization& t = *train.transform();
            double err = 0;
            for (Index r : test_rows) {
                const Vector xs = (d.x().row(r).transpose() - t.x_mean).cwiseQuotient(t.x_scale);
                const double pred = t.y_mean + xs.dot(beta);
                err += (d.y()(r) - pred) * (d.y()(r) - pred);
            }
            mspe[s] = err / static_cast<double>(test_rows.size());
            size[s] = static_cast<double>(support.size());
            ok[s] = 1;
        } catch (const std::exception& e) {
            error[s] = e.what();
        }
    });

    MspeReport rep;
    for (std::size_t s = 0; s < ns; ++s) {
        if (ok[s]) {
            rep.mspe.push_back(mspe[s]);
            rep.size.push_back(size[s]);
        } else {
            rep.failures.push_back({static_cast<Index>(s), error[s]});
        }
    }
    std::tie(rep.mean_mspe, rep.se_mspe) = mean_se(rep.mspe);
    std::tie(rep.mean_size, rep.se_size) = mean_se(rep.size);
    return rep;
}

}  // namespace pcr
