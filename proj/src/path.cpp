#include "pcr/path.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace pcr {

namespace {

SelectionPath to_selection_path(PathResult<double>&& r, Index p) {
    SelectionPath out;
    out.truncated = r.truncated;
    out.steps.reserve(r.knots.size());
    for (auto& k : r.knots)
        out.steps.push_back({std::move(k.entered), std::move(k.dropped), k.lambda, std::move(k.active),
                             std::move(k.coefficients)});
    out.ordering = std::move(r.entry_order);
    out.partial = static_cast<Index>(out.ordering.size()) < p;
    return out;
}

}  // namespace

SelectionProblem build_problem(const PosteriorSummary& s) { return build_problem(s.beta_mean, s.beta_cov); }

SelectionProblem build_problem(const Vector& beta_hat, const Matrix& beta_cov) {
    const Index p = beta_hat.size();
    if (p == 0 || beta_cov.rows() != p || beta_cov.cols() != p)
        throw InvalidArgument("posterior mean and covariance dimensions do not agree");
    if (!beta_hat.allFinite() || !beta_cov.allFinite()) throw InvalidArgument("posterior summary is not finite");

    Matrix sigma = 0.5 * (beta_cov + beta_cov.transpose());
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * sigma.trace() / static_cast<double>(p);
        sigma.diagonal().array() += jitter;
        llt.compute(sigma);
        if (llt.info() != Eigen::Success || !(jitter > 0))
            throw NumericalError("posterior covariance is not positive definite even after jitter");
    }
    // Sigma = R R^T with R lower, so Sigma^-1 = R^-T R^-1 = L^T L with L = R^-1.
    const Matrix r = llt.matrixL();
    Matrix l = Matrix::Identity(p, p);
    r.triangularView<Eigen::Lower>().solveInPlace(l);
    for (Index i = 0; i < p; ++i)
        if (!std::isfinite(l(i, i)) || l(i, i) <= 0) throw NumericalError("posterior covariance is singular");

    SelectionProblem prob;
    prob.beta_hat = beta_hat;
    prob.sigma_inv_chol = l.triangularView<Eigen::Lower>();
    prob.precision = l.transpose() * l;
    prob.weights.resize(p);
    for (Index j = 0; j < p; ++j) {
        const double b2 = beta_hat(j) * beta_hat(j);
        prob.weights(j) = b2 > 1.0 / kMaxWeight ? 1.0 / b2 : kMaxWeight;
    }
    return prob;
}

Index default_max_steps(Index n, Index p) { return 8 * std::min(n, p); }

SelectionPath solve_path(const SelectionProblem& prob, Index max_steps) {
    const Index p = prob.p();
    const Vector q = prob.precision * prob.beta_hat;
    auto path = to_selection_path(weighted_lasso_path<double>(prob.precision, q, prob.weights, p, max_steps), p);
    if (!path.truncated && path.partial) {
        std::vector<char> in(static_cast<std::size_t>(p), 0);
        for (Index j : path.ordering) in[static_cast<std::size_t>(j)] = 1;
        for (Index j = 0; j < p; ++j)
            if (!in[static_cast<std::size_t>(j)]) path.ordering.push_back(j);
        path.partial = false;
    }
    return path;
}

SelectionPath lasso_baseline(const Dataset& d, Index max_steps) {
    if (!d.standardized()) throw InvalidArgument("lasso baseline requires a standardized dataset");
    const Matrix& x = d.x();
    Matrix gram = Matrix::Zero(d.p(), d.p());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    const Vector q = x.transpose() * d.y();
    const Index max_active = std::min(d.n() - 1, d.p());
    return to_selection_path(
        weighted_lasso_path<double>(gram, q, Vector::Ones(d.p()), max_active, max_steps), d.p());
}

std::pair<Matrix, Vector> transformed_design(const SelectionProblem& prob) {
    Matrix xs = prob.sigma_inv_chol * prob.weights.cwiseInverse().asDiagonal();
    Vector ys = prob.sigma_inv_chol * prob.beta_hat;
    return {std::move(xs), std::move(ys)};
}

double credible_objective(const SelectionProblem& prob, const Vector& beta, double lambda) {
    const Vector r = prob.sigma_inv_chol * (beta - prob.beta_hat);
    return r.squaredNorm() + lambda * prob.weights.dot(beta.cwiseAbs());
}

double kkt_violation(const SelectionProblem& prob, const Vector& beta, double lambda) {
    const Vector g = 2.0 * (prob.precision * (prob.beta_hat - beta));
    double worst = 0.0;
    for (Index j = 0; j < prob.p(); ++j) {
        const double pen = lambda * prob.weights(j);
        const double scale = std::max(1.0, pen);
        double v;
        if (beta(j) != 0.0)
            v = std::abs(g(j) - pen * (beta(j) > 0 ? 1.0 : -1.0));
        else
            v = std::max(0.0, std::abs(g(j)) - pen);
        worst = std::max(worst, v / scale);
    }
    return worst;
}

Vector coefficients_at(const SelectionPath& path, double lambda) {
    if (path.steps.empty()) throw InvalidArgument("empty path");
    const auto& s = path.steps;
    if (lambda >= s.front().lambda) return s.front().coefficients;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (lambda >= s[k].lambda) {
            const double hi = s[k - 1].lambda;
            const double lo = s[k].lambda;
            const double t = (hi - lambda) / (hi - lo);
            return (1.0 - t) * s[k - 1].coefficients + t * s[k].coefficients;
        }
    }
    return s.back().coefficients;
}

Vector ols_refit(const Dataset& d, const std::vector<Index>& support) {
    Vector beta = Vector::Zero(d.p());
    if (support.empty()) return beta;
    Matrix xs(d.n(), static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) xs.col(static_cast<Index>(k)) = d.x().col(support[k]);
    const Vector b = xs.colPivHouseholderQr().solve(d.y());
    for (std::size_t k = 0; k < support.size(); ++k) beta(support[k]) = b(static_cast<Index>(k));
    return beta;
}

BicChoice select_bic(const SelectionPath& path, const Dataset& d, Index max_size) {
    if (path.steps.empty()) throw InvalidArgument("empty path");
    if (max_size < 1) throw InvalidArgument("no path step satisfies the size constraint");
    if (max_size >= d.n()) throw InvalidArgument("max_size must be below the sample size");

    std::set<std::vector<Index>> seen;
    std::vector<std::vector<Index>> candidates{{}};
    seen.insert({});
    for (const auto& s : path.steps) {
        if (static_cast<Index>(s.active.size()) >= max_size) continue;
        auto a = s.active;
        std::sort(a.begin(), a.end());
        if (seen.insert(a).second) candidates.push_back(std::move(a));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& u, const auto& v) { return u.size() < v.size(); });

    const double n = static_cast<double>(d.n());
    BicChoice best;
    best.bic = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        const Vector beta = ols_refit(d, c);
        const double rss = std::max((d.y() - d.x() * beta).squaredNorm(), std::numeric_limits<double>::min());
        const double bic = n * std::log(rss / n) + static_cast<double>(c.size()) * std::log(n);
        if (bic < best.bic) best = {c, bic, rss};
    }
    return best;
}

void write_path_csv(const std::string& path, const SelectionPath& sp) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "step,lambda,entering_index,active_size,coefficients\n";
    for (std::size_t k = 0; k < sp.steps.size(); ++k) {
        const auto& s = sp.steps[k];
        std::string events;
        for (Index j : s.entered) events += (events.empty() ? "" : ";") + std::to_string(j + 1);
        for (Index j : s.dropped) events += (events.empty() ? "" : ";") + std::to_string(-(j + 1));
        if (events.empty()) events = "0";
        std::string coefs;
        auto active = s.active;
        std::sort(active.begin(), active.end());
        for (Index j : active) {
            if (!coefs.empty()) coefs += ' ';
            coefs += std::to_string(j + 1) + ":" + format_double(s.coefficients(j));
        }
        out << k << ',' << format_double(s.lambda) << ',' << events << ',' << s.active.size() << ",\"" << coefs
            << "\"\n";
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace pcr
