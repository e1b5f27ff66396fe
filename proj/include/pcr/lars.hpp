#pragma once

#include "pcr/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pcr {

/// One knot of a piecewise-linear L1 path.
template <class Scalar>
struct PathKnot {
    Scalar lambda;
    std::vector<Index> entered;
    std::vector<Index> dropped;
    std::vector<Index> active;
    Vec<Scalar> coefficients;
};

template <class Scalar>
struct PathResult {
    std::vector<PathKnot<Scalar>> knots;
    /// Variables in order of first entry.
    std::vector<Index> entry_order;
    /// True when the path reached lambda = 0.
    bool reached_zero = false;
    /// True when max_steps stopped the path early.
    bool truncated = false;
};

/**
 * Cholesky factor L L^T = K[A, A] of a growing and shrinking active set.
 *
 * Adding a variable appends a row; removing one deletes the row and
 * restores the triangle with Givens rotations.
 */
template <class Scalar>
class ActiveCholesky {
public:
    explicit ActiveCholesky(Index capacity) : l_(Mat<Scalar>::Zero(capacity, capacity)) {}

    Index size() const { return size_; }

    /// `cross` holds K[A, j] in active order. Returns false (and leaves the
    /// factor unchanged) when j is numerically dependent on the active set.
    bool add(const Vec<Scalar>& cross, Scalar diag) {
        const Index k = size_;
        Vec<Scalar> row = Vec<Scalar>::Zero(k);
        if (k > 0) row = l_.topLeftCorner(k, k).template triangularView<Eigen::Lower>().solve(cross);
        const Scalar d2 = diag - row.squaredNorm();
        if (!(d2 > Scalar(1e-11) * std::max(diag, Scalar(std::numeric_limits<Scalar>::min())))) return false;
        l_.row(k).head(k) = row.transpose();
        l_(k, k) = std::sqrt(d2);
        ++size_;
        return true;
    }

    void remove(Index pos) {
        const Index k = size_;
        for (Index r = pos; r + 1 < k; ++r) l_.row(r).head(k) = l_.row(r + 1).head(k);
        l_.row(k - 1).setZero();
        for (Index i = pos; i + 1 < k; ++i) {
            const Scalar a = l_(i, i);
            const Scalar b = l_(i, i + 1);
            const Scalar r = std::hypot(a, b);
            if (r == Scalar(0)) continue;
            const Scalar c = a / r;
            const Scalar s = b / r;
            for (Index row = i; row + 1 < k; ++row) {
                const Scalar x = l_(row, i);
                const Scalar y = l_(row, i + 1);
                l_(row, i) = c * x + s * y;
                l_(row, i + 1) = -s * x + c * y;
            }
        }
        l_.col(k - 1).setZero();
        --size_;
    }

    Vec<Scalar> solve(const Vec<Scalar>& rhs) const {
        const auto l = l_.topLeftCorner(size_, size_).template triangularView<Eigen::Lower>();
        Vec<Scalar> z = l.solve(rhs);
        return l.transpose().solve(z);
    }

private:
    Mat<Scalar> l_;
    Index size_ = 0;
};

/**
 * Homotopy (LARS with lasso modification) for
 *
 *     min_b  b^T G b - 2 b^T q + lambda * sum_j w_j |b_j|
 *
 * over the whole lambda path. Knot lambdas follow this scaling, so the KKT
 * conditions read 2 (q - G b)_j = lambda w_j sign(b_j) on the active set and
 * |2 (q - G b)_j| <= lambda w_j elsewhere. With G = X^T X, q = X^T y and unit
 * weights this is the lasso path of ||y - X b||^2 + lambda ||b||_1.
 *
 * Ties in entry are broken by lower index. At most `max_active` variables are
 * active at once; dependent variables are skipped.
 */
template <class Scalar>
PathResult<Scalar> weighted_lasso_path(const Mat<Scalar>& gram, const Vec<Scalar>& linear,
                                       const Vec<Scalar>& weights, Index max_active, Index max_steps) {
    const Index p = gram.rows();
    if (gram.cols() != p || linear.size() != p || weights.size() != p)
        throw InvalidArgument("path problem dimensions do not agree");
    for (Index j = 0; j < p; ++j)
        if (!(weights(j) > Scalar(0)) || !std::isfinite(static_cast<double>(weights(j))))
            throw InvalidArgument("path weights must be positive and finite");
    max_active = std::min(max_active, p);

    PathResult<Scalar> out;
    Vec<Scalar> b = Vec<Scalar>::Zero(p);
    Vec<Scalar> c = linear;
    std::vector<char> is_active(static_cast<std::size_t>(p), 0);
    std::vector<char> skipped(static_cast<std::size_t>(p), 0);
    std::vector<char> seen(static_cast<std::size_t>(p), 0);
    std::vector<Index> active;
    std::vector<Scalar> sign;
    ActiveCholesky<Scalar> chol(max_active);

    auto scaled = [&](Index j) { return c(j) / weights(j); };

    Scalar mu = 0;
    for (Index j = 0; j < p; ++j) mu = std::max(mu, std::abs(scaled(j)));
    if (mu == Scalar(0)) {
        out.knots.push_back({Scalar(0), {}, {}, {}, b});
        out.reached_zero = true;
        return out;
    }
    // Weights can span many orders of magnitude, so late knots sit far below
    // the first one; every tolerance is relative to the current mu.
    const Scalar tie_tol = Scalar(1e-10);
    const Scalar denom_tol = Scalar(1e-14);

    auto try_add = [&](Index j, std::vector<Index>& entered) {
        Vec<Scalar> cross(static_cast<Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) cross(static_cast<Index>(k)) = gram(active[k], j);
        if (!chol.add(cross, gram(j, j))) {
            skipped[static_cast<std::size_t>(j)] = 1;
            return;
        }
        active.push_back(j);
        sign.push_back(c(j) >= Scalar(0) ? Scalar(1) : Scalar(-1));
        is_active[static_cast<std::size_t>(j)] = 1;
        entered.push_back(j);
        if (!seen[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = 1;
            out.entry_order.push_back(j);
        }
    };

    // First knot: every variable attaining the maximum enters.
    {
        std::vector<Index> entered;
        for (Index j = 0; j < p && static_cast<Index>(active.size()) < max_active; ++j)
            if (std::abs(scaled(j)) >= mu * (Scalar(1) - tie_tol)) try_add(j, entered);
        out.knots.push_back({Scalar(2) * mu, entered, {}, active, b});
    }

    // Sign a variable had when it left the active set at the previous knot.
    // Re-entry with that sign would be immediate; the opposite sign is allowed.
    std::vector<Scalar> drop_sign(static_cast<std::size_t>(p), Scalar(0));
    for (Index step = 1;; ++step) {
        if (step > max_steps) {
            out.truncated = true;
            break;
        }
        if (active.empty()) break;
        const auto k = static_cast<Index>(active.size());
        Vec<Scalar> rhs(k);
        for (Index i = 0; i < k; ++i) rhs(i) = weights(active[static_cast<std::size_t>(i)]) * sign[static_cast<std::size_t>(i)];
        const Vec<Scalar> dir = chol.solve(rhs);
        Vec<Scalar> a = Vec<Scalar>::Zero(p);
        for (Index i = 0; i < k; ++i) a += gram.col(active[static_cast<std::size_t>(i)]) * dir(i);

        const Scalar tiny = Scalar(1e-12) * mu;
        Scalar gamma = mu;  // reaching lambda = 0
        const bool room = k < max_active;
        if (room) {
            for (Index j = 0; j < p; ++j) {
                if (is_active[static_cast<std::size_t>(j)] || skipped[static_cast<std::size_t>(j)])
                    continue;
                const Scalar cj = scaled(j);
                const Scalar aj = a(j) / weights(j);
                const Scalar ds = drop_sign[static_cast<std::size_t>(j)];
                if (ds <= Scalar(0) && Scalar(1) - aj > denom_tol) {
                    const Scalar g = (mu - cj) / (Scalar(1) - aj);
                    if (g > tiny && g < gamma) gamma = g;
                }
                if (ds >= Scalar(0) && Scalar(1) + aj > denom_tol) {
                    const Scalar g = (mu + cj) / (Scalar(1) + aj);
                    if (g > tiny && g < gamma) gamma = g;
                }
            }
        }
        for (Index i = 0; i < k; ++i) {
            const Index j = active[static_cast<std::size_t>(i)];
            if (dir(i) == Scalar(0)) continue;
            const Scalar g = -b(j) / dir(i);
            if (g > tiny && g < gamma) gamma = g;
        }

        // Collect every event that occurs at gamma (within tolerance).
        const Scalar slack = tie_tol * gamma;
        const bool to_zero = gamma >= mu;
        std::vector<Index> to_enter, to_drop;
        if (room && !to_zero) {
            for (Index j = 0; j < p; ++j) {
                if (is_active[static_cast<std::size_t>(j)] || skipped[static_cast<std::size_t>(j)])
                    continue;
                const Scalar cj = scaled(j);
                const Scalar aj = a(j) / weights(j);
                const Scalar ds = drop_sign[static_cast<std::size_t>(j)];
                bool hit = false;
                if (ds <= Scalar(0) && Scalar(1) - aj > denom_tol) {
                    const Scalar g = (mu - cj) / (Scalar(1) - aj);
                    hit = hit || (g > tiny && std::abs(g - gamma) <= slack);
                }
                if (ds >= Scalar(0) && Scalar(1) + aj > denom_tol) {
                    const Scalar g = (mu + cj) / (Scalar(1) + aj);
                    hit = hit || (g > tiny && std::abs(g - gamma) <= slack);
                }
                if (hit) to_enter.push_back(j);
            }
        }
        for (Index i = 0; i < k; ++i) {
            const Index j = active[static_cast<std::size_t>(i)];
            if (dir(i) == Scalar(0)) continue;
            const Scalar g = -b(j) / dir(i);
            if (g > tiny && std::abs(g - gamma) <= slack) to_drop.push_back(j);
        }

        for (Index i = 0; i < k; ++i) b(active[static_cast<std::size_t>(i)]) += gamma * dir(i);
        mu = to_zero ? Scalar(0) : mu - gamma;

        // Exact zeros for dropped variables, then refresh correlations.
        std::vector<Index> dropped;
        std::fill(drop_sign.begin(), drop_sign.end(), Scalar(0));
        for (Index j : to_drop) {
            const auto it = std::find(active.begin(), active.end(), j);
            const auto pos = static_cast<Index>(it - active.begin());
            b(j) = 0;
            drop_sign[static_cast<std::size_t>(j)] = sign[static_cast<std::size_t>(pos)];
            chol.remove(pos);
            active.erase(it);
            sign.erase(sign.begin() + pos);
            is_active[static_cast<std::size_t>(j)] = 0;
            dropped.push_back(j);
        }
        c = linear - gram * b;

        std::vector<Index> entered;
        if (mu > Scalar(0)) {
            std::sort(to_enter.begin(), to_enter.end());
            for (Index j : to_enter)
                if (static_cast<Index>(active.size()) < max_active) try_add(j, entered);
        }
        out.knots.push_back({Scalar(2) * mu, entered, dropped, active, b});
        if (mu == Scalar(0)) {
            out.reached_zero = true;
            break;
        }
    }
    return out;
}

}  // namespace pcr
