#include "pcr/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pcr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = cell.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? std::string() : cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_real(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

}  // namespace

Dataset::Dataset(Vector y, Matrix x, std::vector<std::string> x_names, std::string y_name)
    : y_(std::move(y)), x_(std::move(x)), x_names_(std::move(x_names)), y_name_(std::move(y_name)) {
    if (x_.rows() < 2) throw InvalidArgument("dataset needs n >= 2 rows, got " + std::to_string(x_.rows()));
    if (x_.cols() < 1) throw InvalidArgument("dataset needs p >= 1 columns");
    if (y_.size() != x_.rows())
        throw InvalidArgument("response length " + std::to_string(y_.size()) +
                              " does not match design rows " + std::to_string(x_.rows()));
    if (!y_.allFinite() || !x_.allFinite()) throw InvalidArgument("dataset contains non-finite values");
    if (x_names_.empty()) {
        x_names_.reserve(static_cast<std::size_t>(x_.cols()));
        for (Index j = 0; j < x_.cols(); ++j) x_names_.push_back("x" + std::to_string(j + 1));
    } else if (static_cast<Index>(x_names_.size()) != x_.cols()) {
        throw InvalidArgument("column name count does not match p");
    }
}

Vector Dataset::to_original_scale(const Vector& beta) const {
    if (!transform_) return beta;
    return beta.cwiseQuotient(transform_->x_scale);
}

Dataset Dataset::subset_rows(const std::vector<Index>& rows) const {
    Matrix xs(static_cast<Index>(rows.size()), p());
    Vector ys(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        xs.row(static_cast<Index>(i)) = x_.row(rows[i]);
        ys(static_cast<Index>(i)) = y_(rows[i]);
    }
    return Dataset(std::move(ys), std::move(xs), x_names_, y_name_);
}

Dataset Dataset::subset_columns(const std::vector<Index>& cols) const {
    Matrix xs(n(), static_cast<Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        xs.col(static_cast<Index>(k)) = x_.col(cols[k]);
        names.push_back(x_names_[static_cast<std::size_t>(cols[k])]);
    }
    Dataset out(y_, std::move(xs), std::move(names), y_name_);
    if (transform_) {
        Standardization t;
        t.y_mean = transform_->y_mean;
        t.x_mean.resize(static_cast<Index>(cols.size()));
        t.x_scale.resize(static_cast<Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            t.x_mean(static_cast<Index>(k)) = transform_->x_mean(cols[k]);
            t.x_scale(static_cast<Index>(k)) = transform_->x_scale(cols[k]);
        }
        out.transform_ = std::move(t);
    }
    return out;
}

Dataset load_csv(const std::string& path, const std::string& response_col) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("CSV file '" + path + "' has no header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = split_line(line);
    const auto it = std::find(header.begin(), header.end(), response_col);
    if (it == header.end())
        throw InvalidArgument("response column absent: '" + response_col + "' not in header of '" + path + "'");
    const auto ycol = static_cast<std::size_t>(it - header.begin());

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw InvalidArgument("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_real(cells[c], vals[c]))
                throw InvalidArgument("non-numeric cell '" + cells[c] + "' at row " + std::to_string(line_no) +
                                      ", column " + std::to_string(c + 1) + " ('" + header[c] + "')");
        }
        rows.push_back(std::move(vals));
    }
    const auto n = static_cast<Index>(rows.size());
    if (n < 2) throw InvalidArgument("CSV file '" + path + "' has n = " + std::to_string(n) + " < 2 data rows");
    const auto p = static_cast<Index>(header.size()) - 1;
    if (p < 1) throw InvalidArgument("CSV file '" + path + "' has no predictor columns");

    Vector y(n);
    Matrix x(n, p);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != ycol) names.push_back(header[c]);
    for (Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        Index j = 0;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c == ycol)
                y(i) = r[c];
            else
                x(i, j++) = r[c];
        }
    }
    return Dataset(std::move(y), std::move(x), std::move(names), response_col);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << d.y_name();
    for (const auto& name : d.x_names()) out << ',' << name;
    out << '\n';
    for (Index i = 0; i < d.n(); ++i) {
        out << format_double(d.y()(i));
        for (Index j = 0; j < d.p(); ++j) out << ',' << format_double(d.x()(i, j));
        out << '\n';
    }
}

Dataset standardize(const Dataset& d) {
    if (d.standardized()) return d;
    const Index n = d.n();
    Standardization t;
    t.x_mean = d.x().colwise().mean().transpose();
    t.y_mean = d.y().mean();
    Matrix xc = d.x().rowwise() - t.x_mean.transpose();
    t.x_scale.resize(d.p());
    for (Index j = 0; j < d.p(); ++j) {
        const double sd = std::sqrt(xc.col(j).squaredNorm() / static_cast<double>(n - 1));
        const double mag = std::max(1.0, std::abs(t.x_mean(j)));
        if (!(sd > 1e-12 * mag)) throw InvalidArgument("constant column " + std::to_string(j + 1));
        t.x_scale(j) = sd;
        xc.col(j) /= sd;
    }
    Vector yc = d.y().array() - t.y_mean;
    Dataset out(std::move(yc), std::move(xc), d.x_names(), d.y_name());
    out.transform_ = std::move(t);
    return out;
}

std::vector<double> DLHyperGrid::points() const {
    std::vector<double> g(static_cast<std::size_t>(n_points));
    for (Index k = 0; k < n_points; ++k)
        g[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_points - 1);
    return g;
}

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

}  // namespace

void validate(const PriorSpec& prior) {
    require_positive(prior.sigma2_prior.shape, "sigma2 prior shape");
    require_positive(prior.sigma2_prior.scale, "sigma2 prior scale");
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, NormalFixed>) {
                require_positive(f.gamma, "normal prior gamma");
            } else if constexpr (std::is_same_v<T, NormalHyper>) {
                require_positive(f.shape, "normal hyperprior shape");
                require_positive(f.scale, "normal hyperprior scale");
            } else if constexpr (std::is_same_v<T, LaplaceFixed>) {
                require_positive(f.lambda, "laplace lambda");
            } else if constexpr (std::is_same_v<T, LaplaceHyper>) {
                require_positive(f.shape, "laplace hyperprior shape");
                require_positive(f.rate, "laplace hyperprior rate");
            } else if constexpr (std::is_same_v<T, DLFixed>) {
                if (!(f.a > 0.0 && f.a <= 0.5)) throw InvalidArgument("DL concentration a must lie in (0, 1/2]");
            } else {
                if (!(f.lo > 0.0 && f.lo < f.hi && f.hi <= 0.5))
                    throw InvalidArgument("DL grid needs 0 < lo < hi <= 1/2");
                if (f.n_points < 2) throw InvalidArgument("DL grid needs at least 2 points");
            }
        },
        prior.family);
}

std::string family_name(const PriorFamilySpec& family) {
    static const char* names[] = {"normal_fixed", "normal_hyper", "laplace_fixed",
                                  "laplace_hyper", "dl_fixed", "dl_hypergrid"};
    return names[family.index()];
}

EigenSpectrum eigen_symmetric(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) {
        const double cond = m.norm() * m.inverse().norm();
        throw NumericalError("eigensolver did not converge (condition estimate " + format_double(cond) + ")");
    }
    const Index p = m.rows();
    EigenSpectrum out;
    out.eigenvalues = es.eigenvalues().reverse();
    out.eigenvectors = es.eigenvectors().rowwise().reverse();
    for (Index j = 0; j < p; ++j) {
        double& v = out.eigenvalues(j);
        if (v < 0.0) {
            if (v < -1e-10) throw NumericalError("matrix is not positive semi-definite (eigenvalue " +
                                                 format_double(v) + ")");
            v = 0.0;
        }
    }
    return out;
}

EigenSpectrum eigen_gram(const Dataset& d) {
    Matrix g = Matrix::Zero(d.p(), d.p());
    g.selfadjointView<Eigen::Lower>().rankUpdate(d.x().transpose(), 1.0 / static_cast<double>(d.n()));
    g = g.selfadjointView<Eigen::Lower>();
    return eigen_symmetric(g);
}

void write_summary_csv(const std::string& path, const PosteriorSummary& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    const Index p = s.beta_mean.size();
    out << "# sigma2_mean=" << format_double(s.sigma2_mean) << '\n';
    out << "# n_draws=" << s.n_draws << '\n';
    out << "index,beta_mean";
    for (Index j = 0; j < p; ++j) out << ",cov_" << (j + 1);
    out << '\n';
    for (Index i = 0; i < p; ++i) {
        out << (i + 1) << ',' << format_double(s.beta_mean(i));
        for (Index j = 0; j < p; ++j) out << ',' << format_double(s.beta_cov(i, j));
        out << '\n';
    }
}

}  // namespace pcr
