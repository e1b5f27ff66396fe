#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pcr {

using Index = Eigen::Index;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input data or parameters.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A factorization or sampler failed numerically.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Parameters of the centering/scaling applied by standardize().
struct Standardization {
    Vector x_mean;
    Vector x_scale;
    double y_mean = 0.0;
};

/**
 * Response vector and design matrix of a linear model y = X beta + eps.
 *
 * Immutable once built. The constructor checks the shape invariants
 * (n >= 2, p >= 1, matching row counts, finite entries).
 */
class Dataset {
public:
    Dataset(Vector y, Matrix x, std::vector<std::string> x_names = {},
            std::string y_name = "y");

    const Vector& y() const { return y_; }
    const Matrix& x() const { return x_; }
    Index n() const { return x_.rows(); }
    Index p() const { return x_.cols(); }

    bool standardized() const { return transform_.has_value(); }
    const std::optional<Standardization>& transform() const { return transform_; }

    const std::vector<std::string>& x_names() const { return x_names_; }
    const std::string& y_name() const { return y_name_; }

    /// Coefficients on the standardized scale mapped back to raw x units.
    Vector to_original_scale(const Vector& beta) const;

    /// Rows `rows` of this dataset, without any standardization state.
    Dataset subset_rows(const std::vector<Index>& rows) const;

    /// Columns `cols` of this dataset; keeps the standardization parameters
    /// of the retained columns.
    Dataset subset_columns(const std::vector<Index>& cols) const;

private:
    friend Dataset standardize(const Dataset& d);
    Vector y_;
    Matrix x_;
    std::vector<std::string> x_names_;
    std::string y_name_;
    std::optional<Standardization> transform_;
};

/// Reads a headed CSV; `response_col` becomes y, the remaining columns x.
Dataset load_csv(const std::string& path, const std::string& response_col);

/// Writes y followed by the x columns with 17 significant digits.
void write_csv(const std::string& path, const Dataset& d);

/// Centers y, centers x and scales each column to unit sample SD (n - 1).
/// Applying it to an already standardized dataset is a no-op.
Dataset standardize(const Dataset& d);

// Prior specification ---------------------------------------------------

/// Inverse-gamma prior with shape and scale.
struct InverseGammaPrior {
    double shape = 0.001;
    double scale = 0.001;
};

struct NormalFixed {
    double gamma;
};
/// beta ~ N(0, sigma_b^2 I), sigma_b^2 ~ IG(shape, scale).
struct NormalHyper {
    double shape = 0.001;
    double scale = 0.001;
};
struct LaplaceFixed {
    double lambda;
};
/// Gamma(shape, rate) hyperprior on lambda^2.
struct LaplaceHyper {
    double shape = 1.0;
    double rate = 1.0;
};
struct DLFixed {
    double a;
};
/// Discrete uniform prior on `n_points` equally spaced values in [lo, hi].
struct DLHyperGrid {
    double lo;
    double hi;
    Index n_points = 1000;

    std::vector<double> points() const;
};

using PriorFamilySpec =
    std::variant<NormalFixed, NormalHyper, LaplaceFixed, LaplaceHyper, DLFixed, DLHyperGrid>;

struct PriorSpec {
    PriorFamilySpec family;
    InverseGammaPrior sigma2_prior{};
};

/// Throws InvalidArgument if any hyperparameter is out of range.
void validate(const PriorSpec& prior);

/// Short label such as "normal_fixed" or "dl_hypergrid".
std::string family_name(const PriorFamilySpec& family);

// Spectra and posterior summaries ----------------------------------------

/// Eigen-decomposition of a symmetric PSD matrix, eigenvalues descending.
struct EigenSpectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Decomposes X^T X / n. Eigenvalues within -1e-10 of zero are clamped.
EigenSpectrum eigen_gram(const Dataset& d);

/// Same for an arbitrary symmetric matrix.
EigenSpectrum eigen_symmetric(const Matrix& m);

struct PosteriorSummary {
    Vector beta_mean;
    Matrix beta_cov;
    double sigma2_mean = 0.0;
    Index n_draws = 0;
};

void write_summary_csv(const std::string& path, const PosteriorSummary& s);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace pcr
