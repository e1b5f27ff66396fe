#pragma once

#include "pcr/core.hpp"
#include "pcr/distributions.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pcr {

struct SimDesign {
    Index n = 60;
    Index p = 50;
    double rho = 0.5;
    double sigma2 = 1.0;
    std::uint64_t seed = 1;

    /// n >= 2, p >= 41, 0 <= rho < 1, sigma2 > 0.
    void validate() const;
};

/// beta0 = (0_10, B1, 0_20, B2, 0_{p-40}) with B1, B2 ~ U(0, 1)^5.
struct TruthPattern {
    Vector beta0;
    /// 0-based indices 10..14 and 35..39.
    std::vector<Index> support;
};

/// Rows iid N(0, R), R_jk = rho^|j-k|, built column by column as an AR(1)
/// sequence; y = X beta0 + N(0, sigma2). Replicate r of a design draws from
/// Rng(seed, r).
std::pair<Dataset, TruthPattern> simulate(const SimDesign& design, std::uint64_t replicate = 0);

/// Fixed support of the simulation truth (0-based).
std::vector<Index> truth_support();

struct EvalCurves {
    /// Point k belongs to the model made of the first k ordered variables.
    std::vector<std::array<double, 2>> roc_points;  // (FPR, TPR)
    std::vector<std::array<double, 2>> prc_points;  // (recall, precision)
    double roc_area = 0.0;
    double prc_area = 0.0;
    /// The ordering covered fewer than p variables.
    bool partial = false;
};

/// ROC and PRC curves of the nested models along `ordering` (0-based
/// indices). Precision is 1 at the empty model. Areas are trapezoidal over
/// the stored points, so a partial ordering only covers the range reached.
EvalCurves score_ordering(const std::vector<Index>& ordering, const std::vector<Index>& support, Index p);

/// Sum of squared differences between an estimate and the truth.
double squared_error(const Vector& estimate, const Vector& truth);

/// The `keep` columns with largest |corr(x_j, y)|, in decreasing order;
/// ties go to the lower index, constant columns count as correlation 0.
std::vector<Index> screen_by_correlation(const Dataset& d, Index keep);

/// Fit-and-select step used by split_and_mspe: receives the standardized
/// training data and returns the selected (0-based) support.
using SelectFn = std::function<std::vector<Index>(const Dataset& train, Rng& rng)>;

struct SplitError {
    Index split;
    std::string message;
};

struct MspeReport {
    double mean_mspe = 0.0;
    double se_mspe = 0.0;
    double mean_size = 0.0;
    double se_size = 0.0;
    std::vector<double> mspe;
    std::vector<double> size;
    std::vector<SplitError> failures;
};

/**
 * Repeated random train/test splits. Split s permutes rows with
 * rng.substream({s, 0}) and hands rng.substream({s, 1}) to the pipeline.
 * The selected support is refit by OLS on the standardized training rows
 * and evaluated on the test rows under the training transform.
 */
MspeReport split_and_mspe(const Dataset& d, Index train_n, const SelectFn& pipeline, Index n_splits, const Rng& rng,
                          int jobs = 1);

/// Mean and standard error (sd / sqrt(m)) of a sample.
std::pair<double, double> mean_se(const std::vector<double>& v);

}  // namespace pcr
