#pragma once

#include "pcr/core.hpp"
#include "pcr/path.hpp"
#include "pcr/r2_tuner.hpp"
#include "pcr/samplers.hpp"
#include "pcr/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcr {

enum class MethodKind {
    lasso,
    normal_hyper,
    normal_tune,
    normal_fixed,
    laplace_hyper,
    laplace_tune,
    laplace_fixed,
    dl_hyper,
    dl_tune,
    dl_fixed,
};

struct MethodSpec {
    MethodKind kind = MethodKind::dl_tune;
    /// gamma, lambda or a for the *_fixed kinds.
    double value = 0.0;
    /// Column label in reports; defaults to the canonical method name.
    std::string label;

    std::string name() const;
};

/// Parses "dl_tune", "Normal_hyper", ... (case-insensitive). Fixed kinds
/// take their value separately.
MethodKind parse_method(const std::string& s);
std::string method_name(MethodKind k);

struct MethodOptions {
    McmcConfig mcmc{};
    InverseGammaPrior sigma2_prior{};
    R2Target target{};
    Index n_draws = 2000;
    Index grid_points = 50;
    DlSweepOrder sweep_order = DlSweepOrder::blocked;
    /// 0 selects default_max_steps(n, p).
    Index max_steps = 0;
    /// Threads for grid tuning inside one fit.
    int jobs = 1;
};

struct MethodFit {
    SelectionPath path;
    /// Posterior summary on the standardized scale (empty for the lasso).
    std::optional<PosteriorSummary> summary;
    /// Posterior mean mapped back to the raw x scale.
    Vector beta_original;
    /// Tuned or fixed hyperparameter; NaN when a hyperprior is used.
    double hyper = 0.0;
    std::optional<TuneResult> tune;
};

/// The grid tune_by_grid searches for a method, with `points` log-spaced values.
std::vector<double> method_grid(PriorFamily family, Index n, Index p, Index points);

/**
 * Standardizes `raw`, tunes if needed (grid substream 0 of `seed`), runs the
 * sampler (seeded from substream 1) and solves the selection path.
 */
MethodFit run_method(const Dataset& raw, const MethodSpec& method, const MethodOptions& opts, std::uint64_t seed);

/// A 64-bit seed derived from (root, path).
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// Table experiments ----------------------------------------------------------

struct ExperimentConfig {
    Index n = 60;
    std::vector<Index> ps{50};
    std::vector<double> rhos{0.5, 0.9};
    Index reps = 20;
    std::vector<MethodSpec> methods;
    MethodOptions options{};
    std::uint64_t seed = 1;
    int jobs = 1;
    /// Called after each finished task (for a progress line).
    std::function<void(const std::string&)> log;
};

struct ReplicateResult {
    std::string method;
    Index p = 0;
    double rho = 0.0;
    Index replicate = 0;
    double roc_area = 0.0;
    double prc_area = 0.0;
    bool partial = false;
    /// Squared error of the raw-scale posterior mean; NaN for the lasso.
    double squared_error = 0.0;
    double hyper = 0.0;
    EvalCurves curves;
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Replicate r of (p, rho) always uses the same simulated dataset, whichever
/// table or method asks for it.
std::pair<Dataset, TruthPattern> experiment_dataset(const ExperimentConfig& cfg, Index p, double rho, Index replicate);

/// Every (p, rho, replicate, method) combination, in that order.
std::vector<ReplicateResult> run_selection_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    std::string method;
    Index p;
    double rho;
    std::string metric;
    double mean;
    double se;
    Index count;
};

/// Mean and SE of roc_area, prc_area and squared_error per (method, p, rho),
/// over successful replicates.
std::vector<SummaryRow> summarize_results(const std::vector<ReplicateResult>& results);

/// Default method lists of the tables.
std::vector<MethodSpec> table_methods(const std::string& table, Index n, Index p);

struct GammaRow {
    Index p;
    double rho;
    double theoretic;
    double theoretic_expected_gram;
    double derived_mean, derived_se;
    double tuned_mean, tuned_se;
    Index count;
};

/// Closed-form gamma from the population AR(rho) spectrum, from the expected
/// spectrum moments of X^T X / n, and the per-dataset derived and tuned
/// means.
std::vector<GammaRow> run_gamma_experiment(const ExperimentConfig& cfg, std::vector<std::string>* errors = nullptr);

/// Eigenvalues of the p x p AR correlation matrix rho^|j-k|.
Vector ar_spectrum(Index p, double rho);

void write_results_csv(const std::string& path, const std::vector<ReplicateResult>& results);
void write_summary_table_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_curves_csv(const std::string& path, const std::vector<ReplicateResult>& results);
void write_gamma_csv(const std::string& path, const std::vector<GammaRow>& rows);

}  // namespace pcr
