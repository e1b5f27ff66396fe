#include "pcr/experiments.hpp"

#include "pcr/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace pcr {

namespace {

const std::pair<MethodKind, const char*> kNames[] = {
    {MethodKind::lasso, "Lasso"},
    {MethodKind::normal_hyper, "Normal_hyper"},
    {MethodKind::normal_tune, "Normal_tune"},
    {MethodKind::normal_fixed, "Normal_fixed"},
    {MethodKind::laplace_hyper, "Laplace_hyper"},
    {MethodKind::laplace_tune, "Laplace_tune"},
    {MethodKind::laplace_fixed, "Laplace_fixed"},
    {MethodKind::dl_hyper, "DL_hyper"},
    {MethodKind::dl_tune, "DL_tune"},
    {MethodKind::dl_fixed, "DL_fixed"},
};

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::uint64_t double_bits(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

std::uint64_t method_key(const MethodSpec& m) {
    return mix64(static_cast<std::uint64_t>(m.kind) ^ mix64(double_bits(m.value)));
}

}  // namespace

std::string method_name(MethodKind k) {
    for (const auto& [kind, name] : kNames)
        if (kind == k) return name;
    return "?";
}

std::string MethodSpec::name() const { return label.empty() ? method_name(kind) : label; }

MethodKind parse_method(const std::string& s) {
    const std::string l = lower(s);
    for (const auto& [kind, name] : kNames)
        if (lower(name) == l) return kind;
    throw InvalidArgument("unknown method '" + s + "'");
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    const Rng r = Rng(root).substream(path);
    return mix64(r.seed() ^ mix64(r.stream()));
}

std::vector<double> method_grid(PriorFamily family, Index n, Index p, Index points) {
    if (points < 1) throw InvalidArgument("grid needs at least one point");
    auto g = default_grid(family, n, p);
    if (points == static_cast<Index>(g.size())) return g;
    const double lo = std::log(g.front()), hi = std::log(g.back());
    std::vector<double> out(static_cast<std::size_t>(points));
    for (Index k = 0; k < points; ++k)
        out[static_cast<std::size_t>(k)] =
            points == 1 ? g.back() : std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
    out.back() = g.back();
    return out;
}

MethodFit run_method(const Dataset& raw, const MethodSpec& method, const MethodOptions& opts, std::uint64_t seed) {
    const Dataset d = standardize(raw);
    const Index n = d.n(), p = d.p();
    const Index max_steps = opts.max_steps > 0 ? opts.max_steps : default_max_steps(n, p);
    MethodFit fit;
    fit.hyper = std::nan("");

    if (method.kind == MethodKind::lasso) {
        fit.path = lasso_baseline(d, max_steps);
        fit.beta_original = d.to_original_scale(fit.path.steps.back().coefficients);
        return fit;
    }

    auto tune = [&](PriorFamily family) {
        const auto grid = method_grid(family, n, p, opts.grid_points);
        Rng grid_rng = Rng(seed).substream(0);
        fit.tune = tune_by_grid(d, family, grid, opts.target, opts.n_draws, grid_rng, opts.jobs);
        fit.hyper = fit.tune->hyperparameter;
        return fit.hyper;
    };

    McmcConfig cfg = opts.mcmc;
    cfg.seed = derive_seed(seed, {1});
    DlOptions dl_opts;
    dl_opts.order = opts.sweep_order;

    DrawMatrix draws;
    switch (method.kind) {
        case MethodKind::normal_hyper:
            draws = gibbs_normal(d, NormalHyper{}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::normal_tune:
            draws = gibbs_normal(d, NormalFixed{tune(PriorFamily::normal)}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::normal_fixed:
            fit.hyper = method.value;
            draws = gibbs_normal(d, NormalFixed{method.value}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::laplace_hyper:
            draws = gibbs_laplace(d, LaplaceHyper{}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::laplace_tune:
            draws = gibbs_laplace(d, LaplaceFixed{tune(PriorFamily::laplace)}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::laplace_fixed:
            fit.hyper = method.value;
            draws = gibbs_laplace(d, LaplaceFixed{method.value}, opts.sigma2_prior, cfg);
            break;
        case MethodKind::dl_hyper:
            draws = gibbs_dl_hypergrid(d, DLHyperGrid{1.0 / static_cast<double>(std::max(n, p)), 0.5, 1000},
                                       opts.sigma2_prior, cfg, dl_opts);
            break;
        case MethodKind::dl_tune:
            draws = gibbs_dl(d, tune(PriorFamily::dl), opts.sigma2_prior, cfg, dl_opts);
            break;
        case MethodKind::dl_fixed:
            fit.hyper = method.value;
            draws = gibbs_dl(d, method.value, opts.sigma2_prior, cfg, dl_opts);
            break;
        case MethodKind::lasso:
            break;
    }
    fit.summary = summarize(draws);
    fit.beta_original = d.to_original_scale(fit.summary->beta_mean);
    fit.path = solve_path(build_problem(*fit.summary), max_steps);
    return fit;
}

std::pair<Dataset, TruthPattern> experiment_dataset(const ExperimentConfig& cfg, Index p, double rho, Index replicate) {
    SimDesign design;
    design.n = cfg.n;
    design.p = p;
    design.rho = rho;
    design.sigma2 = 1.0;
    design.seed = cfg.seed;
    const auto rho_key = static_cast<std::uint64_t>(std::llround(rho * 1e6));
    return simulate(design, derive_seed(cfg.seed, {0, static_cast<std::uint64_t>(p), rho_key,
                                                   static_cast<std::uint64_t>(replicate)}));
}

std::vector<ReplicateResult> run_selection_experiment(const ExperimentConfig& cfg) {
    if (cfg.methods.empty()) throw InvalidArgument("no methods to run");
    if (cfg.reps < 1) throw InvalidArgument("reps must be positive");
    struct Task {
        Index p;
        double rho;
        Index rep;
        std::size_t method;
    };
    std::vector<Task> tasks;
    for (Index p : cfg.ps)
        for (double rho : cfg.rhos)
            for (Index r = 0; r < cfg.reps; ++r)
                for (std::size_t m = 0; m < cfg.methods.size(); ++m) tasks.push_back({p, rho, r, m});

    std::vector<ReplicateResult> results(tasks.size());
    std::mutex log_mutex;
    MethodOptions opts = cfg.options;
    opts.jobs = 1;
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const Task& t = tasks[i];
        const MethodSpec& m = cfg.methods[t.method];
        ReplicateResult& r = results[i];
        r.method = m.name();
        r.p = t.p;
        r.rho = t.rho;
        r.replicate = t.rep;
        try {
            const auto [data, truth] = experiment_dataset(cfg, t.p, t.rho, t.rep);
            const auto rho_key = static_cast<std::uint64_t>(std::llround(t.rho * 1e6));
            const std::uint64_t seed = derive_seed(
                cfg.seed, {1, static_cast<std::uint64_t>(t.p), rho_key, static_cast<std::uint64_t>(t.rep), method_key(m)});
            const MethodFit fit = run_method(data, m, opts, seed);
            r.curves = score_ordering(fit.path.ordering, truth.support, t.p);
            r.roc_area = r.curves.roc_area;
            r.prc_area = r.curves.prc_area;
            r.partial = r.curves.partial;
            r.squared_error = fit.summary ? squared_error(fit.beta_original, truth.beta0) : std::nan("");
            r.hyper = fit.hyper;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        if (cfg.log) {
            std::ostringstream line;
            line << r.method << " p=" << t.p << " rho=" << t.rho << " rep=" << t.rep;
            if (r.ok())
                line << " roc=" << r.roc_area << " prc=" << r.prc_area;
            else
                line << " FAILED: " << r.error;
            std::lock_guard lock(log_mutex);
            cfg.log(line.str());
        }
    });
    return results;
}

std::vector<SummaryRow> summarize_results(const std::vector<ReplicateResult>& results) {
    struct Key {
        Index p;
        double rho;
        std::string method;
        bool operator<(const Key& o) const { return std::tie(p, rho, method) < std::tie(o.p, o.rho, o.method); }
    };
    std::map<Key, std::vector<const ReplicateResult*>> groups;
    std::vector<Key> order;
    for (const auto& r : results) {
        Key k{r.p, r.rho, r.method};
        if (!groups.count(k)) order.push_back(k);
        if (r.ok()) groups[k].push_back(&r);
        else groups[k];
    }
    std::vector<SummaryRow> rows;
    for (const auto& k : order) {
        const auto& g = groups[k];
        auto add = [&](const char* metric, auto field) {
            std::vector<double> v;
            for (const auto* r : g)
                if (std::isfinite(field(*r))) v.push_back(field(*r));
            const auto [m, se] = mean_se(v);
            rows.push_back({k.method, k.p, k.rho, metric, m, se, static_cast<Index>(v.size())});
        };
        add("roc_area", [](const ReplicateResult& r) { return r.roc_area; });
        add("prc_area", [](const ReplicateResult& r) { return r.prc_area; });
        add("squared_error", [](const ReplicateResult& r) { return r.squared_error; });
    }
    return rows;
}

std::vector<MethodSpec> table_methods(const std::string& table, Index n, Index p) {
    if (table == "t1" || table == "t2" || table == "t3") {
        std::vector<MethodSpec> m;
        for (auto k : {MethodKind::lasso, MethodKind::normal_hyper, MethodKind::normal_tune, MethodKind::laplace_hyper,
                       MethodKind::laplace_tune, MethodKind::dl_hyper, MethodKind::dl_tune})
            m.push_back({k, 0.0, ""});
        return m;
    }
    if (table == "t4")
        return {{MethodKind::dl_fixed, 0.5, "a=1/2"},
                {MethodKind::dl_fixed, 1.0 / static_cast<double>(n), "a=1/n"},
                {MethodKind::dl_fixed, 1.0 / static_cast<double>(p), "a=1/p"}};
    if (table == "t5") return {{MethodKind::normal_tune, 0.0, ""}};
    throw InvalidArgument("unknown table '" + table + "' (expected t1..t5)");
}

Vector ar_spectrum(Index p, double rho) {
    Matrix r(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    return eigen_symmetric(r).eigenvalues;
}

std::vector<GammaRow> run_gamma_experiment(const ExperimentConfig& cfg, std::vector<std::string>* errors) {
    std::vector<GammaRow> rows;
    const R2Target& target = cfg.options.target;
    for (Index p : cfg.ps) {
        for (double rho : cfg.rhos) {
            const Vector spec = ar_spectrum(p, rho);
            const auto [s, s2] = expected_gram_moments(spec, cfg.n);
            GammaRow row{};
            row.p = p;
            row.rho = rho;
            row.theoretic = closed_form_gamma(spec.sum(), spec.squaredNorm(), target);
            row.theoretic_expected_gram = closed_form_gamma(s, s2, target);

            const auto reps = static_cast<std::size_t>(cfg.reps);
            std::vector<double> derived(reps, std::nan("")), tuned(reps, std::nan(""));
            std::vector<std::string> err(reps);
            parallel_for(reps, cfg.jobs, [&](std::size_t r) {
                try {
                    const auto [data, truth] = experiment_dataset(cfg, p, rho, static_cast<Index>(r));
                    const Dataset d = standardize(data);
                    derived[r] = derived_gamma(d, target);
                    const auto grid = method_grid(PriorFamily::normal, d.n(), p, cfg.options.grid_points);
                    const auto rho_key = static_cast<std::uint64_t>(std::llround(rho * 1e6));
                    Rng rng(derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(p), rho_key, r}));
                    tuned[r] = tune_by_grid(d, PriorFamily::normal, grid, target, cfg.options.n_draws, rng)
                                   .hyperparameter;
                } catch (const std::exception& e) {
                    err[r] = e.what();
                }
                if (cfg.log) cfg.log("gamma p=" + std::to_string(p) + " rep=" + std::to_string(r));
            });
            std::vector<double> dv, tv;
            for (std::size_t r = 0; r < reps; ++r) {
                if (!err[r].empty()) {
                    if (errors) errors->push_back("p=" + std::to_string(p) + " rho=" + format_double(rho) +
                                                  " rep=" + std::to_string(r) + ": " + err[r]);
                    continue;
                }
                dv.push_back(derived[r]);
                tv.push_back(tuned[r]);
            }
            std::tie(row.derived_mean, row.derived_se) = mean_se(dv);
            std::tie(row.tuned_mean, row.tuned_se) = mean_se(tv);
            row.count = static_cast<Index>(dv.size());
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

}  // namespace

void write_results_csv(const std::string& path, const std::vector<ReplicateResult>& results) {
    auto out = open_out(path);
    out << "method,replicate,roc_area,prc_area,partial_flag,p,rho,squared_error,hyper,error\n";
    for (const auto& r : results) {
        out << r.method << ',' << r.replicate << ',' << format_double(r.roc_area) << ',' << format_double(r.prc_area)
            << ',' << (r.partial ? 1 : 0) << ',' << r.p << ',' << format_double(r.rho) << ','
            << format_double(r.squared_error) << ',' << format_double(r.hyper) << ",\"" << r.error << "\"\n";
    }
}

void write_summary_table_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    auto out = open_out(path);
    out << "method,p,rho,metric,mean,se,count\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.p << ',' << format_double(r.rho) << ',' << r.metric << ',' << format_double(r.mean)
            << ',' << format_double(r.se) << ',' << r.count << '\n';
}

void write_curves_csv(const std::string& path, const std::vector<ReplicateResult>& results) {
    auto out = open_out(path);
    out << "method,p,rho,replicate,step,fpr,tpr,recall,precision\n";
    for (const auto& r : results) {
        if (!r.ok()) continue;
        for (std::size_t k = 0; k < r.curves.roc_points.size(); ++k)
            out << r.method << ',' << r.p << ',' << format_double(r.rho) << ',' << r.replicate << ',' << k << ','
                << format_double(r.curves.roc_points[k][0]) << ',' << format_double(r.curves.roc_points[k][1]) << ','
                << format_double(r.curves.prc_points[k][0]) << ',' << format_double(r.curves.prc_points[k][1]) << '\n';
    }
}

void write_gamma_csv(const std::string& path, const std::vector<GammaRow>& rows) {
    auto out = open_out(path);
    out << "p,rho,theoretic,theoretic_expected_gram,derived_mean,derived_se,tuned_mean,tuned_se,count\n";
    for (const auto& r : rows)
        out << r.p << ',' << format_double(r.rho) << ',' << format_double(r.theoretic) << ','
            << format_double(r.theoretic_expected_gram) << ',' << format_double(r.derived_mean) << ','
            << format_double(r.derived_se) << ',' << format_double(r.tuned_mean) << ',' << format_double(r.tuned_se)
            << ',' << r.count << '\n';
}

}  // namespace pcr
