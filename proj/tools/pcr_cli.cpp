#include "pcr/config.hpp"
#include "pcr/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace pcr;

namespace {

struct CommonFlags {
    std::string config;
    std::string seed;
    std::string jobs;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "key=value config file");
    cmd->add_option("--seed", f.seed, "root seed (U64)");
    cmd->add_option("--jobs", f.jobs, "worker threads");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--set", f.sets, "override: key=value (repeatable)");
}

RunConfig resolve(const std::string& command, const CommonFlags& f) {
    RunConfig cfg(command);
    if (!f.config.empty()) cfg.load_file(f.config);
    for (const auto& s : f.sets) cfg.parse(s, "--set");
    if (!f.seed.empty()) cfg.set("seed", f.seed);
    if (!f.jobs.empty()) cfg.set("jobs", f.jobs);
    if (!f.out.empty()) cfg.set("out", f.out);
    if (cfg.get_index("jobs") < 1) throw InvalidArgument("jobs must be at least 1");
    return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir = cfg.get("out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
    return dir;
}

std::string require(const RunConfig& cfg, const std::string& key) {
    if (!cfg.is_set(key)) throw InvalidArgument("missing required key '" + key + "'");
    return cfg.get(key);
}

R2Target target_of(const RunConfig& cfg) {
    R2Target t{cfg.get_double("target_a"), cfg.get_double("target_b")};
    t.validate();
    return t;
}

MethodOptions options_of(const RunConfig& cfg) {
    MethodOptions o;
    o.mcmc.n_iter = cfg.get_index("n_iter");
    o.mcmc.n_burn = cfg.get_index("n_burn");
    o.mcmc.thin = cfg.get_index("thin");
    o.mcmc.validate();
    o.target = target_of(cfg);
    o.n_draws = cfg.get_index("n_draws");
    o.grid_points = cfg.get_index("grid_points");
    const auto& order = cfg.get("sweep_order");
    if (order == "listed") o.sweep_order = DlSweepOrder::listed;
    else if (order == "blocked") o.sweep_order = DlSweepOrder::blocked;
    else throw InvalidArgument("sweep_order must be listed or blocked");
    o.jobs = static_cast<int>(cfg.get_index("jobs"));
    return o;
}

std::string numbered(const std::string& stem, Index k) {
    std::ostringstream s;
    s << stem << '_' << std::setw(3) << std::setfill('0') << k << ".csv";
    return s.str();
}

int cmd_simulate(const RunConfig& cfg) {
    SimDesign design;
    design.n = cfg.get_index("n");
    design.p = cfg.get_index("p");
    design.rho = cfg.get_double("rho");
    design.sigma2 = cfg.get_double("sigma2");
    design.seed = cfg.get_u64("seed");
    design.validate();
    const Index reps = cfg.get_index("reps");
    if (reps < 1) throw InvalidArgument("reps must be positive");
    const fs::path dir = out_dir(cfg);
    for (Index r = 1; r <= reps; ++r) {
        const auto [data, truth] = simulate(design, static_cast<std::uint64_t>(r - 1));
        write_csv((dir / numbered("data", r)).string(), data);
        std::ofstream t(dir / numbered("truth", r));
        if (!t) throw Error("cannot write truth file");
        t << "index,beta0\n";
        for (Index j = 0; j < design.p; ++j) t << (j + 1) << ',' << format_double(truth.beta0(j)) << '\n';
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "wrote " << reps << " dataset(s) to " << dir.string() << '\n';
    return 0;
}

int cmd_tune(const RunConfig& cfg) {
    const Dataset d = standardize(load_csv(require(cfg, "data"), cfg.get("response")));
    const PriorFamily family = parse_family(cfg.get("family"));
    const R2Target target = target_of(cfg);
    std::vector<double> grid = cfg.get_doubles("grid");
    if (grid.empty()) grid = method_grid(family, d.n(), d.p(), cfg.get_index("grid_points"));
    validate_grid(family, grid);
    const fs::path dir = out_dir(cfg);
    const Rng rng = Rng(cfg.get_u64("seed")).substream(0);
    const TuneResult r =
        tune_by_grid(d, family, grid, target, cfg.get_index("n_draws"), rng, static_cast<int>(cfg.get_index("jobs")));
    write_tune_csv((dir / "tune.csv").string(), r);

    std::ofstream s(dir / "tune_summary.csv");
    s << "family,grid_optimum,ks_statistic,closed_form_gamma\n";
    s << to_string(family) << ',' << format_double(r.hyperparameter) << ',' << format_double(r.ks_statistic) << ',';
    if (family == PriorFamily::normal) s << format_double(derived_gamma(d, target));
    s << '\n';
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "grid optimum " << r.hyperparameter << " (KS " << r.ks_statistic << ")";
    if (family == PriorFamily::normal) std::cout << ", closed form " << derived_gamma(d, target);
    std::cout << '\n';
    return 0;
}

int cmd_fit_select(const RunConfig& cfg) {
    const Dataset raw = load_csv(require(cfg, "data"), cfg.get("response"));
    MethodSpec method{parse_method(cfg.get("method")), 0.0, ""};
    const bool fixed = method.kind == MethodKind::normal_fixed || method.kind == MethodKind::laplace_fixed ||
                       method.kind == MethodKind::dl_fixed;
    if (fixed) method.value = cfg.get_double("value");
    else if (cfg.is_set("value")) throw InvalidArgument("'value' only applies to *_fixed methods");
    MethodOptions opts = options_of(cfg);
    opts.max_steps = cfg.get_index("max_steps");
    const Index max_size = cfg.is_set("max_size") ? cfg.get_index("max_size") : std::min<Index>(30, raw.n() - 1);
    const fs::path dir = out_dir(cfg);

    MethodFit fit;
    try {
        fit = run_method(raw, method, opts, cfg.get_u64("seed"));
    } catch (const Error& e) {
        throw Error(method.name() + ": " + e.what());
    }
    const Dataset d = standardize(raw);
    if (fit.summary) write_summary_csv((dir / "summary.csv").string(), *fit.summary);
    write_path_csv((dir / "path.csv").string(), fit.path);
    if (fit.tune) write_tune_csv((dir / "tune.csv").string(), *fit.tune);
    const BicChoice bic = select_bic(fit.path, d, max_size);
    const Vector coef = d.to_original_scale(ols_refit(d, bic.support));
    std::ofstream s(dir / "selected.csv");
    s << "index,name,coefficient\n";
    for (Index j : bic.support)
        s << (j + 1) << ',' << d.x_names()[static_cast<std::size_t>(j)] << ',' << format_double(coef(j)) << '\n';
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << method.name() << ": " << bic.support.size() << " variable(s) selected, BIC " << bic.bic;
    if (std::isfinite(fit.hyper)) std::cout << ", hyperparameter " << fit.hyper;
    std::cout << '\n';
    return 0;
}

struct PathOrdering {
    std::vector<Index> order;
    /// The last knot sits at lambda = 0.
    bool complete = false;
};

PathOrdering read_ordering(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read path file " + path);
    std::string line;
    std::getline(in, line);
    PathOrdering out;
    std::set<Index> seen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string step, lambda, events;
        std::getline(ls, step, ',');
        std::getline(ls, lambda, ',');
        std::getline(ls, events, ',');
        out.complete = std::stod(lambda) == 0.0;
        std::istringstream es(events);
        std::string e;
        while (std::getline(es, e, ';')) {
            const long v = std::stol(e);
            if (v > 0 && seen.insert(v - 1).second) out.order.push_back(v - 1);
        }
    }
    return out;
}

int cmd_evaluate(const RunConfig& cfg) {
    auto [ordering, complete] = read_ordering(require(cfg, "path"));
    std::ifstream in(require(cfg, "truth"));
    if (!in) throw InvalidArgument("cannot read truth file " + cfg.get("truth"));
    std::string line;
    std::getline(in, line);
    std::vector<Index> support;
    Index p = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("malformed truth file");
        if (std::stod(line.substr(comma + 1)) != 0.0) support.push_back(p);
        ++p;
    }
    if (complete) {
        // variables whose unpenalized optimum is zero never enter; they rank last
        std::vector<char> in_path(static_cast<std::size_t>(p), 0);
        for (Index j : ordering)
            if (j >= 0 && j < p) in_path[static_cast<std::size_t>(j)] = 1;
        for (Index j = 0; j < p; ++j)
            if (!in_path[static_cast<std::size_t>(j)]) ordering.push_back(j);
    }
    const EvalCurves c = score_ordering(ordering, support, p);
    const std::string label = cfg.is_set("method") ? cfg.get("method") : "method";
    const fs::path dir = out_dir(cfg);
    std::ofstream e(dir / "eval.csv");
    e << "method,roc_area,prc_area,partial_flag\n"
      << label << ',' << format_double(c.roc_area) << ',' << format_double(c.prc_area) << ',' << (c.partial ? 1 : 0)
      << '\n';
    std::ofstream cv(dir / "curves.csv");
    cv << "method,step,fpr,tpr,recall,precision\n";
    for (std::size_t k = 0; k < c.roc_points.size(); ++k)
        cv << label << ',' << k << ',' << format_double(c.roc_points[k][0]) << ',' << format_double(c.roc_points[k][1])
           << ',' << format_double(c.prc_points[k][0]) << ',' << format_double(c.prc_points[k][1]) << '\n';
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << label << ": ROC area " << c.roc_area << ", PRC area " << c.prc_area << (c.partial ? " (partial)" : "")
              << '\n';
    return 0;
}

void write_table(const fs::path& path, const std::vector<SummaryRow>& rows, const std::vector<std::string>& metrics) {
    std::vector<std::string> methods, columns;
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> cell;
    for (const auto& r : rows) {
        if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) continue;
        const std::string col = r.metric + "_p" + std::to_string(r.p) + "_rho" + format_double(r.rho);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
        cell[{r.method, col}] = {r.mean, r.se};
    }
    std::ofstream out(path);
    out << "method";
    for (const auto& c : columns) out << ',' << c << ',' << c << "_se";
    out << '\n';
    for (const auto& m : methods) {
        out << m;
        for (const auto& c : columns) {
            const auto it = cell.find({m, c});
            if (it == cell.end()) out << ",,";
            else out << ',' << format_double(it->second.first) << ',' << format_double(it->second.second);
        }
        out << '\n';
    }
}

int cmd_reproduce(const RunConfig& cfg) {
    const std::string table = cfg.get("table");
    ExperimentConfig ex;
    ex.n = cfg.get_index("n");
    ex.reps = cfg.get_index("reps");
    ex.seed = cfg.get_u64("seed");
    ex.jobs = static_cast<int>(cfg.get_index("jobs"));
    ex.options = options_of(cfg);
    ex.rhos = cfg.get_doubles("rhos");
    ex.ps.clear();
    for (double v : cfg.get_doubles("p")) ex.ps.push_back(static_cast<Index>(v));
    if (ex.ps.empty()) {
        if (table == "t2") ex.ps = {500};
        else if (table == "t3") ex.ps = {1000};
        else ex.ps = {50};
    }
    ex.log = [](const std::string& s) { std::cerr << s << '\n'; };
    const fs::path dir = out_dir(cfg);
    std::vector<std::string> failures;

    if (table == "t5") {
        const auto rows = run_gamma_experiment(ex, &failures);
        write_gamma_csv((dir / "table.csv").string(), rows);
    } else {
        if (ex.ps.size() != 1 && table != "t4") throw InvalidArgument("t1..t3 take a single p");
        for (Index p : ex.ps) {
            ExperimentConfig one = ex;
            one.ps = {p};
            const auto names = cfg.get_strings("methods");
            if (names.empty()) {
                one.methods = table_methods(table, ex.n, p);
            } else {
                const auto defaults = table_methods(table, ex.n, p);
                for (const auto& name : names) {
                    bool found = false;
                    for (const auto& m : defaults)
                        if (m.name() == name || method_name(m.kind) == name) {
                            one.methods.push_back(m);
                            found = true;
                        }
                    if (!found) one.methods.push_back({parse_method(name), 0.0, ""});
                }
            }
            const auto results = run_selection_experiment(one);
            const std::string suffix = ex.ps.size() > 1 ? "_p" + std::to_string(p) : "";
            write_results_csv((dir / ("results" + suffix + ".csv")).string(), results);
            write_curves_csv((dir / ("curves" + suffix + ".csv")).string(), results);
            const auto summary = summarize_results(results);
            write_summary_table_csv((dir / ("summary" + suffix + ".csv")).string(), summary);
            write_table(dir / ("table" + suffix + ".csv"), summary,
                        table == "t4" ? std::vector<std::string>{"squared_error"}
                                      : std::vector<std::string>{"roc_area", "prc_area"});
            for (const auto& r : results)
                if (!r.ok())
                    failures.push_back(r.method + "\tp=" + std::to_string(r.p) + "\trho=" + format_double(r.rho) +
                                       "\treplicate=" + std::to_string(r.replicate) + "\t" + r.error);
        }
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    if (!failures.empty()) {
        std::cerr << failures.size() << " replicate(s) failed:\n";
        for (const auto& f : failures) std::cerr << "  " << f << '\n';
        return 1;
    }
    std::cout << "wrote " << table << " results to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized credible-region variable selection with global-local shrinkage priors"};
    app.require_subcommand(1);
    std::map<std::string, CommonFlags> flags;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "write simulated datasets and their true coefficients"},
        {"tune", "choose a prior hyperparameter by matching the induced R^2 distribution"},
        {"fit-select", "run a Gibbs sampler, solve the selection path and pick a model by BIC"},
        {"evaluate", "score a selection path against the true support"},
        {"reproduce", "run one of the simulation tables (t1..t5)"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags[name]);
    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const RunConfig cfg = resolve(name, flags[name]);
        if (name == "simulate") return cmd_simulate(cfg);
        if (name == "tune") return cmd_tune(cfg);
        if (name == "fit-select") return cmd_fit_select(cfg);
        if (name == "evaluate") return cmd_evaluate(cfg);
        return cmd_reproduce(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
