#include "pcr/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#ifndef PCR_VERSION
#define PCR_VERSION "0.0.0"
#endif

namespace pcr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<ConfigKey> with_common(std::vector<ConfigKey> keys) {
    keys.push_back({"seed", "1", "root random seed"});
    keys.push_back({"jobs", "1", "worker threads"});
    keys.push_back({"out", ".", "output directory"});
    return keys;
}

std::vector<ConfigKey> mcmc_keys() {
    return {{"n_iter", "15000", "MCMC iterations"},
            {"n_burn", "5000", "burn-in iterations"},
            {"thin", "1", "thinning interval"},
            {"sweep_order", "blocked", "DL update order: blocked or listed"}};
}

std::vector<ConfigKey> tune_keys() {
    return {{"target_a", "1", "Beta target shape a"},
            {"target_b", "1", "Beta target shape b"},
            {"n_draws", "2000", "prior draws per grid point"},
            {"grid_points", "50", "points in the default grid"}};
}

std::vector<ConfigKey> concat(std::vector<ConfigKey> a, const std::vector<ConfigKey>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

const std::vector<ConfigKey>& command_schema(const std::string& command) {
    static const std::map<std::string, std::vector<ConfigKey>> schemas = {
        {"simulate", with_common({{"n", "60", "sample size"},
                                  {"p", "50", "predictors"},
                                  {"rho", "0.5", "AR correlation"},
                                  {"sigma2", "1", "noise variance"},
                                  {"reps", "1", "datasets to write"}})},
        {"tune", with_common(concat({{"data", "", "dataset CSV"},
                                     {"response", "y", "response column"},
                                     {"family", "normal", "normal, laplace or dl"},
                                     {"grid", "", "comma-separated grid (default: log grid)"}},
                                    tune_keys()))},
        {"fit-select", with_common(concat(concat({{"data", "", "dataset CSV"},
                                                  {"response", "y", "response column"},
                                                  {"method", "dl_tune", "method name"},
                                                  {"value", "", "hyperparameter for *_fixed methods"},
                                                  {"max_size", "", "BIC models have fewer predictors than this (default: min(30, n - 1))"},
                                                  {"max_steps", "0", "path step budget (0: 8 min(n, p))"}},
                                                 mcmc_keys()),
                                          tune_keys()))},
        {"evaluate", with_common({{"path", "", "path CSV from fit-select"},
                                  {"truth", "", "truth CSV from simulate"},
                                  {"method", "", "label written to the output"}})},
        {"reproduce", with_common(concat(concat({{"table", "t1", "t1, t2, t3, t4 or t5"},
                                                 {"reps", "20", "replicates"},
                                                 {"n", "60", "sample size"},
                                                 {"p", "", "comma-separated p values (default per table)"},
                                                 {"rhos", "0.5,0.9", "comma-separated rho values"},
                                                 {"methods", "", "comma-separated methods (default per table)"}},
                                                mcmc_keys()),
                                         tune_keys()))},
    };
    const auto it = schemas.find(command);
    if (it == schemas.end()) throw InvalidArgument("unknown command '" + command + "'");
    return it->second;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)) {
    for (const auto& k : command_schema(command_)) values_[k.name] = k.default_value;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    parse(ss.str(), path);
}

void RunConfig::parse(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": expected key=value");
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw InvalidArgument("unknown key '" + key + "' for command " + command_);
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("unknown key '" + key + "'");
    return it->second;
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& s) {
    T v{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("key '" + key + "': not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

}  // namespace

double RunConfig::get_double(const std::string& key) const { return parse_number<double>(key, get(key)); }

Index RunConfig::get_index(const std::string& key) const { return parse_number<long long>(key, get(key)); }

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    return parse_number<unsigned long long>(key, get(key));
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split_commas(get(key))) out.push_back(parse_number<double>(key, s));
    return out;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key) const { return split_commas(get(key)); }

void RunConfig::write_manifest(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "command=" << command_ << '\n' << "version=" << version_string() << '\n';
    for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
    if (!out) throw Error("write failed: " + path);
}

std::string version_string() { return PCR_VERSION; }

}  // namespace pcr
