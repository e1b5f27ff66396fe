#pragma once

#include "pcr/core.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pcr {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Keys accepted by a CLI command (simulate, tune, fit-select, evaluate,
/// reproduce), including the common seed, jobs and out.
const std::vector<ConfigKey>& command_schema(const std::string& command);

/**
 * Flat key=value configuration checked against a command schema.
 *
 * Lines are `key = value`; text after '#' is a comment. Later assignments
 * override earlier ones, so flags applied after load_file() win.
 */
class RunConfig {
public:
    explicit RunConfig(std::string command);

    const std::string& command() const { return command_; }

    void load_file(const std::string& path);
    void parse(const std::string& text, const std::string& origin = "<string>");
    /// Throws InvalidArgument for keys outside the schema.
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    bool is_set(const std::string& key) const { return !get(key).empty(); }
    double get_double(const std::string& key) const;
    Index get_index(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    /// command, version, then every resolved key in sorted order.
    void write_manifest(const std::string& path) const;

private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

/// Version string recorded in manifests.
std::string version_string();

}  // namespace pcr
