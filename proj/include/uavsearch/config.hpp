#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "uavsearch/sim.hpp"

namespace uvs {

// Minimal TOML subset: [table] / [[array-of-table]] headers, key = value
// lines with strings, numbers, booleans and flat arrays, # comments.
struct TomlValue;
struct TomlTable {
    std::map<std::string, TomlValue> values;
    std::map<std::string, TomlTable> tables;
    std::map<std::string, std::vector<TomlTable>> table_arrays;

    bool has(const std::string& key) const { return values.count(key) > 0; }
};
struct TomlValue {
    std::variant<double, bool, std::string, std::vector<TomlValue>> data;
    int line = 0;
};

TomlTable parse_toml(const std::string& text, const std::string& origin);
TomlTable parse_toml_file(const std::string& path);

// Build a scenario config from a parsed document. Relative paths resolve
// against `base_dir`.
ScenarioConfig scenario_from_toml(const TomlTable& doc, const std::string& base_dir);

ScenarioConfig load_scenario_config(const std::string& path);

}  // namespace uvs
