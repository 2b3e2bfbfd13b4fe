#include "uavsearch/config.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uavsearch/errors.hpp"

namespace uvs {

namespace {

struct Cursor {
    const std::string& text;
    size_t pos = 0;
    int line = 1;
    const std::string& origin;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
    }
};

void skip_ws(Cursor& c, bool skip_newlines) {
    while (c.pos < c.text.size()) {
        const char ch = c.text[c.pos];
        if (ch == '#') {
            while (c.pos < c.text.size() && c.text[c.pos] != '\n') ++c.pos;
        } else if (ch == '\n') {
            if (!skip_newlines) return;
            ++c.line;
            ++c.pos;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            ++c.pos;
        } else {
            return;
        }
    }
}

std::string parse_key(Cursor& c) {
    const size_t start = c.pos;
    while (c.pos < c.text.size()) {
        const char ch = c.text[c.pos];
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')
            ++c.pos;
        else
            break;
    }
    if (c.pos == start) c.fail("expected a key");
    return c.text.substr(start, c.pos - start);
}

TomlValue parse_value(Cursor& c);

TomlValue parse_array(Cursor& c) {
    TomlValue v;
    v.line = c.line;
    std::vector<TomlValue> items;
    ++c.pos;  // '['
    skip_ws(c, true);
    while (c.pos < c.text.size() && c.text[c.pos] != ']') {
        items.push_back(parse_value(c));
        skip_ws(c, true);
        if (c.pos < c.text.size() && c.text[c.pos] == ',') {
            ++c.pos;
            skip_ws(c, true);
        }
    }
    if (c.pos >= c.text.size()) c.fail("unterminated array");
    ++c.pos;  // ']'
    v.data = std::move(items);
    return v;
}

TomlValue parse_value(Cursor& c) {
    skip_ws(c, false);
    if (c.pos >= c.text.size()) c.fail("expected a value");
    TomlValue v;
    v.line = c.line;
    const char ch = c.text[c.pos];
    if (ch == '"') {
        ++c.pos;
        std::string s;
        while (c.pos < c.text.size() && c.text[c.pos] != '"') {
            if (c.text[c.pos] == '\n') c.fail("unterminated string");
            if (c.text[c.pos] == '\\' && c.pos + 1 < c.text.size()) {
                ++c.pos;
                const char esc = c.text[c.pos];
                s += esc == 'n' ? '\n' : esc == 't' ? '\t' : esc;
            } else {
                s += c.text[c.pos];
            }
            ++c.pos;
        }
        if (c.pos >= c.text.size()) c.fail("unterminated string");
        ++c.pos;
        v.data = std::move(s);
        return v;
    }
    if (ch == '[') return parse_array(c);
    // bare token: number or boolean
    const size_t start = c.pos;
    while (c.pos < c.text.size() && !std::isspace(static_cast<unsigned char>(c.text[c.pos])) &&
           c.text[c.pos] != ',' && c.text[c.pos] != ']' && c.text[c.pos] != '#')
        ++c.pos;
    const std::string token = c.text.substr(start, c.pos - start);
    if (token == "true") {
        v.data = true;
    } else if (token == "false") {
        v.data = false;
    } else {
        try {
            size_t used = 0;
            const double d = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            v.data = d;
        } catch (...) {
            c.fail("cannot parse value '" + token + "'");
        }
    }
    return v;
}

TomlTable* navigate(TomlTable& root, const std::vector<std::string>& path, bool array_header,
                    Cursor& c) {
    TomlTable* t = &root;
    for (size_t i = 0; i < path.size(); ++i) {
        const bool last = i + 1 == path.size();
        if (last && array_header) {
            auto& arr = t->table_arrays[path[i]];
            arr.emplace_back();
            return &arr.back();
        }
        if (!last && t->table_arrays.count(path[i])) {
            auto& arr = t->table_arrays[path[i]];
            if (arr.empty()) c.fail("empty table array '" + path[i] + "'");
            t = &arr.back();
        } else {
            t = &t->tables[path[i]];
        }
    }
    return t;
}

}  // namespace

TomlTable parse_toml(const std::string& text, const std::string& origin) {
    TomlTable root;
    Cursor c{text, 0, 1, origin};
    TomlTable* current = &root;

    while (true) {
        skip_ws(c, true);
        if (c.pos >= c.text.size()) break;
        if (c.text[c.pos] == '[') {
            const bool array_header = c.pos + 1 < c.text.size() && c.text[c.pos + 1] == '[';
            c.pos += array_header ? 2 : 1;
            std::vector<std::string> path;
            while (true) {
                skip_ws(c, false);
                path.push_back(parse_key(c));
                skip_ws(c, false);
                if (c.pos < c.text.size() && c.text[c.pos] == '.') {
                    ++c.pos;
                    continue;
                }
                break;
            }
            if (c.pos >= c.text.size() || c.text[c.pos] != ']') c.fail("expected ']'");
            ++c.pos;
            if (array_header) {
                if (c.pos >= c.text.size() || c.text[c.pos] != ']')
                    c.fail("expected ']]' closing table-array header");
                ++c.pos;
            }
            current = navigate(root, path, array_header, c);
        } else {
            const std::string key = parse_key(c);
            skip_ws(c, false);
            if (c.pos >= c.text.size() || c.text[c.pos] != '=')
                c.fail("expected '=' after key '" + key + "'");
            ++c.pos;
            TomlValue value = parse_value(c);
            if (current->values.count(key)) c.fail("duplicate key '" + key + "'");
            current->values.emplace(key, std::move(value));
        }
    }
    return root;
}

TomlTable parse_toml_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_toml(ss.str(), path);
}

namespace {

[[noreturn]] void missing(const std::string& where, const std::string& key) {
    throw ConfigError(where + ": missing required key '" + key + "'");
}

double get_number(const TomlTable& t, const std::string& where, const std::string& key) {
    auto it = t.values.find(key);
    if (it == t.values.end()) missing(where, key);
    if (const double* d = std::get_if<double>(&it->second.data)) return *d;
    throw ConfigError(where + ": key '" + key + "' must be a number");
}

double get_number_or(const TomlTable& t, const std::string& where, const std::string& key,
                     double fallback) {
    return t.has(key) ? get_number(t, where, key) : fallback;
}

std::string get_string(const TomlTable& t, const std::string& where, const std::string& key) {
    auto it = t.values.find(key);
    if (it == t.values.end()) missing(where, key);
    if (const std::string* s = std::get_if<std::string>(&it->second.data)) return *s;
    throw ConfigError(where + ": key '" + key + "' must be a string");
}

bool get_bool_or(const TomlTable& t, const std::string& where, const std::string& key,
                 bool fallback) {
    auto it = t.values.find(key);
    if (it == t.values.end()) return fallback;
    if (const bool* b = std::get_if<bool>(&it->second.data)) return *b;
    throw ConfigError(where + ": key '" + key + "' must be a boolean");
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

UAVSpec parse_uav_spec(const TomlTable& t, const std::string& where) {
    UAVSpec spec;
    spec.name = get_string(t, where, "name");
    const std::string type = get_string(t, where, "type");
    if (type == "multi-rotor")
        spec.type = UAVType::MultiRotor;
    else if (type == "fixed-wing")
        spec.type = UAVType::FixedWing;
    else
        throw ConfigError(where + ": type must be 'multi-rotor' or 'fixed-wing'");

    spec.r_min = get_number(t, where, "r_min");
    spec.delta = get_number(t, where, "delta");
    spec.h_min = get_number(t, where, "h_min");
    spec.h_goal = get_number(t, where, "h_goal");
    spec.v_s_max = get_number(t, where, "v_s_max");
    spec.v_s_min = get_number(t, where, "v_s_min");
    spec.v_z_max = get_number(t, where, "v_z_max");
    spec.v_z_min = get_number(t, where, "v_z_min");
    spec.a_s_max = get_number(t, where, "a_s_max");
    spec.a_s_min = get_number(t, where, "a_s_min");
    spec.a_z_max = get_number(t, where, "a_z_max");
    spec.a_z_min = get_number(t, where, "a_z_min");
    spec.phi_min = deg_to_rad(get_number(t, where, "phi_min_deg"));
    spec.phi_max = deg_to_rad(get_number(t, where, "phi_max_deg"));
    // The only defaulted key: technical yaw-rate limit per airframe class.
    spec.omega_lim = get_number_or(t, where, "omega_lim",
                                   spec.type == UAVType::MultiRotor ? 1.0 : 0.3);
    spec.sensor.gamma1 = deg_to_rad(get_number(t, where, "gamma1_deg"));
    spec.sensor.gamma2 = deg_to_rad(get_number(t, where, "gamma2_deg"));
    spec.sensor.gamma.k = get_number(t, where, "sensing_k");
    spec.sensor.gamma.b = get_number(t, where, "sensing_b");
    spec.sensor.gamma.s = get_number(t, where, "sensing_s");
    spec.sensor.gamma.q = get_number(t, where, "sensing_q");
    spec.n_pts = static_cast<int>(std::round(get_number(t, where, "n_pts")));
    return spec;
}

}  // namespace

ScenarioConfig scenario_from_toml(const TomlTable& doc, const std::string& base_dir) {
    ScenarioConfig cfg;

    auto domain_it = doc.tables.find("domain");
    if (domain_it == doc.tables.end()) throw ConfigError("missing [domain] table");
    const TomlTable& domain = domain_it->second;
    cfg.mesh_path = resolve_path(base_dir, get_string(domain, "[domain]", "mesh"));
    if (domain.has("dem")) cfg.dem_path = resolve_path(base_dir, get_string(domain, "[domain]", "dem"));

    auto hedac_it = doc.tables.find("hedac");
    if (hedac_it == doc.tables.end()) throw ConfigError("missing [hedac] table");
    cfg.hedac.alpha = get_number(hedac_it->second, "[hedac]", "alpha");
    cfg.hedac.beta = get_number(hedac_it->second, "[hedac]", "beta");

    auto sim_it = doc.tables.find("sim");
    if (sim_it == doc.tables.end()) throw ConfigError("missing [sim] table");
    const TomlTable& sim = sim_it->second;
    cfg.dt = get_number(sim, "[sim]", "dt");
    cfg.duration = get_number(sim, "[sim]", "duration");
    cfg.snapshot_stride = static_cast<int>(get_number_or(sim, "[sim]", "snapshot_stride", 0.0));
    cfg.seed = static_cast<unsigned>(get_number_or(sim, "[sim]", "seed", 0.0));
    cfg.override_incline = get_bool_or(sim, "[sim]", "override_incline", false);

    auto m0_it = doc.tables.find("m0");
    if (m0_it == doc.tables.end()) throw ConfigError("missing [m0] table");
    const TomlTable& m0 = m0_it->second;
    const std::string kind = get_string(m0, "[m0]", "kind");
    if (kind == "uniform") {
        cfg.m0 = UniformDistribution{};
    } else if (kind == "gaussians") {
        GaussianMixture mix;
        auto arr_it = m0.table_arrays.find("gaussian");
        if (arr_it == m0.table_arrays.end() || arr_it->second.empty())
            throw ConfigError("[m0] kind 'gaussians' needs at least one [[m0.gaussian]] entry");
        for (const auto& g : arr_it->second) {
            GaussianBlob blob;
            blob.center.x = get_number(g, "[[m0.gaussian]]", "x");
            blob.center.y = get_number(g, "[[m0.gaussian]]", "y");
            blob.sigma = get_number(g, "[[m0.gaussian]]", "sigma");
            blob.weight = get_number_or(g, "[[m0.gaussian]]", "weight", 1.0);
            mix.blobs.push_back(blob);
        }
        cfg.m0 = std::move(mix);
    } else if (kind == "file") {
        cfg.m0 = NodalFile{resolve_path(base_dir, get_string(m0, "[m0]", "path"))};
    } else {
        throw ConfigError("[m0] kind must be 'uniform', 'gaussians' or 'file'");
    }

    auto uav_it = doc.table_arrays.find("uav");
    if (uav_it == doc.table_arrays.end() || uav_it->second.empty())
        throw ConfigError("config needs at least one [[uav]] entry");
    int index = 0;
    for (const auto& t : uav_it->second) {
        const std::string where = "[[uav]] #" + std::to_string(index++);
        FleetEntry entry;
        entry.spec = parse_uav_spec(t, where);
        entry.initial.position.x = get_number(t, where, "x");
        entry.initial.position.y = get_number(t, where, "y");
        entry.initial.theta = deg_to_rad(get_number(t, where, "theta_deg"));
        entry.initial.rho = get_number(t, where, "rho");
        entry.initial.phi = deg_to_rad(get_number(t, where, "phi_deg"));
        if (t.has("z") == t.has("h0"))
            throw ConfigError(where + ": give exactly one of 'z' (absolute) or 'h0' (above ground)");
        if (t.has("z")) {
            entry.initial.z = get_number(t, where, "z");
        } else {
            entry.initial.z = get_number(t, where, "h0");
            entry.initial_z_relative = true;
        }
        cfg.fleet.push_back(std::move(entry));
    }
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    const TomlTable doc = parse_toml_file(path);
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return scenario_from_toml(doc, dir.empty() ? "." : dir);
}

}  // namespace uvs
