#include "flagwave/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "flagwave/maximal.hpp"

namespace flagwave {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

// Throws plain strings; the caller attaches source and line.
long long to_int(const std::string& v) {
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw std::string("expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw std::string("expected a non-negative integer, got '" + v + "'");
    return x;
}

double to_double(const std::string& v) {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
        throw std::string("expected a finite number, got '" + v + "'");
    return x;
}

int to_small_int(const std::string& v) {
    const long long x = to_int(v);
    if (x < -1000000 || x > 1000000) throw std::string("integer out of range: " + v);
    return static_cast<int>(x);
}

std::vector<int> to_int_list(const std::string& v, std::size_t expected = 0) {
    std::vector<int> out;
    for (const std::string& s : split_list(v)) out.push_back(to_small_int(s));
    if (expected != 0 && out.size() != expected)
        throw std::string("expected " + std::to_string(expected) + " comma-separated integers, got '" + v + "'");
    if (out.empty()) throw std::string("empty list");
    return out;
}

// "Lz, Lt, Pz, Pt"; n comes from [general].
GridSpec to_grid(const std::string& v) {
    const std::vector<std::string> parts = split_list(v);
    if (parts.size() != 4)
        throw std::string("grid expects 'half_width_z, half_width_t, points_z, points_t', got '" + v + "'");
    GridSpec g;
    g.half_width_z = to_double(parts[0]);
    g.half_width_t = to_double(parts[1]);
    g.points_z = to_small_int(parts[2]);
    g.points_t = to_small_int(parts[3]);
    return g;
}

ScaleWindow to_window(const std::string& v) {
    const std::vector<int> w = to_int_list(v, 4);
    return ScaleWindow{w[0], w[1], w[2], w[3]};
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_grid(const GridSpec& g) {
    return fmt(g.half_width_z) + ", " + fmt(g.half_width_t) + ", " + std::to_string(g.points_z) + ", " +
           std::to_string(g.points_t);
}

std::string fmt_window(const ScaleWindow& w) {
    return std::to_string(w.j_min) + ", " + std::to_string(w.j_max) + ", " + std::to_string(w.k_min) + ", " +
           std::to_string(w.k_max);
}

std::string fmt_list(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
}

struct Key {
    const char* section;
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define FW_KEY(sec, key, field, parse, format)                                                  \
    Key {                                                                                       \
        sec, key, [](ExperimentConfig& c, const std::string& v) { c.field = parse(v); },        \
            [](const ExperimentConfig& c) { return format(c.field); }                           \
    }

std::string fmt_int(long long x) { return std::to_string(x); }
std::string fmt_path(const std::filesystem::path& p) { return p.string(); }
std::filesystem::path to_path(const std::string& v) {
    if (v.empty()) throw std::string("empty path");
    return std::filesystem::path(v);
}
KernelProfile to_profile(const std::string& v) {
    try {
        return parse_profile(v);
    } catch (const Error& e) {
        throw std::string(e.what());
    }
}

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        FW_KEY("general", "n", n, to_small_int, fmt_int),
        FW_KEY("general", "seed", seed, to_u64, fmt_int),
        FW_KEY("general", "p", p, to_double, fmt),
        FW_KEY("general", "r", r, to_double, fmt),
        FW_KEY("general", "calibration", calibration, to_path, fmt_path),
        FW_KEY("general", "out", out, to_path, fmt_path),
        FW_KEY("wavelet", "M", wavelet.M, to_small_int, fmt_int),
        FW_KEY("wavelet", "r0", wavelet.r0, to_double, fmt),
        FW_KEY("wavelet", "M2", M2, to_small_int, fmt_int),
        FW_KEY("kernel", "profile", profile, to_profile, profile_name),
        FW_KEY("kernel", "eps_in", eps_in, to_double, fmt),
        FW_KEY("kernel", "R_out", R_out, to_double, fmt),
        FW_KEY("kernel", "scale", kernel_scale, to_double, fmt),
        FW_KEY("moments", "grid", moments.grid, to_grid, fmt_grid),
        FW_KEY("moments", "eta_points", moments.eta_points, to_small_int, fmt_int),
        FW_KEY("convolution", "grid", convolution.grid, to_grid, fmt_grid),
        FW_KEY("reproduce", "grid", reproduce.grid, to_grid, fmt_grid),
        FW_KEY("reproduce", "window", reproduce.window, to_window, fmt_window),
        FW_KEY("reproduce", "N", reproduce.N, to_int_list, fmt_list),
        FW_KEY("reproduce", "fields", reproduce.fields, to_small_int, fmt_int),
        FW_KEY("reproduce", "field_scale", reproduce.field_scale, to_double, fmt),
        FW_KEY("reproduce", "filter_power", reproduce.filter_power, to_small_int, fmt_int),
        FW_KEY("reproduce", "atom_j", reproduce.atom_j, to_small_int, fmt_int),
        FW_KEY("reproduce", "atom_k", reproduce.atom_k, to_small_int, fmt_int),
        FW_KEY("ortho", "grid", ortho.grid, to_grid, fmt_grid),
        FW_KEY("ortho", "epsilon", ortho.epsilon, to_double, fmt),
        FW_KEY("ortho", "j_min", ortho.j_min, to_small_int, fmt_int),
        FW_KEY("ortho", "j_max", ortho.j_max, to_small_int, fmt_int),
        FW_KEY("ortho", "control_gap_max", ortho.control_gap_max, to_small_int, fmt_int),
        FW_KEY("ortho", "boundary_layer", ortho.boundary_layer, to_small_int, fmt_int),
        FW_KEY("flag-ortho", "grid", flag_ortho.grid, to_grid, fmt_grid),
        FW_KEY("flag-ortho", "epsilon", flag_ortho.epsilon, to_double, fmt),
        FW_KEY("maximal", "grid", maximal.grid, to_grid, fmt_grid),
        FW_KEY("maximal", "families", maximal.families, to_small_int, fmt_int),
        FW_KEY("maximal", "family_size", maximal.family_size, to_small_int, fmt_int),
        FW_KEY("bound", "grid", bound.grid, to_grid, fmt_grid),
        FW_KEY("bound", "window", bound.window, to_window, fmt_window),
    };
    return k;
}

#undef FW_KEY

void set_dimension(ExperimentConfig& c) {
    for (GridSpec* g : {&c.moments.grid, &c.convolution.grid, &c.reproduce.grid, &c.ortho.grid, &c.flag_ortho.grid,
                        &c.maximal.grid, &c.bound.grid})
        g->n = c.n;
    c.wavelet.n = c.n;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    cfg.source = source;
    std::set<std::string> sections;
    for (const Key& k : keys()) sections.insert(k.section);

    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        // Comments run from '#' or ';' to the end of the line.
        const auto c = s.find_first_of("#;");
        if (c != std::string::npos) s.erase(c);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source, line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (!sections.count(section)) {
                std::string known;
                for (const std::string& x : sections) known += (known.empty() ? "" : ", ") + x;
                throw ConfigError(source, line, "unknown section [" + section + "]; known: " + known);
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (section.empty()) throw ConfigError(source, line, "key '" + key + "' outside of any section");
        if (value.empty()) throw ConfigError(source, line, "empty value for '" + key + "'");
        const Key* match = nullptr;
        for (const Key& k : keys())
            if (section == k.section && key == k.name) match = &k;
        if (!match) throw ConfigError(source, line, "unknown key '" + key + "' in section [" + section + "]");
        const std::string full = section + "." + key;
        if (cfg.lines.count(full))
            throw ConfigError(source, line,
                              "duplicate key '" + key + "' (first set on line " + std::to_string(cfg.lines[full]) + ")");
        try {
            match->set(cfg, value);
        } catch (const std::string& msg) {
            throw ConfigError(source, line, key + ": " + msg);
        }
        cfg.lines[full] = line;
    }
    set_dimension(cfg);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), 0, "cannot open configuration file");
    std::stringstream ss;
    ss << f.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str(), path.string());
    cfg.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return cfg;
}

void ExperimentConfig::validate() const {
    const auto at = [&](const std::string& key) {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    };
    // Runs a library validator and re-labels its error with the key's line.
    const auto check = [&](const std::string& key, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(source, at(key), key + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source, at(key), key + ": " + e.what());
        }
    };
    const auto require = [&](const std::string& key, bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(source, at(key), key + ": " + msg);
    };

    require("general.n", n >= 1 && n <= 3, "n must be 1, 2 or 3");
    check("general.p", [&] { check_hp_exponent(n, p); });
    check("general.r", [&] { check_fs_exponent(n, r, p); });
    check("wavelet.M", [&] { wavelet.validate(); });
    require("wavelet.M2", M2 >= 1, "M2 must be >= 1");
    require("kernel.profile", profile != KernelProfile::custom, "custom kernels need sample data and cannot be configured");
    require("kernel.eps_in", eps_in > 0.0, "eps_in must be positive");
    require("kernel.R_out", R_out > eps_in, "R_out must exceed eps_in");

    check("moments.grid", [&] { moments.grid.validate(); });
    require("moments.eta_points", moments.eta_points >= 2, "eta_points must be >= 2");
    check("convolution.grid", [&] { convolution.grid.validate(); });

    check("reproduce.grid", [&] { reproduce.grid.validate(); });
    check("reproduce.window", [&] { reproduce.window.validate(); });
    require("reproduce.N", !reproduce.N.empty() && reproduce.N.front() >= 0, "N values must be >= 0");
    for (std::size_t i = 1; i < reproduce.N.size(); ++i)
        require("reproduce.N", reproduce.N[i] > reproduce.N[i - 1], "N values must be strictly increasing");
    require("reproduce.fields", reproduce.fields >= 1, "fields must be >= 1");
    require("reproduce.field_scale", reproduce.field_scale > 0.0, "field_scale must be positive");
    require("reproduce.filter_power", reproduce.filter_power >= 0, "filter_power must be >= 0");
    const ScaleWindow& w = reproduce.window;
    require("reproduce.atom_j", reproduce.atom_j >= w.j_min && reproduce.atom_j <= w.j_max,
            "atom scale j outside the window");
    require("reproduce.atom_k", reproduce.atom_k >= w.k_min && reproduce.atom_k <= w.k_max,
            "atom scale k outside the window");

    check("ortho.grid", [&] { ortho.grid.validate(); });
    require("ortho.epsilon", ortho.epsilon > 0.0 && ortho.epsilon < 1.0, "epsilon must lie in (0, 1)");
    // The slope fit needs four distinct gaps in both scans.
    require("ortho.j_max", ortho.j_max - ortho.j_min >= 3, "need j_max - j_min >= 3 for the slope fit");
    require("ortho.control_gap_max", ortho.control_gap_max >= 3, "control_gap_max must be >= 3");
    require("ortho.boundary_layer", ortho.boundary_layer >= 0, "boundary_layer must be >= 0");
    check("flag-ortho.grid", [&] { flag_ortho.grid.validate(); });
    require("flag-ortho.epsilon", flag_ortho.epsilon > 0.0 && flag_ortho.epsilon < 1.0, "epsilon must lie in (0, 1)");

    check("maximal.grid", [&] { maximal.grid.validate(); });
    require("maximal.families", maximal.families >= 1, "families must be >= 1");
    require("maximal.family_size", maximal.family_size >= 1, "family_size must be >= 1");

    check("bound.grid", [&] { bound.grid.validate(); });
    check("bound.window", [&] { bound.window.validate(); });
}

std::filesystem::path ExperimentConfig::calibration_path() const {
    return calibration.is_absolute() ? calibration : base_dir / calibration;
}

ExperimentConfig ExperimentConfig::with_grid_scale(int scale) const {
    if (scale != 1 && scale != 2) throw ConfigError(source, 0, "grid scale must be 1 or 2");
    ExperimentConfig c = *this;
    if (scale == 2)
        for (GridSpec* g : {&c.moments.grid, &c.convolution.grid, &c.reproduce.grid, &c.ortho.grid,
                            &c.flag_ortho.grid, &c.maximal.grid, &c.bound.grid})
            *g = g->refined();
    return c;
}

std::string ExperimentConfig::dump() const {
    std::string out, section;
    for (const Key& k : keys()) {
        if (std::string(k.name) == "out" && this->out.empty()) continue;
        if (section != k.section) {
            section = k.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(k.name) + " = " + k.get(*this) + "\n";
    }
    return out;
}

}  // namespace flagwave
