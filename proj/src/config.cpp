#include "cvdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cvdiff/estimators.hpp"

namespace cvdiff {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    }
}

long long parse_integer(const std::string& key, const std::string& v) {
    // accepts 1e8-style values as long as they are integral
    const double x = parse_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 9e18)
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + v + "'");
    return static_cast<long long>(x);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': not a boolean: '" + v + "'");
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
    return s;
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k{
        "dynamics",      "potential",   "k",          "deltas",        "beta",          "gammas",
        "nu",            "dt",          "t_rule",     "t_multiplier",  "t_final",       "J",
        "snapshots",     "snapshot_count", "cv_source", "cv_base",     "cv_file",       "cv_coefficient",
        "solver_preset", "spectral_n",  "sigma",      "solver",        "grid_nq",       "grid_np",
        "grid_lp",       "directions",  "master_seed", "output_dir",   "bit_exact",     "workers",
        "max_steps"};
    return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "dynamics") dynamics = v;
    else if (key == "potential") potential = v;
    else if (key == "k") k = parse_double(key, v);
    else if (key == "deltas" || key == "delta") deltas = parse_doubles(key, v);
    else if (key == "beta") beta = parse_double(key, v);
    else if (key == "gammas" || key == "gamma") gammas = parse_doubles(key, v);
    else if (key == "nu") nu = parse_double(key, v);
    else if (key == "dt") dt = parse_double(key, v);
    else if (key == "t_rule") t_rule = v;
    else if (key == "t_multiplier") t_multiplier = parse_double(key, v);
    else if (key == "t_final") t_final = parse_double(key, v);
    else if (key == "J") J = parse_integer(key, v);
    else if (key == "snapshots") snapshots = parse_doubles(key, v);
    else if (key == "snapshot_count") snapshot_count = static_cast<int>(parse_integer(key, v));
    else if (key == "cv_source") cv_source = v;
    else if (key == "cv_base") cv_base = v;
    else if (key == "cv_file") cv_file = v;
    else if (key == "cv_coefficient") cv_coefficient = parse_double(key, v);
    else if (key == "solver_preset") solver_preset = v;
    else if (key == "spectral_n") spectral_n = static_cast<int>(parse_integer(key, v));
    else if (key == "sigma") sigma = parse_double(key, v);
    else if (key == "solver") solver = v;
    else if (key == "grid_nq") grid_nq = static_cast<int>(parse_integer(key, v));
    else if (key == "grid_np") grid_np = static_cast<int>(parse_integer(key, v));
    else if (key == "grid_lp") grid_lp = parse_double(key, v);
    else if (key == "directions" || key == "direction") {
        directions.clear();
        for (double d : parse_doubles(key, v)) directions.push_back(static_cast<int>(d));
    } else if (key == "master_seed") {
        try {
            master_seed = std::stoull(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key 'master_seed': not an unsigned integer: '" + v + "'");
        }
    } else if (key == "output_dir") output_dir = v;
    else if (key == "bit_exact") bit_exact = parse_bool(key, v);
    else if (key == "workers") workers = static_cast<int>(parse_integer(key, v));
    else if (key == "max_steps") max_steps = parse_integer(key, v);
    else throw std::invalid_argument("unknown config key: '" + key + "'");
}

std::string ExperimentConfig::get(const std::string& key) const {
    if (key == "dynamics") return dynamics;
    if (key == "potential") return potential;
    if (key == "k") return format_double(k);
    if (key == "deltas") return join(deltas);
    if (key == "beta") return format_double(beta);
    if (key == "gammas") return join(gammas);
    if (key == "nu") return format_double(nu);
    if (key == "dt") return format_double(dt);
    if (key == "t_rule") return t_rule;
    if (key == "t_multiplier") return format_double(t_multiplier);
    if (key == "t_final") return format_double(t_final);
    if (key == "J") return std::to_string(J);
    if (key == "snapshots") return join(snapshots);
    if (key == "snapshot_count") return std::to_string(snapshot_count);
    if (key == "cv_source") return cv_source;
    if (key == "cv_base") return cv_base;
    if (key == "cv_file") return cv_file;
    if (key == "cv_coefficient") return format_double(cv_coefficient);
    if (key == "solver_preset") return solver_preset;
    if (key == "spectral_n") return std::to_string(spectral_n);
    if (key == "sigma") return format_double(sigma);
    if (key == "solver") return solver;
    if (key == "grid_nq") return std::to_string(grid_nq);
    if (key == "grid_np") return std::to_string(grid_np);
    if (key == "grid_lp") return format_double(grid_lp);
    if (key == "directions") {
        std::string s;
        for (std::size_t i = 0; i < directions.size(); ++i) s += (i ? "," : "") + std::to_string(directions[i]);
        return s;
    }
    if (key == "master_seed") return std::to_string(master_seed);
    if (key == "output_dir") return output_dir;
    if (key == "bit_exact") return bit_exact ? "true" : "false";
    if (key == "workers") return std::to_string(workers);
    if (key == "max_steps") return std::to_string(max_steps);
    throw std::invalid_argument("unknown config key: '" + key + "'");
}

std::vector<std::string> ExperimentConfig::to_lines() const {
    std::vector<std::string> out;
    for (const auto& key : keys()) {
        // the worker count never changes results in bit-exact mode, so it stays out of outputs
        if (key == "workers" && bit_exact) continue;
        out.push_back(key + " = " + get(key));
    }
    return out;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("invalid config: " + m); };
    if (dynamics != "langevin-1d" && dynamics != "langevin-2d" && dynamics != "gle")
        fail("dynamics must be langevin-1d, langevin-2d or gle");
    if (!(beta > 0.0)) fail("beta must be > 0");
    if (!(dt > 0.0)) fail("dt must be > 0");
    if (gammas.empty()) fail("gammas must be nonempty");
    for (double g : gammas)
        if (!(g > 0.0)) fail("every gamma must be > 0");
    if (deltas.empty()) fail("deltas must be nonempty");
    if (J < 2) fail("J must be >= 2");
    if (t_rule != "fixed" && t_rule != "100/gamma") fail("t_rule must be 'fixed' or '100/gamma'");
    if (t_rule == "fixed" && !(t_final > 0.0)) fail("t_final must be > 0");
    if (t_rule == "100/gamma" && !(t_multiplier > 0.0)) fail("t_multiplier must be > 0");
    if (dynamics == "gle" && !(nu > 0.0)) fail("nu must be > 0");
    if (!(k > 0.0)) fail("k must be > 0");
    if (snapshot_count < 1) fail("snapshot_count must be >= 1");
    if (max_steps < 1) fail("max_steps must be >= 1");
    const std::vector<std::string> sources{"none", "galerkin", "underdamped", "file", "tensorized", "linear"};
    if (std::find(sources.begin(), sources.end(), cv_source) == sources.end()) fail("unknown cv_source " + cv_source);
    if (dynamics == "langevin-2d" && cv_source != "none" && cv_source != "tensorized")
        fail("2D runs accept cv_source none or tensorized");
    if (dynamics != "langevin-2d" && cv_source == "tensorized") fail("cv_source tensorized needs langevin-2d");
    if (dynamics == "gle" && cv_source != "none" && cv_source != "file" && cv_source != "linear")
        fail("GLE runs accept cv_source none, file or linear");
    if ((cv_source == "file" || (cv_source == "tensorized" && cv_base == "file")) && cv_file.empty())
        fail("cv_file is required for file control variates");
    if (cv_base != "galerkin" && cv_base != "underdamped" && cv_base != "file") fail("unknown cv_base " + cv_base);
    if (solver != "direct" && solver != "krylov") fail("solver must be direct or krylov");
    if (grid_nq < 2 || grid_np < 1 || grid_lp < 0.0) fail("bad grid dimensions");
    for (int d : directions)
        if (d != 1 && d != 2) fail("directions are 1 or 2");
    if (directions.empty()) fail("directions must be nonempty");
    if (dynamics != "langevin-2d")
        for (int d : directions)
            if (d != 1) fail("1D runs only have direction 1");
}

GridSpec ExperimentConfig::grid_spec() const {
    GridSpec s;
    s.nq = grid_nq;
    s.np = grid_np;
    s.lp = grid_lp > 0.0 ? grid_lp : 9.0 / std::sqrt(beta);
    return s;
}

double ExperimentConfig::final_time(double gamma) const {
    return t_rule == "fixed" ? t_final : t_multiplier / gamma;
}

void apply_config_text(ExperimentConfig& config, const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
        config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    ExperimentConfig config;
    apply_config_text(config, buffer.str());
    return config;
}

}  // namespace cvdiff
