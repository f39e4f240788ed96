#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cvdiff/grid_cv.hpp"

namespace cvdiff {

/// Experiment description. Read from a flat "key = value" file ('#' starts a
/// comment, lists are comma separated); every key can also be overridden from
/// the command line with --key value.
struct ExperimentConfig {
    std::string dynamics = "langevin-1d";  // langevin-1d | langevin-2d | gle
    std::string potential = "cosine";      // zero | cosine | pendulum | quadratic (2D: cosine part)
    double k = 1.0;
    std::vector<double> deltas{0.0};
    double beta = 1.0;
    std::vector<double> gammas{1.0};
    double nu = 1.0;
    double dt = 0.01;
    std::string t_rule = "100/gamma";  // fixed | 100/gamma
    double t_multiplier = 100.0;       // T = t_multiplier / gamma under "100/gamma"
    double t_final = 100.0;            // T under "fixed"
    long long J = 1000;
    std::vector<double> snapshots;  // explicit times; empty: snapshot_count even times
    int snapshot_count = 20;
    std::string cv_source = "none";  // none | galerkin | underdamped | file | tensorized | linear
    std::string cv_base = "underdamped";  // 1D source tensorized in 2D: galerkin | underdamped | file
    std::string cv_file;
    double cv_coefficient = 0.0;  // "linear": psi = c p (0: c = 1/gamma)
    std::string solver_preset = "desk";  // desk | reference
    int spectral_n = 0;                  // 0: preset
    double sigma = 0.0;                  // 0: preset
    std::string solver = "direct";       // direct | krylov
    int grid_nq = 128;
    int grid_np = 192;
    double grid_lp = 0.0;  // 0: 9 / sqrt(beta)
    std::vector<int> directions{1};  // 1 and/or 2
    std::uint64_t master_seed = 1;
    std::string output_dir = "cvdiff-out";
    bool bit_exact = true;
    int workers = 0;
    long long max_steps = 100000000;

    /// Sets one key from its text value; throws std::invalid_argument on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Text value of one key, in the form set() accepts.
    std::string get(const std::string& key) const;
    /// Checks ranges and combinations; throws std::invalid_argument.
    void validate() const;

    /// Every key in a fixed order.
    static const std::vector<std::string>& keys();
    /// "key = value" lines for all keys (embedded in every output file).
    std::vector<std::string> to_lines() const;

    GridSpec grid_spec() const;
    /// T for one friction value under the configured rule.
    double final_time(double gamma) const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies "key = value" lines on top of `config`.
void apply_config_text(ExperimentConfig& config, const std::string& text);

}  // namespace cvdiff
