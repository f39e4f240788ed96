#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvdiff/config.hpp"
#include "cvdiff/estimators.hpp"
#include "cvdiff/grid_cv.hpp"
#include "cvdiff/underdamped_cv.hpp"

namespace cvdiff {

/// Git-style content hash: SHA-1 of "blob <size>\0" followed by the bytes.
std::string git_blob_sha1(const std::string& bytes);

/// Builds (and caches within a sweep) the tabulated control variates a config asks for.
class CvFactory {
public:
    explicit CvFactory(const ExperimentConfig& config);

    /// 1D grid for `source` in {galerkin, underdamped, file} at this friction.
    std::shared_ptr<const GridCV> grid_1d(const std::string& source, double gamma);
    std::shared_ptr<const GleGridCV> gle_grid();
    /// <Psi_N, p> of the last Galerkin solve (NaN if none).
    double last_spectral_diffusion() const noexcept { return last_spectral_; }

private:
    const ExperimentConfig& config_;
    std::optional<UnderdampedProfile> profile_;
    std::shared_ptr<const GridCV> file_grid_;
    std::shared_ptr<const GleGridCV> file_gle_;
    double last_spectral_ = std::numeric_limits<double>::quiet_NaN();
};

struct CellResult {
    double gamma = 0.0;
    double delta = 0.0;
    int direction = 1;
    double T = 0.0;
    long long steps = 0;
    bool t_capped = false;
    std::string status = "ok";
    bool has_series = false;
    EstimatorSeries series;
    double d_hat = 0.0, std_dev = 0.0, std_err = 0.0, rel_std = 0.0;
    double d_hat_u = 0.0, std_u = 0.0, std_err_u = 0.0;
    double d_psi = 0.0;
    std::string cv_source = "none";
    std::string cv_hash = "none";
    std::filesystem::path csv_path;

    bool ok() const noexcept { return status == "ok"; }
};

/// One (gamma, delta, direction) cell: builds the control variate, runs J
/// replicas, writes the series CSV when `write_csv`. Failures are reported in
/// the status, never thrown.
CellResult run_cell(const ExperimentConfig& config, double gamma, double delta, int direction, CvFactory& factory,
                    bool write_csv = true);

struct SweepResult {
    std::vector<CellResult> cells;
    std::filesystem::path summary_path;
    bool all_ok = true;
};

/// All cells of the config in order delta, direction, gamma; writes the per-cell
/// series and summary.csv into config.output_dir.
SweepResult run_sweep(const ExperimentConfig& config);

std::string series_file_name(double gamma, double delta, int direction);
void write_summary_csv(std::ostream& os, const std::vector<CellResult>& cells, const std::vector<std::string>& comments);

/// Minimal CSV table: '#' comment lines, one header line, rows of text fields.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
    /// Numeric column; empty fields become NaN.
    std::vector<double> numbers(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

struct ScalingFit {
    double sigma = 0.0;  // D ~ C gamma^{-sigma}
    double sigma_stderr = 0.0;
    double log_c = 0.0;
    int points = 0;
    std::vector<std::string> warnings;
};

/// Least squares of log D against log gamma over gamma <= cutoff. Non-positive D
/// are dropped with a warning. Throws std::invalid_argument with fewer than 3 points.
ScalingFit fit_scaling(const std::vector<double>& gammas, const std::vector<double>& d_hat, double cutoff = 1e-2);

/// Log-log D vs gamma (one series per delta/direction, dashed fits where >= 3 points qualify).
std::string summary_plot_svg(const CsvTable& summary, double cutoff);
/// u(t) (and v(t) when present) with shaded mean +- ci bands.
std::string series_plot_svg(const CsvTable& series, const std::string& title);
/// Renders summary.csv and every series_*.csv of `input_dir` into `output_dir`; returns written files.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& input_dir,
                                              const std::filesystem::path& output_dir, double cutoff = 1e-2);

}  // namespace cvdiff
