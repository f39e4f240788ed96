// cvdiff command-line driver.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "cvdiff/config.hpp"
#include "cvdiff/experiments.hpp"
#include "cvdiff/spectral_poisson.hpp"
#include "cvdiff/underdamped_cv.hpp"

using namespace cvdiff;

namespace {

struct ConfigOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::map<std::string, CLI::Option*> options;
};

void add_config_options(CLI::App* app, ConfigOptions& opts) {
    app->add_option("--config", opts.config_path, "flat key = value experiment file");
    for (const auto& key : ExperimentConfig::keys())
        opts.options[key] = app->add_option("--" + key, opts.overrides[key], "override config key " + key);
}

ExperimentConfig resolve(const ConfigOptions& opts) {
    ExperimentConfig config = opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
    for (const auto& [key, option] : opts.options)
        if (option->count() > 0) config.set(key, opts.overrides.at(key));
    config.validate();
    return config;
}

void print_cell(const CellResult& c) {
    std::cout << "gamma=" << format_double(c.gamma) << " delta=" << format_double(c.delta)
              << " direction=" << c.direction << " T=" << format_double(c.T);
    if (c.has_series)
        std::cout << " D_hat=" << format_double(c.d_hat) << " stderr=" << format_double(c.std_err)
                  << " relstd=" << format_double(c.rel_std) << " D_hat_u=" << format_double(c.d_hat_u)
                  << " stderr_u=" << format_double(c.std_err_u) << " d_psi=" << format_double(c.d_psi);
    std::cout << " status=" << c.status << "\n";
}

std::filesystem::path default_cache(const ExperimentConfig& config, const std::string& tag, double gamma) {
    return std::filesystem::path(config.output_dir) / (tag + "_gamma" + format_double(gamma) + ".cvgrid");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective diffusion of Langevin dynamics on the torus with control variates"};
    app.require_subcommand(1);

    ConfigOptions solve_opts, und_opts, run_opts, sweep_opts;
    std::string solve_out, und_out;
    auto* solve = app.add_subcommand("solve-poisson", "Galerkin Poisson solve, cached as a grid control variate");
    add_config_options(solve, solve_opts);
    solve->add_option("--out", solve_out, "cache file (default <output_dir>/galerkin_gamma<g>.cvgrid)");

    auto* und = app.add_subcommand("build-underdamped", "underdamped control variate, cached as a grid");
    add_config_options(und, und_opts);
    und->add_option("--out", und_out, "cache file (default <output_dir>/underdamped_gamma<g>.cvgrid)");

    auto* run = app.add_subcommand("run", "single cell: first gamma, delta and direction of the config");
    add_config_options(run, run_opts);

    auto* sweep = app.add_subcommand("sweep", "every (delta, direction, gamma) cell, plus summary.csv");
    add_config_options(sweep, sweep_opts);

    std::string fit_summary;
    double fit_cutoff = 1e-2;
    auto* fit = app.add_subcommand("fit", "power-law exponent of D against gamma");
    fit->add_option("summary", fit_summary, "summary.csv from a sweep")->required();
    fit->add_option("--cutoff", fit_cutoff, "use only gamma <= cutoff");

    std::string plot_in, plot_out;
    double plot_cutoff = 1e-2;
    auto* plot = app.add_subcommand("plot", "SVG plots of a sweep directory");
    plot->add_option("input", plot_in, "directory with summary.csv and series_*.csv")->required();
    plot->add_option("--output", plot_out, "output directory (default: input)");
    plot->add_option("--cutoff", plot_cutoff, "fit range gamma <= cutoff");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            const ExperimentConfig config = resolve(solve_opts);
            const double gamma = config.gammas.front();
            const Potential1D pot = Potential1D::from_name(config.potential, config.k);
            SpectralBasis basis = spectral_preset(config.solver_preset, config.beta, gamma);
            if (config.spectral_n > 0) basis.modes = config.spectral_n;
            if (config.sigma > 0.0) basis.sigma = config.sigma;
            const SpectralSolution sol =
                solve_poisson(basis, pot, config.solver == "krylov" ? SaddleSolver::krylov : SaddleSolver::direct);
            const GridCV grid = export_to_grid(sol, config.grid_spec());
            const auto path = solve_out.empty() ? default_cache(config, "galerkin", gamma) : std::filesystem::path(solve_out);
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            grid.save(path);
            std::cout << "N=" << basis.modes << " sigma=" << format_double(basis.sigma)
                      << " D=" << format_double(diffusion_from_spectral(sol)) << " alpha=" << format_double(sol.alpha)
                      << " residual=" << format_double(sol.residual_norm / sol.rhs_norm)
                      << " condition~" << format_double(sol.condition_estimate)
                      << " d_psi=" << format_double(grid.d_psi()) << "\n";
            std::cout << "wrote " << path.string() << " sha1=" << git_blob_sha1(grid.serialize()) << "\n";
            return 0;
        }
        if (*und) {
            const ExperimentConfig config = resolve(und_opts);
            const double gamma = config.gammas.front();
            const Potential1D pot = Potential1D::from_name(config.potential, config.k);
            const UnderdampedProfile profile = UnderdampedProfile::build(pot, 100.0 * config.beta);
            const GridCV grid = export_underdamped(profile, config.grid_spec(), gamma, config.beta);
            const auto path = und_out.empty() ? default_cache(config, "underdamped", gamma) : std::filesystem::path(und_out);
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            grid.save(path);
            std::cout << "E0=" << format_double(profile.e0()) << " E_max=" << format_double(profile.e_max())
                      << " profile_nodes=" << profile.nodes_s().size() << " d_psi=" << format_double(grid.d_psi())
                      << " gamma*d_psi=" << format_double(gamma * grid.d_psi()) << "\n";
            std::cout << "wrote " << path.string() << " sha1=" << git_blob_sha1(grid.serialize()) << "\n";
            return 0;
        }
        if (*run) {
            const ExperimentConfig config = resolve(run_opts);
            CvFactory factory(config);
            const CellResult cell =
                run_cell(config, config.gammas.front(), config.deltas.front(), config.directions.front(), factory);
            print_cell(cell);
            if (!cell.csv_path.empty()) std::cout << "wrote " << cell.csv_path.string() << "\n";
            return cell.ok() ? 0 : 1;
        }
        if (*sweep) {
            const ExperimentConfig config = resolve(sweep_opts);
            const SweepResult result = run_sweep(config);
            for (const auto& c : result.cells) print_cell(c);
            std::cout << "wrote " << result.summary_path.string() << "\n";
            return result.all_ok ? 0 : 1;
        }
        if (*fit) {
            const CsvTable table = read_csv(fit_summary);
            const auto gammas = table.numbers("gamma");
            const auto deltas = table.numbers("delta");
            const auto dirs = table.numbers("direction");
            const auto d_hat = table.numbers("D_hat");
            std::map<std::pair<double, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
            for (std::size_t i = 0; i < gammas.size(); ++i) {
                auto& g = groups[{deltas[i], static_cast<int>(dirs[i])}];
                g.first.push_back(gammas[i]);
                g.second.push_back(d_hat[i]);
            }
            const auto out_path = std::filesystem::path(fit_summary).parent_path() / "fit.csv";
            std::ofstream out(out_path, std::ios::binary);
            out << "# fit of log D against log gamma, gamma <= " << format_double(fit_cutoff) << "\n";
            out << "delta,direction,sigma,sigma_stderr,points\n";
            bool ok = true;
            for (const auto& [key, data] : groups) {
                try {
                    const ScalingFit f = fit_scaling(data.first, data.second, fit_cutoff);
                    for (const auto& w : f.warnings) std::cerr << "warning: " << w << "\n";
                    std::cout << "delta=" << format_double(key.first) << " direction=" << key.second
                              << " sigma=" << format_double(f.sigma) << " stderr=" << format_double(f.sigma_stderr)
                              << " points=" << f.points << "\n";
                    out << format_double(key.first) << ',' << key.second << ',' << format_double(f.sigma) << ','
                        << format_double(f.sigma_stderr) << ',' << f.points << "\n";
                } catch (const std::invalid_argument& e) {
                    ok = false;
                    std::cerr << "delta=" << format_double(key.first) << " direction=" << key.second << ": " << e.what()
                              << "\n";
                }
            }
            return ok ? 0 : 1;
        }
        if (*plot) {
            const auto files = emit_plots(plot_in, plot_out.empty() ? plot_in : plot_out, plot_cutoff);
            for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
