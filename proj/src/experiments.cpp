#include "cvdiff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "cvdiff/control_variate.hpp"
#include "cvdiff/monte_carlo.hpp"
#include "cvdiff/spectral_poisson.hpp"

namespace cvdiff {

std::string git_blob_sha1(const std::string& bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &length) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-1 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

CvFactory::CvFactory(const ExperimentConfig& config) : config_(config) {}

std::shared_ptr<const GridCV> CvFactory::grid_1d(const std::string& source, double gamma) {
    const Potential1D pot = Potential1D::from_name(config_.potential, config_.k);
    if (source == "file") {
        if (!file_grid_) file_grid_ = std::make_shared<const GridCV>(GridCV::load(config_.cv_file));
        if (std::isnan(file_grid_->d_psi())) {
            auto copy = std::make_shared<GridCV>(*file_grid_);
            copy->set_d_psi(compute_d(*copy, pot, gamma, config_.beta));
            return copy;
        }
        return file_grid_;
    }
    if (!pot.periodic()) throw std::invalid_argument("grid control variates need a periodic potential");
    if (source == "underdamped") {
        if (!profile_) profile_ = UnderdampedProfile::build(pot, 100.0 * config_.beta);
        return std::make_shared<const GridCV>(export_underdamped(*profile_, config_.grid_spec(), gamma, config_.beta));
    }
    if (source == "galerkin") {
        SpectralBasis basis = spectral_preset(config_.solver_preset, config_.beta, gamma);
        if (config_.spectral_n > 0) basis.modes = config_.spectral_n;
        if (config_.sigma > 0.0) basis.sigma = config_.sigma;
        const SpectralSolution sol =
            solve_poisson(basis, pot, config_.solver == "krylov" ? SaddleSolver::krylov : SaddleSolver::direct);
        last_spectral_ = diffusion_from_spectral(sol);
        return std::make_shared<const GridCV>(export_to_grid(sol, config_.grid_spec()));
    }
    throw std::invalid_argument("unknown 1D control variate source: " + source);
}

std::shared_ptr<const GleGridCV> CvFactory::gle_grid() {
    if (!file_gle_) file_gle_ = std::make_shared<const GleGridCV>(GleGridCV::load(config_.cv_file));
    return file_gle_;
}

std::string series_file_name(double gamma, double delta, int direction) {
    return "series_gamma" + format_double(gamma) + "_delta" + format_double(delta) + "_dir" +
           std::to_string(direction) + ".csv";
}

namespace {

std::vector<double> snapshot_times(const ExperimentConfig& config, double T) {
    std::vector<double> times;
    if (!config.snapshots.empty()) {
        for (double t : config.snapshots)
            if (t > 0.0 && t <= T) times.push_back(t);
    } else {
        for (int k = 1; k <= config.snapshot_count; ++k) times.push_back(T * k / config.snapshot_count);
    }
    return times;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& config, double gamma, double delta, int direction, CvFactory& factory,
                    bool write_csv) {
    CellResult cell;
    cell.gamma = gamma;
    cell.delta = delta;
    cell.direction = direction;
    std::vector<std::string> extra;
    try {
        config.validate();
        double T = config.final_time(gamma);
        long long steps = std::llround(T / config.dt);
        if (steps > config.max_steps) {
            std::cerr << "warning: T = " << T << " at gamma = " << gamma << " needs " << steps
                      << " steps; capped at max_steps = " << config.max_steps << "\n";
            steps = config.max_steps;
            T = static_cast<double>(steps) * config.dt;
            cell.t_capped = true;
        }
        cell.T = T;
        cell.steps = steps;
        const std::vector<double> times = snapshot_times(config, T);
        const Potential1D part = Potential1D::from_name(config.potential, config.k);
        RunResult run;
        if (config.dynamics == "langevin-1d") {
            const Hamiltonian h{part, config.beta};
            RunSettings s{gamma, config.dt, T, config.J, times, config.master_seed, 0, config.bit_exact,
                          config.workers};
            if (config.cv_source == "none") {
                run = run_langevin<1>(h, ZeroCV<1>{}, s);
            } else if (config.cv_source == "linear") {
                const double c = config.cv_coefficient != 0.0 ? config.cv_coefficient : 1.0 / gamma;
                LinearMomentumCV<1> cv(c, 0, gamma, config.beta);
                run = run_langevin<1>(h, cv, s);
                cell.cv_source = cv.source();
            } else {
                auto grid = factory.grid_1d(config.cv_source, gamma);
                cell.cv_hash = git_blob_sha1(grid->serialize());
                GridControlVariate cv(grid);
                run = run_langevin<1>(h, cv, s);
                cell.cv_source = cv.source();
                if (config.cv_source == "galerkin")
                    extra.push_back("spectral_diffusion = " + format_double(factory.last_spectral_diffusion()));
            }
        } else if (config.dynamics == "langevin-2d") {
            const Potential2D pot(part, delta);
            const Hamiltonian h{pot, config.beta};
            RunSettings s{gamma, config.dt, T, config.J, times, config.master_seed, direction - 1, config.bit_exact,
                          config.workers};
            if (config.cv_source == "none") {
                run = run_langevin<2>(h, ZeroCV<2>{}, s);
            } else {
                auto grid = factory.grid_1d(config.cv_base, gamma);
                cell.cv_hash = git_blob_sha1(grid->serialize());
                auto tens = std::make_shared<const TensorizedGridCV>(grid, pot, direction - 1, gamma, config.beta);
                TensorizedControlVariate cv(tens);
                run = run_langevin<2>(h, cv, s);
                cell.cv_source = cv.source();
            }
        } else {
            const Hamiltonian h{part, config.beta};
            GleSettings s{gamma, config.nu, config.dt, T, config.J, times, config.master_seed, config.bit_exact,
                          config.workers};
            if (config.cv_source == "none") {
                run = run_gle(h, GleZeroCV{}, s);
            } else if (config.cv_source == "linear") {
                GleLinearCV cv(0.0, config.cv_coefficient, config.nu, config.beta);
                run = run_gle(h, cv, s);
                cell.cv_source = cv.source();
            } else {
                auto grid = factory.gle_grid();
                cell.cv_hash = git_blob_sha1(grid->serialize());
                GleGridControlVariate cv(grid, compute_d_gle(*grid, part, config.nu, config.beta));
                run = run_gle(h, cv, s);
                cell.cv_source = cv.source();
            }
        }
        cell.series = run.series;
        cell.has_series = true;
        const EstimatorSeries& se = cell.series;
        const double root_j = std::sqrt(static_cast<double>(se.J));
        cell.d_psi = se.d_psi;
        cell.d_hat_u = se.mean_u.back();
        cell.std_u = se.std_u.back();
        cell.std_err_u = cell.std_u / root_j;
        cell.d_hat = se.has_cv ? se.mean_v.back() : cell.d_hat_u;
        cell.std_dev = se.has_cv ? se.std_v.back() : cell.std_u;
        cell.std_err = cell.std_dev / root_j;
        cell.rel_std = cell.std_dev / cell.d_hat;
        if (run.diverged > 0)
            cell.status = "diverged: " + std::to_string(run.diverged) + " replicas (" + run.first_error + ")";
    } catch (const std::exception& e) {
        cell.status = std::string("error: ") + e.what();
    }

    if (write_csv && cell.has_series) {
        std::filesystem::create_directories(config.output_dir);
        cell.csv_path = std::filesystem::path(config.output_dir) / series_file_name(gamma, delta, direction);
        SeriesContext ctx{gamma, config.beta, delta, cell.cv_source, config.master_seed, {}};
        ctx.header_comments.push_back("cvdiff estimator series");
        for (const auto& line : config.to_lines()) ctx.header_comments.push_back("config " + line);
        ctx.header_comments.push_back("cell gamma = " + format_double(gamma) + ", delta = " + format_double(delta) +
                                      ", direction = " + std::to_string(direction));
        ctx.header_comments.push_back("T = " + format_double(cell.T) + ", steps = " + std::to_string(cell.steps) +
                                      (cell.t_capped ? " (capped by max_steps)" : ""));
        ctx.header_comments.push_back("cv_cache_sha1 = " + cell.cv_hash);
        for (const auto& line : extra) ctx.header_comments.push_back(line);
        ctx.header_comments.push_back("status = " + cell.status);
        std::ofstream out(cell.csv_path, std::ios::binary);
        write_series_csv(out, cell.series, ctx);
    }
    return cell;
}

void write_summary_csv(std::ostream& os, const std::vector<CellResult>& cells,
                       const std::vector<std::string>& comments) {
    for (const auto& c : comments) os << "# " << c << '\n';
    os << "gamma,delta,direction,D_hat,std,stderr,relstd,D_hat_u,std_u,stderr_u,d_psi,J,T,cv_source,cv_hash,status\n";
    for (const CellResult& c : cells) {
        os << format_double(c.gamma) << ',' << format_double(c.delta) << ',' << c.direction << ',';
        if (c.has_series) {
            os << format_double(c.d_hat) << ',' << format_double(c.std_dev) << ',' << format_double(c.std_err) << ','
               << format_double(c.rel_std) << ',' << format_double(c.d_hat_u) << ',' << format_double(c.std_u) << ','
               << format_double(c.std_err_u) << ',' << format_double(c.d_psi) << ',' << c.series.J << ',';
        } else {
            os << ",,,,,,,,,";
        }
        std::string status = c.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        os << format_double(c.T) << ',' << c.cv_source << ',' << c.cv_hash << ',' << status << '\n';
    }
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;
    CvFactory factory(config);
    for (double delta : config.deltas) {
        for (int direction : config.directions) {
            for (double gamma : config.gammas) {
                CellResult cell = run_cell(config, gamma, delta, direction, factory);
                if (!cell.ok()) {
                    result.all_ok = false;
                    std::cerr << "cell gamma = " << gamma << ", delta = " << delta << ", direction = " << direction
                              << ": " << cell.status << "\n";
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }
    std::filesystem::create_directories(config.output_dir);
    result.summary_path = std::filesystem::path(config.output_dir) / "summary.csv";
    std::vector<std::string> comments{"cvdiff sweep summary"};
    for (const auto& line : config.to_lines()) comments.push_back("config " + line);
    std::ofstream out(result.summary_path, std::ios::binary);
    write_summary_csv(out, result.cells, comments);
    return result;
}

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw std::invalid_argument("CSV has no column " + name);
    std::vector<double> out;
    for (const auto& row : rows) {
        const std::string& f = static_cast<std::size_t>(c) < row.size() ? row[c] : std::string();
        out.push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f));
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> f;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        f.push_back(cur);
        return f;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
            continue;
        }
        if (t.header.empty())
            t.header = split(line);
        else
            t.rows.push_back(split(line));
    }
    return t;
}

ScalingFit fit_scaling(const std::vector<double>& gammas, const std::vector<double>& d_hat, double cutoff) {
    if (gammas.size() != d_hat.size()) throw std::invalid_argument("fit: gamma and D lists differ in length");
    ScalingFit fit;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] <= cutoff)) continue;
        if (!(d_hat[i] > 0.0) || !(gammas[i] > 0.0)) {
            fit.warnings.push_back("excluded non-positive D at gamma = " + format_double(gammas[i]));
            continue;
        }
        x.push_back(std::log(gammas[i]));
        y.push_back(std::log(d_hat[i]));
    }
    fit.points = static_cast<int>(x.size());
    if (fit.points < 3) throw std::invalid_argument("fit needs at least 3 points with gamma <= cutoff and D > 0");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit needs at least two distinct gamma values");
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        ssr += r * r;
    }
    fit.sigma = -slope;
    fit.sigma_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    fit.log_c = my - slope * mx;
    return fit;
}

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Frame {
    double x0 = 70, y0 = 30, w = 540, h = 390;
    double xmin, xmax, ymin, ymax;
    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void svg_open(std::ostringstream& s, const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    s << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    s << "<text x=\"340\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << title
      << "</text>\n";
}

void axes(std::ostringstream& s, const Frame& f, const std::string& xlabel, const std::string& ylabel, bool logx,
          bool logy) {
    s << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\"" << num(f.w) << "\" height=\""
      << num(f.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto ticks = [](double lo, double hi, bool log) {
        std::vector<double> t;
        if (log) {
            for (double e = std::ceil(lo); e <= std::floor(hi) + 1e-9; e += 1.0) t.push_back(e);
        } else {
            const double span = hi - lo;
            const double raw = span / 5.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            double step = mag;
            for (double m : {1.0, 2.0, 5.0, 10.0})
                if (m * mag >= raw) {
                    step = m * mag;
                    break;
                }
            for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) t.push_back(v);
        }
        return t;
    };
    for (double t : ticks(f.xmin, f.xmax, logx)) {
        const double x = f.px(t);
        s << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.y0 + f.h) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(f.y0 + f.h + 5) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(x) << "\" y=\"" << num(f.y0 + f.h + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << (logx ? "1e" + label_number(t) : label_number(t)) << "</text>\n";
    }
    for (double t : ticks(f.ymin, f.ymax, logy)) {
        const double y = f.py(t);
        s << "<line x1=\"" << num(f.x0 - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(f.x0) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(f.x0 - 8) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << (logy ? "1e" + label_number(t) : label_number(t)) << "</text>\n";
    }
    s << "<text x=\"" << num(f.x0 + f.w / 2) << "\" y=\"" << num(f.y0 + f.h + 36)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel << "</text>\n";
    s << "<text x=\"16\" y=\"" << num(f.y0 + f.h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 16 " << num(f.y0 + f.h / 2) << ")\">" << ylabel << "</text>\n";
}

void pad_range(double& lo, double& hi, double fraction) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
        return;
    }
    const double m = (hi - lo) * fraction;
    lo -= m;
    hi += m;
}

}  // namespace

std::string summary_plot_svg(const CsvTable& summary, double cutoff) {
    const auto gammas = summary.numbers("gamma");
    const auto deltas = summary.numbers("delta");
    const auto dirs = summary.numbers("direction");
    const auto d_hat = summary.numbers("D_hat");
    struct Group {
        double delta;
        int direction;
        std::vector<double> g, d;
    };
    std::vector<Group> groups;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(d_hat[i] > 0.0) || !(gammas[i] > 0.0)) continue;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.delta == deltas[i] && g.direction == static_cast<int>(dirs[i]);
        });
        if (it == groups.end()) {
            groups.push_back({deltas[i], static_cast<int>(dirs[i]), {}, {}});
            it = groups.end() - 1;
        }
        it->g.push_back(gammas[i]);
        it->d.push_back(d_hat[i]);
        xmin = std::min(xmin, std::log10(gammas[i]));
        xmax = std::max(xmax, std::log10(gammas[i]));
        ymin = std::min(ymin, std::log10(d_hat[i]));
        ymax = std::max(ymax, std::log10(d_hat[i]));
    }
    std::ostringstream s;
    svg_open(s, "effective diffusion vs friction");
    if (groups.empty()) {
        xmin = -1;
        xmax = 0;
        ymin = -1;
        ymax = 0;
    }
    pad_range(xmin, xmax, 0.08);
    pad_range(ymin, ymax, 0.08);
    Frame f{70, 30, 540, 390, xmin, xmax, ymin, ymax};
    axes(s, f, "gamma", "D", true, true);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const Group& g = groups[k];
        const char* color = kPalette[k % 6];
        for (std::size_t i = 0; i < g.g.size(); ++i)
            s << "<circle cx=\"" << num(f.px(std::log10(g.g[i]))) << "\" cy=\"" << num(f.py(std::log10(g.d[i])))
              << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        std::string legend = "delta=" + label_number(g.delta) + " e=" + std::to_string(g.direction);
        try {
            const ScalingFit fit = fit_scaling(g.g, g.d, cutoff);
            double lo = 1e300, hi = -1e300;
            for (double x : g.g)
                if (x <= cutoff) {
                    lo = std::min(lo, std::log10(x));
                    hi = std::max(hi, std::log10(x));
                }
            auto line_y = [&](double lx) { return (fit.log_c - fit.sigma * lx * std::log(10.0)) / std::log(10.0); };
            s << "<line x1=\"" << num(f.px(lo)) << "\" y1=\"" << num(f.py(line_y(lo))) << "\" x2=\"" << num(f.px(hi))
              << "\" y2=\"" << num(f.py(line_y(hi))) << "\" stroke=\"" << color
              << "\" stroke-dasharray=\"6,4\"/>\n";
            legend += " sigma=" + label_number(fit.sigma);
        } catch (const std::invalid_argument&) {
        }
        const double ly = 48 + 16 * static_cast<double>(k);
        s << "<text x=\"" << num(f.x0 + f.w - 8) << "\" y=\"" << num(ly)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << legend
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string series_plot_svg(const CsvTable& series, const std::string& title) {
    const auto t = series.numbers("time");
    const auto mu = series.numbers("mean_u");
    const auto cu = series.numbers("ci_halfwidth_u");
    const auto mv = series.numbers("mean_v");
    const auto cv = series.numbers("ci_halfwidth_v");
    bool has_v = !mv.empty();
    for (double v : mv)
        if (std::isnan(v)) has_v = false;
    double xmin = 0.0, xmax = 0.0, ymin = 1e300, ymax = -1e300;
    for (std::size_t i = 0; i < t.size(); ++i) {
        xmax = std::max(xmax, t[i]);
        ymin = std::min(ymin, mu[i] - cu[i]);
        ymax = std::max(ymax, mu[i] + cu[i]);
        if (has_v) {
            ymin = std::min(ymin, mv[i] - cv[i]);
            ymax = std::max(ymax, mv[i] + cv[i]);
        }
    }
    if (t.empty()) {
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    pad_range(ymin, ymax, 0.05);
    std::ostringstream s;
    svg_open(s, title);
    Frame f{70, 30, 540, 390, xmin, xmax > xmin ? xmax : xmin + 1, ymin, ymax};
    axes(s, f, "t", "estimate", false, false);
    auto draw = [&](const std::vector<double>& m, const std::vector<double>& c, const char* color,
                    const std::string& name, int slot) {
        if (t.empty()) return;
        s << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < t.size(); ++i) s << num(f.px(t[i])) << ',' << num(f.py(m[i] + c[i])) << ' ';
        for (std::size_t i = t.size(); i-- > 0;) s << num(f.px(t[i])) << ',' << num(f.py(m[i] - c[i])) << ' ';
        s << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (std::size_t i = 0; i < t.size(); ++i) s << num(f.px(t[i])) << ',' << num(f.py(m[i])) << ' ';
        s << "\"/>\n";
        s << "<text x=\"" << num(f.x0 + f.w - 8) << "\" y=\"" << num(48 + 16 * slot)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << name
          << "</text>\n";
    };
    draw(mu, cu, kPalette[0], "u(t), m +- 3s", 0);
    if (has_v) draw(mv, cv, kPalette[1], "v(t), m +- 3s", 1);
    s << "</svg>\n";
    return s.str();
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& input_dir,
                                              const std::filesystem::path& output_dir, double cutoff) {
    std::filesystem::create_directories(output_dir);
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        written.push_back(p);
    };
    const auto summary = input_dir / "summary.csv";
    if (std::filesystem::exists(summary))
        write(output_dir / "diffusion_vs_gamma.svg", summary_plot_svg(read_csv(summary), cutoff));
    std::vector<std::filesystem::path> series;
    for (const auto& entry : std::filesystem::directory_iterator(input_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("series_", 0) == 0 && entry.path().extension() == ".csv") series.push_back(entry.path());
    }
    std::sort(series.begin(), series.end());
    for (const auto& p : series) {
        const std::string stem = p.stem().string();
        write(output_dir / (stem + ".svg"), series_plot_svg(read_csv(p), stem));
    }
    return written;
}

}  // namespace cvdiff
