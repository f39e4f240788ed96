// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: cvdiff_acceptance [criterion ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cvdiff/config.hpp"
#include "cvdiff/control_variate.hpp"
#include "cvdiff/experiments.hpp"
#include "cvdiff/integrators.hpp"
#include "cvdiff/monte_carlo.hpp"
#include "cvdiff/sampling.hpp"
#include "cvdiff/spectral_poisson.hpp"
#include "cvdiff/torus.hpp"
#include "cvdiff/underdamped_cv.hpp"

using namespace cvdiff;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (ok ? "" : "[x] ") << what << "; ";
    }
};

std::string fmt(double x, int digits = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double final_stderr(const std::vector<double>& std_dev, long long J) {
    return std_dev.back() / std::sqrt(static_cast<double>(J));
}

Hamiltonian one_d(PotentialKind kind, double stiffness = 1.0) {
    return Hamiltonian{Potential1D(kind, stiffness), 1.0};
}

fs::path work_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "cvdiff_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------------------
// 1, 2: free diffusion

std::map<double, RunResult> free_runs;

const RunResult& free_run(double gamma) {
    auto it = free_runs.find(gamma);
    if (it != free_runs.end()) return it->second;
    RunSettings s;
    s.gamma = gamma;
    s.dt = 0.01;
    s.T = 100.0;
    s.J = 5000;
    s.seed = 1;
    return free_runs.emplace(gamma, run_langevin<1>(one_d(PotentialKind::zero), ZeroCV<1>(), s)).first->second;
}

void criterion_1(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    for (double gamma : {0.5, 1.0, 2.0}) {
        const RunResult& r = free_run(gamma);
        const double T = 100.0;
        const double sigma2 = (1.0 + (std::exp(-gamma * T) - 1.0) / (gamma * T)) / gamma;
        const double d = 1.0 / gamma;
        const double mean = r.series.mean_u.back(), se = final_stderr(r.series.std_u, r.series.J);
        v.require(std::abs(mean - sigma2) <= 3.0 * se, "gamma=" + fmt(gamma) + " mean u=" + fmt(mean) + " sigma_T^2=" +
                                                           fmt(sigma2) + " 3se=" + fmt(3 * se));
        v.require(std::abs(mean - d) <= 0.02 * d, "rel.dev from D=" + fmt((mean - d) / d, 3) + " (<= 0.02)");
    }
    const double elapsed = seconds_since(start);
    v.require(elapsed < 120.0, "runtime " + fmt(elapsed, 3) + " s (< 120)");
}

void criterion_2(Verdict& v) {
    const RunResult& r = free_run(1.0);
    const double rel = r.series.std_u.back() / 1.0;
    v.require(rel >= 1.27 && rel <= 1.56, "std[u]/D=" + fmt(rel) + " in [1.27, 1.56]");
}

// ---------------------------------------------------------------------------
// 3: exact control variate on V = 0

void criterion_3(Verdict& v) {
    const double gamma = 1.0;
    const LinearMomentumCV<1> phi(1.0 / gamma, 0, gamma, 1.0);
    double ratio[2];
    int k = 0;
    for (double dt : {0.01, 0.005}) {
        RunSettings s;
        s.gamma = gamma;
        s.dt = dt;
        s.T = 100.0;
        s.J = 2000;
        s.seed = 3;
        const RunResult r = run_langevin<1>(one_d(PotentialKind::zero), phi, s);
        ratio[k++] = r.series.std_v.back() / r.series.std_u.back();
    }
    v.require(ratio[0] <= 0.05, "std[v]/std[u]=" + fmt(ratio[0]) + " at dt=0.01 (<= 0.05)");
    const double halving = ratio[0] / ratio[1];
    v.require(halving >= 1.7 && halving <= 2.3,
              "ratio(dt=0.01)/ratio(dt=0.005)=" + fmt(halving) + " in [1.7, 2.3]");
}

// ---------------------------------------------------------------------------
// 4: quadratic potential

void criterion_4(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    RunSettings s;
    s.gamma = 1.0;
    s.dt = 0.01;
    s.T = 50.0;
    s.J = 2000;
    s.seed = 4;
    const RunResult r = run_langevin<1>(one_d(PotentialKind::quadratic, 1.0), ZeroCV<1>(), s);
    const double T = s.T;
    const double t_mean = T * r.series.mean_u.back();
    const double t_se = T * final_stderr(r.series.std_u, r.series.J);
    const double t2_var = T * T * r.series.std_u.back() * r.series.std_u.back();
    v.require(std::abs(t_mean - 1.0) <= 3.0 * t_se, "T mean[u]=" + fmt(t_mean) + " 3se=" + fmt(3 * t_se));
    v.require(std::abs(t2_var - 2.0) <= 0.4, "T^2 Var[u]=" + fmt(t2_var) + " (2.0 +- 20%)");
    const double elapsed = seconds_since(start);
    v.require(elapsed < 60.0, "runtime " + fmt(elapsed, 3) + " s (< 60)");
}

// ---------------------------------------------------------------------------
// 5: Galerkin solve against Monte Carlo

void criterion_5(Verdict& v) {
    const Potential1D cosine(PotentialKind::cosine);
    SpectralBasis b60 = spectral_preset("desk", 1.0, 1.0);
    SpectralBasis b30 = b60;
    b30.modes = 30;
    const SpectralSolution s60 = solve_poisson(b60, cosine);
    const double d60 = diffusion_from_spectral(s60), d30 = diffusion_from_spectral(solve_poisson(b30, cosine));
    v.require(std::abs(d60 - d30) <= 5e-4 * d60, "<Psi,p> N=30: " + fmt(d30, 8) + ", N=60: " + fmt(d60, 8));

    auto grid = std::make_shared<const GridCV>(export_to_grid(s60, GridSpec{128, 192, 9.0}));
    RunSettings s;
    s.gamma = 1.0;
    s.dt = 0.01;
    s.T = 100.0;
    s.J = 2000;
    s.seed = 5;
    const RunResult r = run_langevin<1>(one_d(PotentialKind::cosine), GridControlVariate(grid), s);
    const double mean = r.series.mean_v.back(), se = final_stderr(r.series.std_v, r.series.J);
    v.require(std::abs(mean - d60) <= 3.0 * se, "MC D(v)=" + fmt(mean) + " 3se=" + fmt(3 * se));
    v.require(r.series.std_v.back() <= r.series.std_u.back() / 3.0,
              "std[v]/std[u]=" + fmt(r.series.std_v.back() / r.series.std_u.back()) + " (<= 1/3)");
}

// ---------------------------------------------------------------------------
// 6, 7: underdamped control variate

std::unique_ptr<UnderdampedProfile> cosine_profile;

const UnderdampedProfile& profile() {
    if (!cosine_profile)
        cosine_profile = std::make_unique<UnderdampedProfile>(
            UnderdampedProfile::build(Potential1D(PotentialKind::cosine), 100.0));
    return *cosine_profile;
}

RunResult underdamped_run(double gamma, double T, long long J, std::uint64_t seed) {
    auto grid = std::make_shared<const GridCV>(export_underdamped(profile(), GridSpec{128, 192, 9.0}, gamma, 1.0));
    RunSettings s;
    s.gamma = gamma;
    s.dt = 0.01;
    s.T = T;
    s.J = J;
    s.seed = seed;
    return run_langevin<1>(one_d(PotentialKind::cosine), GridControlVariate(grid), s);
}

void criterion_6(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    const double gamma = 1e-3;
    const RunResult r = underdamped_run(gamma, 100.0 / gamma, 1000, 6);
    const double var_u = std::pow(r.series.std_u.back(), 2), var_v = std::pow(r.series.std_v.back(), 2);
    v.require(var_v <= var_u / 10.0, "Var[v]/Var[u]=" + fmt(var_v / var_u) + " (<= 0.1), gamma D(v)=" +
                                         fmt(gamma * r.series.mean_v.back()) +
                                         ", gamma D(u)=" + fmt(gamma * r.series.mean_u.back()));
    const double elapsed = seconds_since(start);
    v.require(elapsed < 1800.0, "runtime " + fmt(elapsed, 4) + " s (< 1800)");
}

// beta^{-1} int |d_p phi0|^2 dmu by tensor quadrature of the exact profile derivative
double limit_quadrature() {
    const Potential1D cosine(PotentialKind::cosine);
    const int nq = 1024, np = 24000;
    const double lp = 12.0, hp = 2 * lp / np;
    double num = 0, den = 0;
    for (int i = 0; i < nq; ++i) {
        const double q = -kPi + kTwoPi * i / nq;
        const double wq = std::exp(-cosine.eval(q));
        for (int j = 0; j <= np; ++j) {
            const double p = -lp + j * hp;
            const double w = wq * std::exp(-0.5 * p * p) * (j == 0 || j == np ? 0.5 : 1.0);
            const double d = eval_phi0(profile(), q, p).second;
            num += w * d * d;
            den += w;
        }
    }
    return num / den;
}

void criterion_7(Verdict& v) {
    const double gamma = 1e-4;
    const double limit = limit_quadrature();
    const RunResult r = underdamped_run(gamma, 20.0 / gamma, 128, 7);
    const double scaled = gamma * r.series.mean_v.back();
    const double scaled_se = gamma * final_stderr(r.series.std_v, r.series.J);
    v.require(std::abs(scaled - limit) <= 0.1 * limit, "gamma D(v)=" + fmt(scaled) + " (se " + fmt(scaled_se, 3) +
                                                           "), gamma d[phi0]=" + fmt(limit) + ", rel.dev " +
                                                           fmt((scaled - limit) / limit, 3) + " (<= 0.1)");
}

// ---------------------------------------------------------------------------
// 8: noise pair covariance

void criterion_8(Verdict& v) {
    for (auto [gamma, dt] : {std::pair{1.0, 0.01}, std::pair{0.01, 0.01}}) {
        const NoisePairCovariance cov(gamma, dt);
        RandomStream rng(8, static_cast<std::uint64_t>(gamma * 1000));
        const long n = 1000000;
        std::vector<double> g(n), gt(n);
        for (long k = 0; k < n; ++k) {
            const NoisePair<1> pair = make_noise_pair<1>(cov, rng);
            g[k] = pair.g[0];
            gt[k] = pair.g_tilde[0];
        }
        // entry-wise sample covariance (known zero mean) and its standard error
        auto check = [&](const std::vector<double>& a, const std::vector<double>& b, double expected,
                         const std::string& name) {
            double m = 0, m2 = 0;
            for (long k = 0; k < n; ++k) {
                const double x = a[k] * b[k];
                m += x;
                m2 += x * x;
            }
            m /= n;
            const double se = std::sqrt((m2 / n - m * m) / n);
            v.require(std::abs(m - expected) <= 4.0 * se, "gamma=" + fmt(gamma) + " " + name + ": " +
                                                              fmt(m, 7) + " vs " + fmt(expected, 7) + " (" +
                                                              fmt(std::abs(m - expected) / se, 2) + " se)");
        };
        check(g, g, cov.s11(), "S11");
        check(g, gt, cov.s12(), "S12");
        check(gt, gt, cov.s22(), "S22");
    }
}

// ---------------------------------------------------------------------------
// 9: two-dimensional potential

void criterion_9(Verdict& v) {
    const fs::path dir2 = work_dir("c9_2d"), dir1 = work_dir("c9_1d");
    ExperimentConfig c2;
    c2.dynamics = "langevin-2d";
    c2.potential = "cosine";
    c2.deltas = {0.0, 0.25};
    c2.directions = {1, 2};
    c2.gammas = {0.01, 0.03, 0.1, 0.3, 1.0};
    c2.cv_source = "tensorized";
    c2.cv_base = "underdamped";
    c2.J = 200;
    c2.snapshot_count = 4;
    c2.master_seed = 9;
    c2.output_dir = dir2.string();
    const SweepResult two = run_sweep(c2);

    ExperimentConfig c1 = c2;
    c1.dynamics = "langevin-1d";
    c1.deltas = {0.0};
    c1.directions = {1};
    c1.cv_source = "underdamped";
    c1.master_seed = 90;
    c1.output_dir = dir1.string();
    const SweepResult one = run_sweep(c1);
    v.require(two.all_ok && one.all_ok, "all cells ok");
    if (!two.all_ok || !one.all_ok) return;

    auto find = [&](const SweepResult& s, double gamma, double delta, int dir) -> const CellResult& {
        for (const CellResult& c : s.cells)
            if (c.gamma == gamma && c.delta == delta && c.direction == dir) return c;
        throw std::runtime_error("missing cell");
    };
    int sep_ok = 0, sym_ok = 0;
    std::ostringstream worst;
    double worst_sep = 0, worst_sym = 0;
    for (double gamma : c2.gammas) {
        const CellResult& a = find(two, gamma, 0.0, 1);
        const CellResult& b = find(one, gamma, 0.0, 1);
        const double z = std::abs(a.d_hat - b.d_hat) / std::hypot(a.std_err, b.std_err);
        worst_sep = std::max(worst_sep, z);
        if (z <= 3.0) ++sep_ok;
        const CellResult& d11 = find(two, gamma, 0.25, 1);
        const CellResult& d22 = find(two, gamma, 0.25, 2);
        const double zs = std::abs(d11.d_hat - d22.d_hat) / std::hypot(d11.std_err, d22.std_err);
        worst_sym = std::max(worst_sym, zs);
        if (zs <= 3.0) ++sym_ok;
    }
    const int n = static_cast<int>(c2.gammas.size());
    v.require(sep_ok == n, "delta=0 vs 1D within joint 3 sigma at " + std::to_string(sep_ok) + "/" +
                               std::to_string(n) + " gammas (max " + fmt(worst_sep, 3) + " sigma)");
    v.require(sym_ok == n, "delta=0.25 D11 vs D22 within joint 3 sigma at " + std::to_string(sym_ok) + "/" +
                               std::to_string(n) + " gammas (max " + fmt(worst_sym, 3) + " sigma)");

    auto fit_for = [&](double delta) {
        std::vector<double> g, d;
        for (double gamma : c2.gammas) {
            g.push_back(gamma);
            d.push_back(find(two, gamma, delta, 1).d_hat);
        }
        return fit_scaling(g, d, 1.0);
    };
    const ScalingFit f0 = fit_for(0.0), f25 = fit_for(0.25);
    v.require(f0.sigma > 0.0 && f0.sigma <= 1.05, "sigma(delta=0)=" + fmt(f0.sigma, 4) + " +- " +
                                                      fmt(f0.sigma_stderr, 2) + " in (0, 1.05]");
    v.require(f25.sigma > 0.0 && f25.sigma <= 1.05, "sigma(delta=0.25)=" + fmt(f25.sigma, 4) + " +- " +
                                                        fmt(f25.sigma_stderr, 2) + " in (0, 1.05]");
    v.require(f0.sigma > f25.sigma - 0.1, "sigma(0) > sigma(0.25) - 0.1");
}

// ---------------------------------------------------------------------------
// 10: GLE

void criterion_10(Verdict& v) {
    const double gamma = 0.1, nu = 2.0, beta = 1.0, dt = 0.01;
    const Hamiltonian h = one_d(PotentialKind::cosine);
    const Potential1D pot(PotentialKind::cosine);
    auto measure = std::make_shared<const EquilibriumMeasure>(h);
    const GLEDrift drift(gamma, nu, beta, dt);
    auto grad = [&pot](double q) { return pot.grad(q); };
    const long replicas = 100000;
    const int steps = 10;
    RunningMoments p_moments, z_moments;
    for (long j = 0; j < replicas; ++j) {
        StationarySampler sampler(measure, RandomStream(10, j));
        const auto init = sampler.sample_gle_state();
        GleReplicaState s;
        s.q_wrapped = wrap_to_torus(init.q);
        s.q_unwrapped = init.q;
        s.p = init.p;
        s.z = init.z;
        for (int k = 0; k < steps; ++k) babo_step(s, grad, true, drift, sampler.stream());
        p_moments.add(s.p);
        z_moments.add(s.z);
    }
    v.require(std::abs(p_moments.variance() - 1.0) <= 0.02,
              "Var[p]=" + fmt(p_moments.variance()) + " after " + std::to_string(replicas * steps) + " steps");
    v.require(std::abs(z_moments.variance() - 1.0) <= 0.02, "Var[z]=" + fmt(z_moments.variance()));

    GleSettings s;
    s.gamma = gamma;
    s.nu = nu;
    s.dt = dt;
    s.T = 20.0;
    s.J = 500;
    s.snapshots = {5.0, 10.0};
    s.seed = 10;
    const RunResult r = run_gle(h, GleZeroCV(), s);
    bool equal = true;
    for (std::size_t k = 0; k < r.series.times.size(); ++k)
        equal = equal && r.series.mean_v[k] == r.series.mean_u[k] && r.series.std_v[k] == r.series.std_u[k];
    const auto steps_list = snapshot_steps(s.snapshots, s.dt, s.T);
    for (std::uint64_t j = 0; j < 50; ++j) {
        const ReplicaOutcome o = simulate_gle_replica(h, GleZeroCV(), s, steps_list, j);
        for (std::size_t k = 0; k < steps_list.size(); ++k) {
            const double t = steps_list[k] * s.dt;
            equal = equal && v_of_T(o.displacement[k], o.xi[k], t, 0.0) == u_of_T(o.displacement[k], t);
        }
    }
    v.require(equal, "psi = 0: v(T) == u(T) bitwise");
}

// ---------------------------------------------------------------------------
// 11: determinism across worker counts

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[e.path().filename().string()] = s.str();
    }
    return files;
}

void criterion_11(Verdict& v) {
    ExperimentConfig c;
    c.potential = "cosine";
    c.gammas = {0.3, 1.0};
    c.cv_source = "underdamped";
    c.J = 64;
    c.t_rule = "fixed";
    c.t_final = 20.0;
    c.master_seed = 11;
    c.bit_exact = true;
    std::map<std::string, std::string> runs[2];
    int k = 0;
    // same output directory for both runs so the embedded config is identical
    for (int workers : {1, 3}) {
        const fs::path dir = work_dir("c11");
        c.workers = workers;
        c.output_dir = dir.string();
        run_sweep(c);
        runs[k++] = read_dir(dir);
    }
    v.require(runs[0].size() == 3, std::to_string(runs[0].size()) + " CSV files per run");
    v.require(runs[0] == runs[1], "workers 1 vs 3 byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<void(Verdict&)>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                              criterion_5, criterion_6, criterion_7, criterion_8,
                                                              criterion_9, criterion_10, criterion_11};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
    int failures = 0;
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) {
        if (!selected.empty() && !selected.count(n)) continue;
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[n - 1](v);
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        if (!v.pass) ++failures;
        std::printf("criterion %2d: %s (%.1f s) %s\n", n, v.pass ? "PASS" : "FAIL", seconds_since(start),
                    v.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
