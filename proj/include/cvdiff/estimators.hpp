#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvdiff {

/// u(T) = |displacement|^2 / (2T). Throws std::invalid_argument for T <= 0.
double u_of_T(double displacement, double T);

/// v(T) = u(T) - |xi|^2 / (2T) + d[psi].
double v_of_T(double displacement, double xi, double T, double d_psi);

/// One left-point Ito increment sqrt(2 gamma / beta) grad_p psi . g~.
template <int D>
double xi_increment(const std::array<double, D>& grad_p, const std::array<double, D>& g_tilde, double gamma,
                    double beta) {
    double dot = 0.0;
    for (int k = 0; k < D; ++k) dot += grad_p[k] * g_tilde[k];
    return std::sqrt(2.0 * gamma / beta) * dot;
}

/// xi_T = psi(x_0) - psi(x_T) + I_psi.
inline double xi_value(double psi_initial, double psi_final, double ito_sum) {
    return psi_initial - psi_final + ito_sum;
}

/// Welford accumulator; merge() combines two disjoint samples (Chan et al.).
struct RunningMoments {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningMoments& other);
    /// Unbiased sample variance (0 for n < 2).
    double variance() const;
    double stddev() const { return std::sqrt(variance()); }
};

/// Displacement and xi of one replica at each snapshot time.
struct ReplicaOutcome {
    std::vector<double> displacement;
    std::vector<double> xi;
    bool diverged = false;
    std::string message;
};

struct EstimatorSeries {
    std::vector<double> times;
    std::vector<double> mean_u, std_u, mean_v, std_v;
    std::vector<double> ci_u, ci_v;  // ci_multiplier * std / sqrt(J)
    long long J = 0;
    double d_psi = 0.0;
    bool has_cv = false;
    double ci_multiplier = 3.0;

    /// Per-snapshot statistics from accumulated moments of u and v.
    static EstimatorSeries from_moments(const std::vector<double>& times, const std::vector<RunningMoments>& u,
                                        const std::vector<RunningMoments>& v, double d_psi, bool has_cv);
};

/// Sample mean / std of u and v per snapshot over the non-diverged outcomes, in index
/// order. Throws std::invalid_argument if fewer than two outcomes remain.
EstimatorSeries aggregate(const std::vector<ReplicaOutcome>& outcomes, const std::vector<double>& times,
                          double d_psi, bool has_cv);

/// Accumulates the u and v moments of one outcome into per-snapshot accumulators.
void accumulate_outcome(const ReplicaOutcome& outcome, const std::vector<double>& times, double d_psi,
                        std::vector<RunningMoments>& u, std::vector<RunningMoments>& v);

/// Row context written next to each snapshot.
struct SeriesContext {
    double gamma = 1.0;
    double beta = 1.0;
    double delta = 0.0;
    std::string cv_source = "none";
    std::uint64_t seed = 0;
    /// Lines written as '#' comments before the header (config, cache hash, ...).
    std::vector<std::string> header_comments;
};

/// CSV with columns time, mean_u, std_u, mean_v, std_v, ci_halfwidth_u,
/// ci_halfwidth_v, J, gamma, beta, delta, d_psi, cv_source, seed.
/// The v columns are left empty when the series has no control variate.
void write_series_csv(std::ostream& os, const EstimatorSeries& series, const SeriesContext& context);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace cvdiff
