#include "cvdiff/estimators.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

namespace cvdiff {

double u_of_T(double displacement, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("u(T) needs T > 0");
    return displacement * displacement / (2.0 * T);
}

double v_of_T(double displacement, double xi, double T, double d_psi) {
    if (!(T > 0.0)) throw std::invalid_argument("v(T) needs T > 0");
    return (displacement * displacement - xi * xi) / (2.0 * T) + d_psi;
}

void RunningMoments::add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
}

void RunningMoments::merge(const RunningMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double total = na + nb;
    const double delta = o.mean - mean;
    mean += delta * nb / total;
    m2 += o.m2 + delta * delta * na * nb / total;
    n += o.n;
}

double RunningMoments::variance() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }

void accumulate_outcome(const ReplicaOutcome& outcome, const std::vector<double>& times, double d_psi,
                        std::vector<RunningMoments>& u, std::vector<RunningMoments>& v) {
    if (outcome.diverged) return;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double disp = outcome.displacement[k];
        const double xi = outcome.xi.empty() ? 0.0 : outcome.xi[k];
        u[k].add(u_of_T(disp, times[k]));
        v[k].add(v_of_T(disp, xi, times[k], d_psi));
    }
}

EstimatorSeries EstimatorSeries::from_moments(const std::vector<double>& times, const std::vector<RunningMoments>& u,
                                              const std::vector<RunningMoments>& v, double d_psi, bool has_cv) {
    EstimatorSeries s;
    s.times = times;
    s.d_psi = d_psi;
    s.has_cv = has_cv;
    s.J = times.empty() ? 0 : u.front().n;
    if (s.J < 2) throw std::invalid_argument("estimator statistics need at least two replicas");
    const double root_j = std::sqrt(static_cast<double>(s.J));
    for (std::size_t k = 0; k < times.size(); ++k) {
        s.mean_u.push_back(u[k].mean);
        s.std_u.push_back(u[k].stddev());
        s.mean_v.push_back(v[k].mean);
        s.std_v.push_back(v[k].stddev());
        s.ci_u.push_back(s.ci_multiplier * s.std_u.back() / root_j);
        s.ci_v.push_back(s.ci_multiplier * s.std_v.back() / root_j);
    }
    return s;
}

EstimatorSeries aggregate(const std::vector<ReplicaOutcome>& outcomes, const std::vector<double>& times,
                          double d_psi, bool has_cv) {
    std::vector<RunningMoments> u(times.size()), v(times.size());
    for (const ReplicaOutcome& o : outcomes) {
        if (!o.diverged && o.displacement.size() != times.size())
            throw std::invalid_argument("outcome snapshot count does not match the time grid");
        accumulate_outcome(o, times, d_psi, u, v);
    }
    if (times.empty() || u.front().n < 2) throw std::invalid_argument("aggregate needs J >= 2 replicas");
    return EstimatorSeries::from_moments(times, u, v, d_psi, has_cv);
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_series_csv(std::ostream& os, const EstimatorSeries& s, const SeriesContext& ctx) {
    for (const std::string& line : ctx.header_comments) os << "# " << line << '\n';
    os << "time,mean_u,std_u,mean_v,std_v,ci_halfwidth_u,ci_halfwidth_v,J,gamma,beta,delta,d_psi,cv_source,seed\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        os << format_double(s.times[k]) << ',' << format_double(s.mean_u[k]) << ',' << format_double(s.std_u[k]) << ',';
        if (s.has_cv)
            os << format_double(s.mean_v[k]) << ',' << format_double(s.std_v[k]) << ',';
        else
            os << ",,";
        os << format_double(s.ci_u[k]) << ',';
        if (s.has_cv) os << format_double(s.ci_v[k]);
        os << ',' << s.J << ',' << format_double(ctx.gamma) << ',' << format_double(ctx.beta) << ','
           << format_double(ctx.delta) << ',' << format_double(s.d_psi) << ',' << ctx.cv_source << ',' << ctx.seed
           << '\n';
    }
}

}  // namespace cvdiff
