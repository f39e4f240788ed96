#include "cvdiff/underdamped_cv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "cvdiff/quadrature.hpp"
#include "cvdiff/torus.hpp"

namespace cvdiff {

namespace {

double period_integral(double energy, const std::vector<double>& v) {
    double acc = 0.0;
    for (double vq : v) acc += std::sqrt(2.0 * std::max(energy - vq, 0.0));
    return acc * kTwoPi / static_cast<double>(v.size());
}

std::vector<double> potential_on_nodes(const Potential1D& potential, int nodes) {
    const QuadratureRule rule = periodic_trapezoid(nodes);
    std::vector<double> v(rule.nodes.size());
    for (std::size_t m = 0; m < v.size(); ++m) v[m] = potential.eval(rule.nodes[m]);
    return v;
}

constexpr int kProfileSamples = 1024;

}  // namespace

double s_und(double energy, const Potential1D& potential, int nodes) {
    if (!potential.periodic()) throw std::invalid_argument("S_und needs a periodic potential");
    if (!(energy > potential.max_value()))
        throw std::domain_error("S_und(E) requires E > E0 = " + std::to_string(potential.max_value()));
    return period_integral(energy, potential_on_nodes(potential, nodes));
}

UnderdampedProfile UnderdampedProfile::build(const Potential1D& potential, double e_max, double tolerance,
                                             int s_nodes) {
    if (!potential.periodic()) throw std::invalid_argument("underdamped profile needs a periodic potential");
    UnderdampedProfile prof;
    prof.potential_ = potential;
    prof.e0_ = potential.max_value();
    if (!(e_max > prof.e0_)) throw std::invalid_argument("E_max must exceed E0");
    prof.e_max_ = e_max;
    prof.v_nodes_ = potential_on_nodes(potential, s_nodes);

    const double e0 = prof.e0_;
    const auto& v = prof.v_nodes_;
    auto slope = [&](double s) {
        if (s == 0.0) {
            // limit of 2 s * 2 pi / S_und(E0 + s^2); nonzero only if S_und(E0) = 0
            const double s0 = period_integral(e0, v);
            return s0 > 0.0 ? 0.0 : 2.0 * kTwoPi / (kTwoPi * std::sqrt(2.0));
        }
        return 2.0 * s * kTwoPi / period_integral(e0 + s * s, v);
    };

    namespace ode = boost::numeric::odeint;
    using State = double;
    auto stepper = ode::make_dense_output(tolerance, tolerance, ode::runge_kutta_dopri5<State>());
    State phi = 0.0;
    const double s_end = std::sqrt(e_max - e0);
    auto rhs = [&](const State&, State& dxds, double s) { dxds = slope(s); };
    auto observe = [&](const State& x, double s) {
        prof.s_.push_back(s);
        prof.phi_.push_back(x);
        prof.slope_.push_back(slope(s));
    };
    // the adaptive steps stay coarse; the dense output is sampled on a uniform s grid
    std::vector<double> samples(kProfileSamples + 1);
    for (int k = 0; k <= kProfileSamples; ++k) samples[k] = s_end * k / kProfileSamples;
    samples.back() = s_end;
    ode::integrate_times(stepper, rhs, phi, samples.begin(), samples.end(), s_end / 64.0, observe);
    if (prof.s_.size() != samples.size()) throw std::runtime_error("underdamped profile integration did not reach E_max");

    // Fritsch-Carlson limiter keeps the interpolant monotone
    const std::size_t n = prof.s_.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = prof.s_[k + 1] - prof.s_[k];
        const double delta = (prof.phi_[k + 1] - prof.phi_[k]) / h;
        if (delta <= 0.0) {
            prof.slope_[k] = prof.slope_[k + 1] = 0.0;
            continue;
        }
        const double a = prof.slope_[k] / delta, b = prof.slope_[k + 1] / delta;
        const double r = a * a + b * b;
        if (r > 9.0) {
            const double tau = 3.0 / std::sqrt(r);
            prof.slope_[k] = tau * a * delta;
            prof.slope_[k + 1] = tau * b * delta;
        }
    }
    return prof;
}

double UnderdampedProfile::s_und_at(double energy) const {
    if (!(energy > e0_)) throw std::domain_error("S_und(E) requires E > E0");
    return period_integral(energy, v_nodes_);
}

double UnderdampedProfile::phi(double energy) const {
    if (!(energy > e0_)) return 0.0;
    if (energy >= e_max_) return phi_.back() + std::sqrt(2.0 * energy) - std::sqrt(2.0 * e_max_);
    const double s = std::sqrt(energy - e0_);
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = static_cast<std::size_t>(std::distance(s_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, s_.size() - 1) - 1;
    const double h = s_[k + 1] - s_[k];
    const double t = (s - s_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * phi_[k] + (t3 - 2 * t2 + t) * h * slope_[k] + (-2 * t3 + 3 * t2) * phi_[k + 1] +
           (t3 - t2) * h * slope_[k + 1];
}

double UnderdampedProfile::phi_prime(double energy) const {
    if (!(energy > e0_)) return 0.0;
    if (energy >= e_max_) return 1.0 / std::sqrt(2.0 * energy);
    return kTwoPi / period_integral(energy, v_nodes_);
}

std::pair<double, double> eval_phi0(const UnderdampedProfile& profile, double q, double p) {
    const double h = profile.potential().eval(q) + 0.5 * p * p;
    if (!(h > profile.e0())) return {0.0, 0.0};
    const double sign = p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
    return {sign * profile.phi(h), std::abs(p) * profile.phi_prime(h)};
}

GridCV export_underdamped(const UnderdampedProfile& profile, const GridSpec& spec, double gamma, double beta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("underdamped control variate needs gamma > 0");
    GridMetadata meta{beta, gamma, profile.potential().name(), "underdamped"};
    GridCV grid = GridCV::tabulate(spec, std::move(meta), [&](double q, double p) {
        const auto [phi, dphi] = eval_phi0(profile, q, p);
        return std::pair<double, double>{phi / gamma, dphi / gamma};
    });
    grid.set_d_psi(compute_d(grid, profile.potential(), gamma, beta));
    return grid;
}

}  // namespace cvdiff
