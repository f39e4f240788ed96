#pragma once

#include <utility>
#include <vector>

#include "cvdiff/grid_cv.hpp"
#include "cvdiff/potentials.hpp"

namespace cvdiff {

/// Period integral S_und(E) = int_{-pi}^{pi} sqrt(2 (E - V(q))) dq, periodic
/// trapezoid on `nodes` nodes. Throws std::domain_error for E <= E0.
double s_und(double energy, const Potential1D& potential, int nodes = 2048);

/// phi0(E) = 2 pi int_{E0}^{max(E0, E)} dE' / S_und(E'), with E0 = max V.
///
/// Integrated in s = sqrt(E - E0), where the integrand 2 s * 2 pi / S_und(E0 + s^2)
/// stays bounded, by an adaptive Dormand-Prince scheme. Its dense output is
/// sampled on a uniform s grid and interpolated by monotone cubic Hermite splines.
class UnderdampedProfile {
public:
    static UnderdampedProfile build(const Potential1D& potential, double e_max, double tolerance = 1e-10,
                                    int s_nodes = 2048);

    double e0() const noexcept { return e0_; }
    double e_max() const noexcept { return e_max_; }
    const Potential1D& potential() const noexcept { return potential_; }

    /// phi0 as a function of energy (0 below E0, free-flight extension above E_max).
    double phi(double energy) const;
    /// d phi0 / dE = 2 pi / S_und(E) (0 below E0).
    double phi_prime(double energy) const;
    double s_und_at(double energy) const;

    const std::vector<double>& nodes_s() const noexcept { return s_; }
    const std::vector<double>& nodes_phi() const noexcept { return phi_; }

private:
    Potential1D potential_;
    double e0_ = 0.0;
    double e_max_ = 0.0;
    std::vector<double> v_nodes_;  // V on the S_und quadrature nodes
    std::vector<double> s_, phi_, slope_;
};

/// (phi0, d_p phi0) at (q, p): sign(p) phi0(H), |p| phi0'(H).
std::pair<double, double> eval_phi0(const UnderdampedProfile& profile, double q, double p);

/// Tabulates psi = phi0 / gamma on the grid with source tag "underdamped";
/// d[psi] is filled in by compute_d.
GridCV export_underdamped(const UnderdampedProfile& profile, const GridSpec& spec, double gamma, double beta);

}  // namespace cvdiff
