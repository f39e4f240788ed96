#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cvdiff/random.hpp"
#include "cvdiff/torus.hpp"

namespace cvdiff {

/// Raised when a trajectory produces a non-finite state (usually dt too large).
class ReplicaDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Covariance of the per-step pair (g, g~): g is the OU-weighted Ito integral
/// over one step, g~ the plain Brownian increment. The 2d x 2d matrix is
/// block diagonal with identical 2x2 blocks
///   [ (1 - e^{-2 gamma dt}) / (2 gamma)   (1 - e^{-gamma dt}) / gamma ]
///   [ (1 - e^{-gamma dt}) / gamma          dt                          ]
class NoisePairCovariance {
public:
    NoisePairCovariance(double gamma, double dt);

    double gamma() const noexcept { return gamma_; }
    double dt() const noexcept { return dt_; }

    /// Entries of one 2x2 block of S.
    double s11() const noexcept { return s11_; }
    double s12() const noexcept { return s12_; }
    double s22() const noexcept { return s22_; }
    double determinant() const noexcept { return det_; }
    double correlation() const noexcept { return s12_ / std::sqrt(s11_ * s22_); }

    /// Entries of the symmetric positive definite square root [[a, b], [b, c]].
    double sqrt11() const noexcept { return r11_; }
    double sqrt12() const noexcept { return r12_; }
    double sqrt22() const noexcept { return r22_; }

    /// e^{-gamma dt}
    double decay() const noexcept { return decay_; }

private:
    double gamma_, dt_;
    double s11_, s12_, s22_, det_;
    double r11_, r12_, r22_;
    double decay_;
};

template <int D>
struct NoisePair {
    std::array<double, D> g{};
    std::array<double, D> g_tilde{};
};

template <int D>
NoisePair<D> make_noise_pair(const NoisePairCovariance& noise, RandomStream& rng) {
    NoisePair<D> out;
    for (int k = 0; k < D; ++k) {
        const double a = rng.normal();
        const double b = rng.normal();
        out.g[k] = noise.sqrt11() * a + noise.sqrt12() * b;
        out.g_tilde[k] = noise.sqrt12() * a + noise.sqrt22() * b;
    }
    return out;
}

/// State of one Langevin replica. q_wrapped lives in [-pi, pi)^D for periodic
/// potentials; q_unwrapped accumulates the winding so displacements are meaningful.
template <int D>
struct ReplicaState {
    std::array<double, D> q_wrapped{};
    std::array<double, D> q_unwrapped{};
    std::array<double, D> p{};
    double I_psi = 0.0;
    double psi_initial = 0.0;
    double t = 0.0;
    // grad V at q_wrapped, reused by the next half kick
    std::array<double, D> force_cache{};
    bool force_valid = false;
};

template <int D>
ReplicaState<D> make_replica_state(const std::array<double, D>& q, const std::array<double, D>& p, bool periodic) {
    ReplicaState<D> s;
    for (int k = 0; k < D; ++k) {
        s.q_wrapped[k] = periodic ? wrap_to_torus(q[k]) : q[k];
        s.q_unwrapped[k] = q[k];
        s.p[k] = p[k];
    }
    return s;
}

namespace detail {
template <int D>
void check_finite(const std::array<double, D>& q, const std::array<double, D>& p, double t) {
    for (int k = 0; k < D; ++k) {
        if (!std::isfinite(q[k]) || !std::isfinite(p[k]))
            throw ReplicaDiverged("non-finite Langevin state at t = " + std::to_string(t) +
                                  " (time step too large for this potential?)");
    }
}
}  // namespace detail

/// One geometric Langevin step (Verlet for the Hamiltonian part, then the exact
/// OU update of the momentum) with a prescribed OU noise g:
///   p <- decay p~ + amplitude g,  decay = e^{-gamma dt}, amplitude = sqrt(2 gamma / beta).
/// `grad(q)` returns grad V at a wrapped position as std::array<double, D>.
template <int D, class Grad>
void gla_step_core(ReplicaState<D>& s, const Grad& grad, bool periodic, double dt, double decay, double amplitude,
                   const std::array<double, D>& g) {
    if (!s.force_valid) {
        s.force_cache = grad(s.q_wrapped);
        s.force_valid = true;
    }
    const double half = 0.5 * dt;
    for (int k = 0; k < D; ++k) {
        s.p[k] -= half * s.force_cache[k];
        const double dq = dt * s.p[k];
        s.q_unwrapped[k] += dq;
        s.q_wrapped[k] = periodic ? wrap_to_torus(s.q_wrapped[k] + dq) : s.q_unwrapped[k];
    }
    s.force_cache = grad(s.q_wrapped);
    for (int k = 0; k < D; ++k) {
        s.p[k] -= half * s.force_cache[k];
        s.p[k] = decay * s.p[k] + amplitude * g[k];
    }
    s.t += dt;
    detail::check_finite<D>(s.q_unwrapped, s.p, s.t);
}

template <int D, class Grad>
void gla_step_with_noise(ReplicaState<D>& s, const Grad& grad, bool periodic, double gamma, double beta, double dt,
                         const std::array<double, D>& g) {
    gla_step_core<D>(s, grad, periodic, dt, std::exp(-gamma * dt), std::sqrt(2.0 * gamma / beta), g);
}

/// GLA step drawing the correlated pair from `noise`; returns the Brownian
/// increment g~ needed by the control-variate Ito sum.
template <int D, class Grad>
std::array<double, D> gla_step(ReplicaState<D>& s, const Grad& grad, bool periodic, double beta,
                               const NoisePairCovariance& noise, RandomStream& rng) {
    const NoisePair<D> pair = make_noise_pair<D>(noise, rng);
    gla_step_with_noise<D>(s, grad, periodic, noise.gamma(), beta, noise.dt(), pair.g);
    return pair.g_tilde;
}

/// Dense 2x2 helper for the GLE drift.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22, a21 * o.a11 + a22 * o.a21,
                a21 * o.a12 + a22 * o.a22};
    }
    static Mat2 identity() { return {1, 0, 0, 1}; }
};

/// e^{M t} for a 2x2 matrix: closed form from the eigenvalues, scaling and
/// squaring of the Taylor series when M is near defective.
Mat2 expm2(const Mat2& m, double t);

/// Drift and one-step noise of the (p, z) Ornstein-Uhlenbeck block of the
/// quasi-Markovian GLE:
///   M = [[0, c], [-c, -1/nu^2]],  c = sqrt(gamma)/nu,  noise (0, sqrt(2/(beta nu^2))) dw.
/// Also holds the joint covariance of (I_n, w_{n+1} - w_n), obtained by
/// Gauss-Legendre quadrature of the Ito isometry integrands.
class GLEDrift {
public:
    GLEDrift(double gamma, double nu, double beta, double dt);
    /// Explicit form: M = [[0, coupling], [-coupling, -damping]], noise amplitude on z.
    static GLEDrift from_coefficients(double coupling, double damping, double amplitude, double dt);

    const Mat2& drift() const noexcept { return m_; }
    const Mat2& exp_drift() const noexcept { return exp_m_dt_; }
    double dt() const noexcept { return dt_; }
    /// Noise amplitude sqrt(2 beta^{-1} / nu^2) multiplying dw in the z equation.
    double amplitude() const noexcept { return amplitude_; }

    /// Joint covariance of (I_n[p], I_n[z], dw), row-major 3x3.
    const std::array<double, 9>& joint_covariance() const noexcept { return cov_; }
    /// Symmetric PSD square root of joint_covariance().
    const std::array<double, 9>& joint_sqrt() const noexcept { return sqrt_cov_; }

private:
    GLEDrift() = default;
    void precompute();

    Mat2 m_{};
    Mat2 exp_m_dt_{};
    double dt_ = 0.0;
    double amplitude_ = 0.0;
    std::array<double, 9> cov_{};
    std::array<double, 9> sqrt_cov_{};
};

struct GleReplicaState {
    double q_wrapped = 0.0;
    double q_unwrapped = 0.0;
    double p = 0.0;
    double z = 0.0;
    double I_psi = 0.0;
    double psi_initial = 0.0;
    double t = 0.0;
    double force_cache = 0.0;
    bool force_valid = false;
};

struct GleNoise {
    double ip = 0.0, iz = 0.0, dw = 0.0;
};

GleNoise make_gle_noise(const GLEDrift& drift, RandomStream& rng);

/// BABO step with a prescribed OU noise: Verlet on (q, p) with z frozen,
/// then (p, z) <- e^{M dt} (p, z) + I_n.
template <class Grad>
void babo_step_with_noise(GleReplicaState& s, const Grad& grad, bool periodic, const GLEDrift& drift,
                          const GleNoise& noise) {
    const double dt = drift.dt();
    if (!s.force_valid) {
        s.force_cache = grad(s.q_wrapped);
        s.force_valid = true;
    }
    s.p -= 0.5 * dt * s.force_cache;
    const double dq = dt * s.p;
    s.q_unwrapped += dq;
    s.q_wrapped = periodic ? wrap_to_torus(s.q_wrapped + dq) : s.q_unwrapped;
    s.force_cache = grad(s.q_wrapped);
    s.p -= 0.5 * dt * s.force_cache;
    const Mat2& e = drift.exp_drift();
    const double p_new = e.a11 * s.p + e.a12 * s.z + noise.ip;
    const double z_new = e.a21 * s.p + e.a22 * s.z + noise.iz;
    s.p = p_new;
    s.z = z_new;
    s.t += dt;
    if (!std::isfinite(s.q_unwrapped) || !std::isfinite(s.p) || !std::isfinite(s.z))
        throw ReplicaDiverged("non-finite GLE state at t = " + std::to_string(s.t));
}

/// Returns the Brownian increment correlated with the OU noise of this step.
template <class Grad>
double babo_step(GleReplicaState& s, const Grad& grad, bool periodic, const GLEDrift& drift, RandomStream& rng) {
    const GleNoise noise = make_gle_noise(drift, rng);
    babo_step_with_noise(s, grad, periodic, drift, noise);
    return noise.dw;
}

}  // namespace cvdiff
