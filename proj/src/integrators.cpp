#include "cvdiff/integrators.hpp"

#include <Eigen/Eigenvalues>

#include "cvdiff/quadrature.hpp"

namespace cvdiff {

namespace {

// x (1 - e^{-2x}) / 2 - (1 - e^{-x})^2, which cancels to O(x^4) for small x.
double pair_determinant_kernel(double x) {
    if (x < 0.1) {
        constexpr double c[] = {1.0 / 12, -1.0 / 12, 17.0 / 360, -7.0 / 360, 43.0 / 6720, -107.0 / 60480,
                                769.0 / 1814400, -163.0 / 1814400};
        double acc = 0.0;
        for (int k = 7; k >= 0; --k) acc = acc * x + c[k];
        return acc * x * x * x * x;
    }
    const double a = -std::expm1(-2.0 * x);
    const double b = -std::expm1(-x);
    return 0.5 * x * a - b * b;
}

}  // namespace

NoisePairCovariance::NoisePairCovariance(double gamma, double dt) : gamma_(gamma), dt_(dt) {
    if (!(gamma > 0.0) || !(dt > 0.0)) throw std::invalid_argument("noise pair needs gamma > 0 and dt > 0");
    const double x = gamma * dt;
    s11_ = -std::expm1(-2.0 * x) / (2.0 * gamma);
    s12_ = -std::expm1(-x) / gamma;
    s22_ = dt;
    det_ = pair_determinant_kernel(x) / (gamma * gamma);
    // sqrt of a 2x2 SPD matrix: (S + sqrt(det) I) / sqrt(tr S + 2 sqrt(det))
    const double s = std::sqrt(det_);
    const double t = std::sqrt(s11_ + s22_ + 2.0 * s);
    r11_ = (s11_ + s) / t;
    r12_ = s12_ / t;
    r22_ = (s22_ + s) / t;
    decay_ = std::exp(-x);
}

Mat2 expm2(const Mat2& m, double t) {
    const double half_trace = 0.5 * (m.a11 + m.a22);
    const double det = m.a11 * m.a22 - m.a12 * m.a21;
    const double disc = half_trace * half_trace - det;
    if (std::abs(disc) < 1e-12) {
        // scaling and squaring with a 16-term Taylor series
        double norm = std::abs(m.a11) + std::abs(m.a12) + std::abs(m.a21) + std::abs(m.a22);
        int squarings = 0;
        double scale = t;
        while (norm * std::abs(scale) > 0.5) {
            scale *= 0.5;
            ++squarings;
        }
        const Mat2 a{m.a11 * scale, m.a12 * scale, m.a21 * scale, m.a22 * scale};
        Mat2 term = Mat2::identity();
        Mat2 sum = Mat2::identity();
        for (int k = 1; k <= 16; ++k) {
            term = term * a;
            const double inv = 1.0 / k;
            term = {term.a11 * inv, term.a12 * inv, term.a21 * inv, term.a22 * inv};
            sum = {sum.a11 + term.a11, sum.a12 + term.a12, sum.a21 + term.a21, sum.a22 + term.a22};
        }
        for (int k = 0; k < squarings; ++k) sum = sum * sum;
        return sum;
    }
    double c, s;  // e^{M t} = e^{tr t/2} (c I + s (M - tr/2 I))
    if (disc > 0.0) {
        const double w = std::sqrt(disc);
        c = std::cosh(w * t);
        s = std::sinh(w * t) / w;
    } else {
        const double w = std::sqrt(-disc);
        c = std::cos(w * t);
        s = std::sin(w * t) / w;
    }
    const double f = std::exp(half_trace * t);
    return {f * (c + s * (m.a11 - half_trace)), f * s * m.a12, f * s * m.a21, f * (c + s * (m.a22 - half_trace))};
}

GLEDrift::GLEDrift(double gamma, double nu, double beta, double dt) {
    if (!(gamma >= 0.0) || !(nu > 0.0) || !(beta > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("GLE drift needs gamma >= 0, nu > 0, beta > 0, dt > 0");
    const double coupling = std::sqrt(gamma) / nu;
    m_ = {0.0, coupling, -coupling, -1.0 / (nu * nu)};
    dt_ = dt;
    amplitude_ = std::sqrt(2.0 / (beta * nu * nu));
    precompute();
}

GLEDrift GLEDrift::from_coefficients(double coupling, double damping, double amplitude, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("GLE drift needs dt > 0");
    GLEDrift d;
    d.m_ = {0.0, coupling, -coupling, -damping};
    d.dt_ = dt;
    d.amplitude_ = amplitude;
    d.precompute();
    return d;
}

void GLEDrift::precompute() {
    exp_m_dt_ = expm2(m_, dt_);
    // I_n = int_0^dt e^{M u} (0, amplitude) dw, u = dt - s.
    //   Cov(I_n)        = int_0^dt e^{Mu} c c^T e^{M^T u} du
    //   Cov(I_n, dw)    = int_0^dt e^{Mu} c du
    const QuadratureRule rule = gauss_legendre(51, 0.0, dt_);
    double cpp = 0, cpz = 0, czz = 0, xp = 0, xz = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const Mat2 e = expm2(m_, rule.nodes[k]);
        const double vp = e.a12 * amplitude_;
        const double vz = e.a22 * amplitude_;
        const double w = rule.weights[k];
        cpp += w * vp * vp;
        cpz += w * vp * vz;
        czz += w * vz * vz;
        xp += w * vp;
        xz += w * vz;
    }
    cov_ = {cpp, cpz, xp, cpz, czz, xz, xp, xz, dt_};
    Eigen::Matrix3d c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c(i, j) = cov_[3 * i + j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(c);
    const Eigen::Vector3d ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix3d r = solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().transpose();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sqrt_cov_[3 * i + j] = r(i, j);
}

GleNoise make_gle_noise(const GLEDrift& drift, RandomStream& rng) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    const auto& r = drift.joint_sqrt();
    return {r[0] * a + r[1] * b + r[2] * c, r[3] * a + r[4] * b + r[5] * c, r[6] * a + r[7] * b + r[8] * c};
}

}  // namespace cvdiff
