#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "cvdiff/quadrature.hpp"
#include "cvdiff/spectral_poisson.hpp"
#include "cvdiff/torus.hpp"

using namespace cvdiff;

namespace {

SpectralBasis basis(int n, double sigma, double gamma, double beta = 1.0) {
    SpectralBasis b;
    b.modes = n;
    b.sigma = sigma;
    b.gamma = gamma;
    b.beta = beta;
    return b;
}

}  // namespace

TEST_CASE("Hermite functions are orthonormal") {
    const int n = 40;
    const QuadratureRule r = gauss_hermite_flat(n + 8);
    std::vector<double> psi(n);
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t m = 0; m < r.nodes.size(); ++m) {
        hermite_functions(r.nodes[m], n, psi.data());
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) gram[a * n + b] += r.weights[m] * psi[a] * psi[b];
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) CHECK(std::abs(gram[a * n + b] - (a == b ? 1.0 : 0.0)) <= 1e-10);
}

TEST_CASE("Gauss-Legendre and trapezoid rules") {
    const QuadratureRule g = gauss_legendre(10, 0.0, 2.0);
    double s = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 19);
    CHECK(s == doctest::Approx(std::pow(2.0, 20) / 20).epsilon(1e-13));
    const QuadratureRule t = periodic_trapezoid(64);
    double c = 0;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) c += t.weights[i] * std::exp(std::cos(t.nodes[i]));
    CHECK(c == doctest::Approx(kTwoPi * std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("basis functions are orthonormal in L2(mu)") {
    // e_{ij} e_{kl} dmu = g_i g_k h_j h_l dq dp, so the q and p factors are checked separately
    const SpectralBasis b = basis(8, 0.6, 1.0, 2.0);
    const int nq = 256, np = 4000;
    const double lp = 14.0, hp = 2 * lp / np;
    double gq[9][9] = {}, hpp[9][9] = {};
    for (int i = 0; i < nq; ++i) {
        const double q = -kPi + kTwoPi * i / nq;
        for (int a = 0; a <= 8; ++a)
            for (int c = 0; c <= 8; ++c)
                gq[a][c] += kTwoPi / nq * SpectralBasis::trig(a, q) * SpectralBasis::trig(c, q);
    }
    std::vector<double> h(9);
    for (int m = 0; m <= np; ++m) {
        b.hermite(-lp + m * hp, 9, h.data());
        for (int a = 0; a <= 8; ++a)
            for (int c = 0; c <= 8; ++c) hpp[a][c] += hp * h[a] * h[c];
    }
    for (int i = 0; i <= 8; ++i)
        for (int k = 0; k <= 8; ++k) {
            CHECK(std::abs(gq[i][k] - (i == k ? 1.0 : 0.0)) <= 1e-12);
            CHECK(std::abs(hpp[i][k] - (i == k ? 1.0 : 0.0)) <= 1e-10);
        }
}

TEST_CASE("generator blocks for V = 0") {
    const SpectralBasis b = basis(12, 1.0, 1.0);
    const GeneratorBlocks g = generator_blocks(b, Potential1D(PotentialKind::zero));
    for (int j = 0; j <= 12; ++j)
        for (int l = 0; l <= 12; ++l) CHECK(std::abs(g.fd(l, j) - (l == j ? -static_cast<double>(j) : 0.0)) <= 1e-10);
    CHECK(g.vq.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("A maps p / gamma to p when V = 0") {
    for (double gamma : {1.0, 2.0}) {
        const SpectralBasis b = basis(10, 1.0, gamma);
        const auto a = assemble_generator_matrix(b, Potential1D(PotentialKind::zero));
        const ProjectionCoefficients proj = projection_coefficients(b, Potential1D(PotentialKind::zero));
        // p = sigma e_{0,1}
        CHECK(proj.momentum[b.index(0, 1)] == doctest::Approx(1.0).epsilon(1e-10));
        Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
        x[b.index(0, 1)] = 1.0 / gamma;
        CHECK((a * x - proj.momentum).norm() <= 1e-10);
    }
}

TEST_CASE("Hamiltonian part is skew-symmetric") {
    const SpectralBasis b = basis(16, 0.7, 0.0);
    const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_generator_matrix(b, Potential1D(PotentialKind::cosine)));
    CHECK((a + a.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(a.cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("saddle solve for V = 0 reproduces p / gamma") {
    for (double gamma : {1.0, 2.0}) {
        const SpectralSolution s = solve_poisson(basis(20, 1.0, gamma), Potential1D(PotentialKind::zero));
        CHECK(diffusion_from_spectral(s) == doctest::Approx(1.0 / gamma).epsilon(1e-12));
        CHECK(std::abs(s.alpha) <= 1e-10);
        for (int i = 0; i <= 20; ++i)
            for (int j = 0; j <= 20; ++j) {
                const double expected = (i == 0 && j == 1) ? 1.0 / gamma : 0.0;
                CHECK(std::abs(s.coeffs(i, j) - expected) <= 1e-8);
            }
    }
}

TEST_CASE("cosine potential: convergence and constraints") {
    const Potential1D v(PotentialKind::cosine);
    const SpectralSolution s30 = solve_poisson(spectral_preset("desk", 1.0, 1.0), v);
    SpectralBasis b30 = spectral_preset("desk", 1.0, 1.0);
    b30.modes = 30;
    const SpectralSolution s_small = solve_poisson(b30, v);
    const double d60 = diffusion_from_spectral(s30), d30 = diffusion_from_spectral(s_small);
    CHECK(std::abs(d60 - d30) <= 5e-4 * d60);
    // both lines of the saddle system
    CHECK(s30.residual_norm <= 1e-8 * s30.rhs_norm);
    double constraint = 0;
    for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 60; ++j) constraint += s30.coeffs(i, j) * s30.unit_constant[s30.basis.index(i, j)];
    CHECK(std::abs(constraint) <= 1e-12);
    CHECK(s30.condition_estimate > 1.0);
    CHECK(s30.condition_estimate < 1e12);

    const SpectralSolution krylov = solve_poisson(spectral_preset("desk", 1.0, 1.0), v, SaddleSolver::krylov);
    CHECK(diffusion_from_spectral(krylov) == doctest::Approx(d60).epsilon(1e-8));
}

TEST_CASE("diffusion is nonnegative and self-converges monotonically") {
    const Potential1D v(PotentialKind::cosine);
    for (double gamma : {0.1, 0.5, 1.0, 5.0})
        for (double beta : {0.5, 1.0, 3.0}) {
            const SpectralSolution s = solve_poisson(basis(30, 1.0 / std::sqrt(beta), gamma, beta), v);
            CHECK(diffusion_from_spectral(s) >= 0.0);
        }
    for (double gamma : {0.1, 1.0}) {
        double prev = 1e300;
        for (int n : {4, 8, 16}) {
            const double a = diffusion_from_spectral(solve_poisson(basis(n, 1.0, gamma), v));
            const double b = diffusion_from_spectral(solve_poisson(basis(2 * n, 1.0, gamma), v));
            const double diff = std::abs(b - a);
            CHECK(diff < prev);
            prev = diff;
        }
    }
}

TEST_CASE("export to grid") {
    const Potential1D v(PotentialKind::cosine);
    const SpectralSolution s = solve_poisson(basis(24, 1.0, 1.0), v);
    const GridSpec spec{16, 24, 6.0};
    const GridCV g = export_to_grid(s, spec);
    CHECK(g.metadata().source == "galerkin");
    for (int i = 0; i < spec.nq; i += 3)
        for (int j = 0; j <= spec.np; j += 5) {
            CHECK(std::abs(g.psi_at(i, j) - s.evaluate(spec.q_node(i), spec.p_node(j))) <= 1e-10);
            CHECK(std::abs(g.dpsi_at(i, j) - s.evaluate_dp(spec.q_node(i), spec.p_node(j))) <= 1e-10);
        }
    // the analytic derivative agrees with differences of the expansion
    const double h = 1e-5;
    for (double q : {-2.0, 0.3, 1.9})
        for (double p : {-2.5, 0.1, 1.4})
            CHECK(s.evaluate_dp(q, p) ==
                  doctest::Approx((s.evaluate(q, p + h) - s.evaluate(q, p - h)) / (2 * h)).epsilon(1e-6));

    // V = 0: Psi = p, d_p Psi = 1
    const SpectralSolution z = solve_poisson(basis(10, 1.0, 1.0), Potential1D(PotentialKind::zero));
    const GridCV gz = export_to_grid(z, GridSpec{32, 48, 9.0});
    for (double d : gz.values_dpsi()) CHECK(std::abs(d - 1.0) <= 1e-8);
    for (double q : {-3.0, -0.77, 0.5, 2.9})
        for (double p : {-4.3, -0.01, 0.66, 3.3}) CHECK(std::abs(gz.interpolate_psi(q, p) - p) <= 1e-8);
    CHECK(gz.d_psi() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid interpolation of the Galerkin solution converges at second order") {
    const SpectralSolution s = solve_poisson(basis(30, 1.0, 1.0), Potential1D(PotentialKind::cosine));
    double errors[3];
    int k = 0;
    for (int scale : {1, 2, 4}) {
        const GridSpec spec{16 * scale, 24 * scale, 6.0};
        const GridCV g = export_to_grid(s, spec);
        double worst = 0;
        // cell centers, where the bilinear error is largest
        for (int i = 0; i < spec.nq; ++i)
            for (int j = spec.np / 4; j < 3 * spec.np / 4; ++j) {
                const double q = spec.q_node(i) + 0.5 * spec.dq();
                const double p = spec.p_node(j) + 0.5 * spec.dp();
                worst = std::max(worst, std::abs(g.interpolate_psi(q, p) - s.evaluate(q, p)));
            }
        errors[k++] = worst;
    }
    CHECK(std::log2(errors[0] / errors[1]) >= 1.9);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.9);
}

TEST_CASE("presets and validation") {
    const SpectralBasis d = spectral_preset("desk", 4.0, 1.0);
    CHECK(d.modes == 60);
    CHECK(d.sigma == doctest::Approx(0.5));
    const SpectralBasis t = spectral_preset("reference", 4.0, 1.0);
    CHECK(t.modes == 300);
    CHECK(t.sigma == doctest::Approx(0.05));
    CHECK_THROWS_AS(spectral_preset("nope", 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_poisson(basis(5, 1.0, 1.0), Potential1D(PotentialKind::quadratic)), std::invalid_argument);
}
