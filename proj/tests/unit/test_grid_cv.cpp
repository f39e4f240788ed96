#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <memory>

#include "cvdiff/grid_cv.hpp"
#include "cvdiff/torus.hpp"

using namespace cvdiff;

namespace {

GridMetadata meta(const char* source = "galerkin") {
    return GridMetadata{1.0, 1.0, "cosine", source};
}

GridCV smooth_grid(const GridSpec& spec) {
    return GridCV::tabulate(spec, meta(), [](double q, double p) {
        return std::pair{std::sin(q) * std::exp(-p * p / 4) + p, std::sin(q) * (-p / 2) * std::exp(-p * p / 4) + 1.0};
    });
}

}  // namespace

TEST_CASE("interpolant reproduces node values") {
    const GridSpec spec{12, 16, 4.0};
    const GridCV g = smooth_grid(spec);
    for (int i = 0; i < spec.nq; ++i)
        for (int j = 0; j <= spec.np; ++j) {
            const auto s = g.interpolate(spec.q_node(i), spec.p_node(j));
            CHECK(s.psi == g.psi_at(i, j));
            CHECK(s.dpsi == g.dpsi_at(i, j));
        }
}

TEST_CASE("bilinear exactness") {
    const GridSpec spec{10, 8, 3.0};
    const GridCV affine = GridCV::tabulate(spec, meta(), [](double, double p) { return std::pair{2.0 + 3.0 * p, 3.0}; });
    for (double q : {-3.0, -1.1, 0.05, 2.2})
        for (double p : {-2.9, -0.4, 0.3, 1.87}) CHECK(affine.interpolate_psi(q, p) == doctest::Approx(2.0 + 3.0 * p).epsilon(1e-14));

    // q p on the cell [0, dq] x [0, dp]: nodes (i0, j0) .. (i0 + 1, j0 + 1)
    const int i0 = spec.nq / 2, j0 = spec.np / 2;
    std::vector<double> psi(static_cast<std::size_t>(spec.nq) * (spec.np + 1), 0.0), dpsi(psi.size(), 0.0);
    psi[static_cast<std::size_t>(i0 + 1) * (spec.np + 1) + j0 + 1] = spec.dq() * spec.dp();
    const GridCV cell(spec, meta(), psi, dpsi);
    CHECK(cell.interpolate_psi(spec.dq() / 2, spec.dp() / 2) ==
          doctest::Approx(spec.dq() / 2 * spec.dp() / 2).epsilon(1e-14));
}

TEST_CASE("periodic seam and clamping") {
    const GridCV g = smooth_grid(GridSpec{32, 32, 5.0});
    double prev = 1e300;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-6, 1e-10}) {
        const double jump = std::abs(g.interpolate_psi(kPi - eps, 0.7) - g.interpolate_psi(-kPi + eps, 0.7));
        CHECK(jump < prev);
        prev = jump;
    }
    CHECK(prev <= 1e-8);
    CHECK(g.interpolate_psi(kPi, 0.7) == g.interpolate_psi(-kPi, 0.7));
    CHECK(g.interpolate_psi(0.3 + 4 * kPi, 0.7) == doctest::Approx(g.interpolate_psi(0.3, 0.7)).epsilon(1e-12));
    CHECK(g.interpolate_psi(0.3, 50.0) == g.interpolate_psi(0.3, 5.0));
    CHECK(g.interpolate_psi(0.3, -50.0) == g.interpolate_psi(0.3, -5.0));
    CHECK(std::isfinite(g.interpolate_dpsi(0.3, 1e300)));
}

TEST_CASE("compute_d examples") {
    const GridSpec spec{128, 192, 9.0};
    const double gamma = 0.5, beta = 1.0;
    const GridCV lin = GridCV::tabulate(spec, meta(), [&](double, double p) { return std::pair{p / gamma, 1.0 / gamma}; });
    for (auto kind : {PotentialKind::zero, PotentialKind::cosine, PotentialKind::pendulum})
        CHECK(compute_d(lin, Potential1D(kind), gamma, beta) == doctest::Approx(2.0).epsilon(1e-6));
    const GridCV zero = GridCV::tabulate(spec, meta(), [](double, double) { return std::pair{0.0, 0.0}; });
    CHECK(compute_d(zero, Potential1D(PotentialKind::cosine), 1.0, 1.0) == 0.0);
    // V = 0, psi = phi = p / gamma: d = 1 / (gamma beta)
    for (double g : {0.5, 1.0, 2.0}) {
        const GridCV phi = GridCV::tabulate(spec, meta(), [&](double, double p) { return std::pair{p / g, 1.0 / g}; });
        CHECK(compute_d(phi, Potential1D(PotentialKind::zero), g, 2.0) == doctest::Approx(1.0 / (2.0 * g)).epsilon(1e-6));
    }
}

TEST_CASE("compute_d matches a direct quadrature and is refinement invariant") {
    // psi depends on q and p: d = gamma / beta * E_mu[(d_p psi)^2]
    const double beta = 1.0, gamma = 1.0;
    const Potential1D v(PotentialKind::cosine);
    auto f = [](double q, double p) {
        return std::pair{std::sin(q) * p * p + p, 2.0 * std::sin(q) * p + 1.0};
    };
    // E[(2 sin q p + 1)^2] = 4 E[sin^2 q] E[p^2] + 1, E[p^2] = 1 / beta
    double num = 0, den = 0;
    for (int m = 0; m < 100000; ++m) {
        const double q = -kPi + kTwoPi * m / 100000;
        const double w = std::exp(-beta * v.eval(q));
        num += w * std::sin(q) * std::sin(q);
        den += w;
    }
    const double oracle = gamma / beta * (4.0 * num / den / beta + 1.0);
    const double d256 = compute_d(GridCV::tabulate(GridSpec{256, 256, 9.0}, meta(), f), v, gamma, beta);
    const double d512 = compute_d(GridCV::tabulate(GridSpec{512, 512, 9.0}, meta(), f), v, gamma, beta);
    CHECK(d256 == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(std::abs(d512 - d256) <= 1e-4 * d256);
    CHECK(d256 >= 0.0);
}

TEST_CASE("interpolation error decreases at second order") {
    auto exact = [](double q, double p) { return std::sin(q) * std::exp(-p * p / 4) + p; };
    double errors[3];
    int k = 0;
    for (int scale : {1, 2, 4}) {
        const GridCV g = smooth_grid(GridSpec{16 * scale, 16 * scale, 4.0});
        double worst = 0;
        const GridSpec& sp = g.spec();
        for (int i = 0; i < sp.nq; ++i)
            for (int j = 0; j < sp.np; ++j) {
                const double q = sp.q_node(i) + 0.5 * sp.dq(), p = sp.p_node(j) + 0.5 * sp.dp();
                worst = std::max(worst, std::abs(g.interpolate_psi(q, p) - exact(q, p)));
            }
        errors[k++] = worst;
    }
    CHECK(std::log2(errors[0] / errors[1]) >= 1.9);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.9);
}

TEST_CASE("tensorized control variate") {
    const GridSpec spec{128, 192, 9.0};
    const double gamma = 0.7, beta = 1.0;
    auto grid = std::make_shared<const GridCV>(GridCV::tabulate(spec, meta(), [](double q, double p) {
        return std::pair{std::cos(q) * p + p, std::cos(q) + 1.0};
    }));
    const Potential1D cosine(PotentialKind::cosine);
    const double d1 = compute_d(*grid, cosine, gamma, beta);
    const TensorizedGridCV t0(grid, Potential2D(cosine, 0.0), 0, gamma, beta);
    CHECK(t0.d_psi() == doctest::Approx(d1).epsilon(1e-8));
    const TensorizedGridCV t1(grid, Potential2D(cosine, 0.0), 1, gamma, beta);
    CHECK(t1.d_psi() == doctest::Approx(d1).epsilon(1e-8));

    const std::array<double, 2> q{0.4, -1.0}, p{1.3, 0.2};
    CHECK(t0.value(q, p) == t0.value({0.4, 2.5}, {1.3, -3.0}));
    CHECK(t0.grad_p(q, p)[1] == 0.0);
    CHECK(t1.grad_p(q, p)[0] == 0.0);
    CHECK(t1.value(q, p) == grid->interpolate_psi(-1.0, 0.2));

    // delta = 0.25 against a 256^2 position quadrature of the 2D measure
    const Potential2D v2(cosine, 0.25);
    const int n = 256;
    const TensorizedGridCV tq(grid, v2, 0, gamma, beta, n);
    const auto& sp = grid->spec();
    double pw = 0, pnum_sum = 0;
    std::vector<double> mp(n);
    // momentum average of (d_p psi)^2 at each q1, trapezoid in p with Gaussian weight
    for (int a = 0; a < n; ++a) {
        const double q1 = -kPi + kTwoPi * a / n;
        double s = 0, w = 0;
        for (int j = 0; j <= sp.np; ++j) {
            const double pj = sp.p_node(j);
            const double wj = (j == 0 || j == sp.np ? 0.5 : 1.0) * std::exp(-beta * pj * pj / 2);
            const double dp = grid->interpolate_dpsi(q1, pj);
            s += wj * dp * dp;
            w += wj;
        }
        mp[a] = s / w;
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double w = std::exp(-beta * v2.eval(-kPi + kTwoPi * a / n, -kPi + kTwoPi * b / n));
            pnum_sum += w * mp[a];
            pw += w;
        }
    const double oracle = gamma / beta * pnum_sum / pw;
    CHECK(tq.d_psi() == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(TensorizedGridCV(grid, v2, 0, gamma, beta).d_psi() == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(std::abs(tq.d_psi() - d1) > 1e-3);
}

TEST_CASE("binary cache round trip") {
    GridCV g = smooth_grid(GridSpec{8, 6, 3.0});
    g.set_d_psi(0.123);
    const auto path = std::filesystem::temp_directory_path() / "cvdiff_test_grid.bin";
    g.save(path);
    const GridCV h = GridCV::load(path);
    std::filesystem::remove(path);
    CHECK(h.spec().nq == 8);
    CHECK(h.spec().np == 6);
    CHECK(h.spec().lp == 3.0);
    CHECK(h.metadata().source == "galerkin");
    CHECK(h.metadata().potential == "cosine");
    CHECK(h.d_psi() == 0.123);
    CHECK(h.values_psi() == g.values_psi());
    CHECK(h.values_dpsi() == g.values_dpsi());
    CHECK(h.serialize() == g.serialize());
    CHECK_THROWS(GridCV::deserialize("garbage"));
}

TEST_CASE("GLE grid interpolation and d") {
    const GleGridSpec spec{16, 12, 12, 6.0, 6.0};
    const GleGridCV g = GleGridCV::tabulate(spec, GleGridMetadata{}, [](double, double p, double z) {
        return std::pair{1.0 + 2.0 * p - 0.5 * z, -0.5};
    });
    for (double z : {-5.5, -0.3, 2.1}) {
        const auto s = g.interpolate(0.7, 0.9, z);
        CHECK(s.psi == doctest::Approx(1.0 + 1.8 - 0.5 * z).epsilon(1e-13));
        CHECK(s.dzpsi == doctest::Approx(-0.5).epsilon(1e-13));
    }
    // constant d_z psi = c: d = c^2 / (beta nu^2)
    CHECK(compute_d_gle(g, Potential1D(PotentialKind::cosine), 2.0, 1.0) == doctest::Approx(0.25 / 4.0).epsilon(1e-6));
    const auto path = std::filesystem::temp_directory_path() / "cvdiff_test_gle.bin";
    g.save(path);
    const GleGridCV h = GleGridCV::load(path);
    std::filesystem::remove(path);
    CHECK(h.serialize() == g.serialize());
}
