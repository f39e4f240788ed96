#include "cvdiff/spectral_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "cvdiff/quadrature.hpp"
#include "cvdiff/torus.hpp"

namespace cvdiff {

void SpectralBasis::validate() const {
    if (modes < 1) throw std::invalid_argument("spectral basis needs N >= 1");
    if (!(sigma > 0.0) || !(beta > 0.0) || !(gamma >= 0.0))
        throw std::invalid_argument("spectral basis needs sigma, beta > 0 and gamma >= 0");
}

double SpectralBasis::trig(int i, double q) noexcept {
    if (i == 0) return 1.0 / std::sqrt(kTwoPi);
    const double norm = 1.0 / std::sqrt(kPi);
    if (i % 2 == 1) return norm * std::sin(0.5 * (i + 1) * q);
    return norm * std::cos(0.5 * i * q);
}

double SpectralBasis::trig_derivative(int i, double q) noexcept {
    if (i == 0) return 0.0;
    const double norm = 1.0 / std::sqrt(kPi);
    if (i % 2 == 1) {
        const double m = 0.5 * (i + 1);
        return norm * m * std::cos(m * q);
    }
    const double m = 0.5 * i;
    return -norm * m * std::sin(m * q);
}

void SpectralBasis::hermite(double p, int count, double* out) const {
    hermite_functions(p / sigma, count, out);
    const double scale = 1.0 / std::sqrt(sigma);
    for (int j = 0; j < count; ++j) out[j] *= scale;
}

SpectralBasis spectral_preset(const std::string& name, double beta, double gamma) {
    SpectralBasis b;
    b.beta = beta;
    b.gamma = gamma;
    if (name == "desk") {
        b.modes = 60;
        b.sigma = 1.0 / std::sqrt(beta);
    } else if (name == "reference") {
        b.modes = 300;
        b.sigma = 0.1 / std::sqrt(beta);
    } else {
        throw std::invalid_argument("unknown solver preset: " + name);
    }
    return b;
}

GeneratorBlocks generator_blocks(const SpectralBasis& basis, const Potential1D& potential) {
    basis.validate();
    if (!potential.periodic()) throw std::invalid_argument("spectral solve needs a periodic potential");
    const int n1 = basis.per_variable();
    GeneratorBlocks blocks;

    // position blocks: periodic trapezoid, exact for trigonometric integrands
    const QuadratureRule qrule = periodic_trapezoid(std::max(8 * basis.modes, 64));
    blocks.dq = Eigen::MatrixXd::Zero(n1, n1);
    blocks.vq = Eigen::MatrixXd::Zero(n1, n1);
    std::vector<double> g(n1), dg(n1);
    for (std::size_t m = 0; m < qrule.nodes.size(); ++m) {
        const double q = qrule.nodes[m], w = qrule.weights[m];
        const double force = potential.grad(q);
        for (int i = 0; i < n1; ++i) {
            g[i] = SpectralBasis::trig(i, q);
            dg[i] = SpectralBasis::trig_derivative(i, q);
        }
        for (int k = 0; k < n1; ++k) {
            const double wk = w * g[k];
            for (int i = 0; i < n1; ++i) {
                blocks.dq(k, i) += wk * dg[i];
                blocks.vq(k, i) += wk * force * g[i];
            }
        }
    }

    // momentum blocks: Gauss-Hermite in x = p / sigma, exact for these products
    const int extra = 2;
    const QuadratureRule prule = gauss_hermite_flat(2 * basis.modes + 16);
    const double s = basis.sigma, beta = basis.beta;
    const double s_half = 1.0 / std::sqrt(s);
    blocks.pp = Eigen::MatrixXd::Zero(n1, n1);
    blocks.dp = Eigen::MatrixXd::Zero(n1, n1);
    blocks.fd = Eigen::MatrixXd::Zero(n1, n1);
    std::vector<double> psi(n1 + extra), h(n1), dh(n1), ddh(n1);
    for (std::size_t m = 0; m < prule.nodes.size(); ++m) {
        const double x = prule.nodes[m];
        const double w = s * prule.weights[m];
        const double p = s * x;
        hermite_functions(x, n1 + extra, psi.data());
        for (int j = 0; j < n1; ++j) {
            const double jm = j;
            const double lower = j >= 1 ? psi[j - 1] : 0.0;
            const double lower2 = j >= 2 ? psi[j - 2] : 0.0;
            h[j] = s_half * psi[j];
            dh[j] = s_half / s * (0.5 * std::sqrt(jm) * lower - 0.5 * std::sqrt(jm + 1.0) * psi[j + 1]);
            ddh[j] = s_half / (s * s) *
                     (0.25 * std::sqrt(jm * (jm - 1.0)) * lower2 - 0.25 * (2.0 * jm + 1.0) * psi[j] +
                      0.25 * std::sqrt((jm + 1.0) * (jm + 2.0)) * psi[j + 2]);
        }
        for (int l = 0; l < n1; ++l) {
            const double wl = w * h[l];
            for (int j = 0; j < n1; ++j) {
                blocks.pp(l, j) += wl * p * h[j];
                blocks.dp(l, j) += wl * dh[j];
                blocks.fd(l, j) += wl * (ddh[j] / beta - 0.25 * beta * p * p * h[j] + 0.5 * h[j]);
            }
        }
    }
    return blocks;
}

namespace {

struct Entry {
    int row, col;
    double value;
};

std::vector<Entry> nonzeros(const Eigen::MatrixXd& m) {
    const double tol = 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff());
    std::vector<Entry> out;
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r)
            if (std::abs(m(r, c)) > tol) out.push_back({r, c, m(r, c)});
    return out;
}

void add_kron(std::vector<Eigen::Triplet<double>>& triplets, const std::vector<Entry>& outer,
              const std::vector<Entry>& inner, double factor, int n1) {
    for (const Entry& o : outer)
        for (const Entry& in : inner)
            triplets.emplace_back(o.row * n1 + in.row, o.col * n1 + in.col, factor * o.value * in.value);
}

}  // namespace

Eigen::SparseMatrix<double> assemble_generator_matrix(const SpectralBasis& basis, const Potential1D& potential) {
    const GeneratorBlocks b = generator_blocks(basis, potential);
    const int n1 = basis.per_variable();
    std::vector<Eigen::Triplet<double>> triplets;
    add_kron(triplets, nonzeros(b.dq), nonzeros(b.pp), -1.0, n1);
    add_kron(triplets, nonzeros(b.vq), nonzeros(b.dp), 1.0, n1);
    if (basis.gamma != 0.0) {
        std::vector<Entry> identity;
        for (int i = 0; i < n1; ++i) identity.push_back({i, i, 1.0});
        add_kron(triplets, identity, nonzeros(b.fd), -basis.gamma, n1);
    }
    Eigen::SparseMatrix<double> a(basis.size(), basis.size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.prune(0.0);
    return a;
}

namespace {

struct PositionFactors {
    std::vector<double> coeff;  // int e^{-beta (V - v0)/2} g_i / sqrt(zq)
    double zq = 0.0;            // int e^{-beta (V - v0)}
    double v0 = 0.0;
};

PositionFactors position_factors(const SpectralBasis& basis, const Potential1D& potential) {
    const int n1 = basis.per_variable();
    const QuadratureRule rule = periodic_trapezoid(std::max(8 * basis.modes, 2048));
    PositionFactors f;
    f.v0 = potential.min_value();
    f.coeff.assign(n1, 0.0);
    for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
        const double q = rule.nodes[m];
        const double e = std::exp(-0.5 * basis.beta * (potential.eval(q) - f.v0));
        f.zq += rule.weights[m] * e * e;
        for (int i = 0; i < n1; ++i) f.coeff[i] += rule.weights[m] * e * SpectralBasis::trig(i, q);
    }
    for (double& c : f.coeff) c /= std::sqrt(f.zq);
    return f;
}

double momentum_partition(double beta) { return std::sqrt(kTwoPi / beta); }

// e^{beta p^2 / 4} h_j(p) and its p-derivative, j = 0..n1-1, times sqrt(Z_p).
void momentum_factors(const SpectralBasis& basis, double p, std::vector<double>& scratch, double* value,
                      double* derivative) {
    const int n1 = basis.per_variable();
    const double s = basis.sigma, beta = basis.beta;
    const double x = p / s;
    scratch.resize(n1 + 1);
    hermite_functions(x, n1 + 1, scratch.data(), 0.25 * beta * s * s);
    const double zp = std::sqrt(momentum_partition(beta));
    const double s_half = 1.0 / std::sqrt(s);
    for (int j = 0; j < n1; ++j) {
        if (value) value[j] = zp * s_half * scratch[j];
        if (derivative) {
            const double jm = j;
            const double lower = j >= 1 ? scratch[j - 1] : 0.0;
            const double upper = scratch[j + 1];
            const double dh = s_half / s * (0.5 * std::sqrt(jm) * lower - 0.5 * std::sqrt(jm + 1.0) * upper);
            const double ph = s_half * s * (std::sqrt(jm + 1.0) * upper + std::sqrt(jm) * lower);
            derivative[j] = zp * (dh + 0.5 * beta * ph);
        }
    }
}

}  // namespace

ProjectionCoefficients projection_coefficients(const SpectralBasis& basis, const Potential1D& potential) {
    basis.validate();
    const int n1 = basis.per_variable();
    const PositionFactors pos = position_factors(basis, potential);

    // momentum integrals of e^{-beta p^2/4} h_j(p) (times 1 or p) by a fine trapezoid
    const double s = basis.sigma, beta = basis.beta;
    const double range = std::max(s * (std::sqrt(4.0 * basis.modes + 6.0) + 12.0), 14.0 / std::sqrt(beta));
    const double step = std::min(s, 1.0 / std::sqrt(beta)) / (2.0 * std::sqrt(basis.modes + 2.0));
    const int count = static_cast<int>(std::ceil(range / step));
    std::vector<double> c0(n1, 0.0), c1(n1, 0.0), psi(n1);
    const double s_half = 1.0 / std::sqrt(s);
    for (int m = -count; m <= count; ++m) {
        const double p = m * step;
        hermite_functions(p / s, n1, psi.data(), -0.25 * beta * s * s);
        for (int j = 0; j < n1; ++j) {
            const double v = step * s_half * psi[j];
            c0[j] += v;
            c1[j] += v * p;
        }
    }
    const double zp = std::sqrt(momentum_partition(beta));
    ProjectionCoefficients out;
    out.one.resize(basis.size());
    out.momentum.resize(basis.size());
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n1; ++j) {
            out.one[basis.index(i, j)] = pos.coeff[i] * c0[j] / zp;
            out.momentum[basis.index(i, j)] = pos.coeff[i] * c1[j] / zp;
        }
    }
    out.z_position = pos.zq;
    return out;
}

SpectralSolution solve_saddle(const Eigen::SparseMatrix<double>& a, const SpectralBasis& basis,
                              const Potential1D& potential, SaddleSolver solver) {
    basis.validate();
    if (!(basis.gamma > 0.0)) throw std::invalid_argument("saddle solve needs gamma > 0");
    const int n = basis.size();
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("generator matrix size mismatch");
    const ProjectionCoefficients proj = projection_coefficients(basis, potential);
    const Eigen::VectorXd u = proj.one / proj.one.norm();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * n);
    for (int k = 0; k < a.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
            triplets.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) {
        if (u[i] != 0.0) {
            triplets.emplace_back(i, n, u[i]);
            triplets.emplace_back(n, i, u[i]);
        }
    }
    Eigen::SparseMatrix<double> k(n + 1, n + 1);
    k.setFromTriplets(triplets.begin(), triplets.end());
    k.makeCompressed();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs.head(n) = proj.momentum;

    Eigen::VectorXd x;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool have_lu = false;
    auto factor = [&] {
        lu.compute(k);
        if (lu.info() != Eigen::Success) throw std::runtime_error("saddle system factorization failed: " + lu.lastErrorMessage());
        have_lu = true;
    };
    if (solver == SaddleSolver::krylov) {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
        it.preconditioner().setDroptol(1e-6);
        it.preconditioner().setFillfactor(20);
        it.setTolerance(1e-12);
        it.setMaxIterations(4 * n);
        it.compute(k);
        if (it.info() == Eigen::Success) x = it.solve(rhs);
        if (it.info() != Eigen::Success || x.size() != n + 1) {
            std::cerr << "warning: Krylov saddle solve did not converge, falling back to sparse LU\n";
            factor();
            x = lu.solve(rhs);
        }
    } else {
        factor();
        x = lu.solve(rhs);
    }

    SpectralSolution sol;
    sol.basis = basis;
    sol.potential = potential;
    sol.coeffs.resize(basis.per_variable(), basis.per_variable());
    for (int i = 0; i < basis.per_variable(); ++i)
        for (int j = 0; j < basis.per_variable(); ++j) sol.coeffs(i, j) = x[basis.index(i, j)];
    sol.alpha = x[n];
    sol.rhs_norm = rhs.norm();
    sol.residual_norm = (k * x - rhs).norm();
    sol.rhs = proj.momentum;
    sol.unit_constant = u;
    sol.z_position = proj.z_position;

    // rough condition estimate: ||K||_inf times a power-iteration estimate of ||K^{-1}||
    if (!have_lu) factor();
    double norm_k = 0.0;
    {
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n + 1);
        for (int c = 0; c < k.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(k, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
        norm_k = row_sums.maxCoeff();
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n + 1).normalized();
    double inv_norm = 0.0;
    for (int iter = 0; iter < 12; ++iter) {
        Eigen::VectorXd w = lu.solve(v);
        inv_norm = w.norm();
        if (!(inv_norm > 0.0) || !std::isfinite(inv_norm)) break;
        v = w / inv_norm;
    }
    sol.condition_estimate = norm_k * inv_norm;
    if (!std::isfinite(sol.condition_estimate) || sol.condition_estimate > 1e12)
        std::cerr << "warning: ill-conditioned saddle system (condition ~ " << sol.condition_estimate
                  << ") at gamma = " << basis.gamma << "\n";
    return sol;
}

SpectralSolution solve_poisson(const SpectralBasis& basis, const Potential1D& potential, SaddleSolver solver) {
    return solve_saddle(assemble_generator_matrix(basis, potential), basis, potential, solver);
}

double diffusion_from_spectral(const SpectralSolution& sol) {
    double acc = 0.0;
    for (int i = 0; i < sol.basis.per_variable(); ++i)
        for (int j = 0; j < sol.basis.per_variable(); ++j) acc += sol.coeffs(i, j) * sol.rhs[sol.basis.index(i, j)];
    return acc;
}

namespace {

// sqrt(Z_q) e^{beta (V - v0)/2} g_i(q), consistent with position_factors().
void position_row(const SpectralSolution& sol, double q, double* out) {
    const double e = std::sqrt(sol.z_position) *
                     std::exp(0.5 * sol.basis.beta * (sol.potential.eval(q) - sol.potential.min_value()));
    for (int i = 0; i < sol.basis.per_variable(); ++i) out[i] = e * SpectralBasis::trig(i, q);
}

}  // namespace

double SpectralSolution::evaluate(double q, double p) const {
    const int n1 = basis.per_variable();
    std::vector<double> eq(n1), fp(n1), scratch;
    position_row(*this, q, eq.data());
    momentum_factors(basis, p, scratch, fp.data(), nullptr);
    double acc = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) acc += coeffs(i, j) * eq[i] * fp[j];
    return acc;
}

double SpectralSolution::evaluate_dp(double q, double p) const {
    const int n1 = basis.per_variable();
    std::vector<double> eq(n1), dfp(n1), scratch;
    position_row(*this, q, eq.data());
    momentum_factors(basis, p, scratch, nullptr, dfp.data());
    double acc = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) acc += coeffs(i, j) * eq[i] * dfp[j];
    return acc;
}

GridCV export_to_grid(const SpectralSolution& sol, const GridSpec& spec) {
    spec.validate();
    const int n1 = sol.basis.per_variable();
    Eigen::MatrixXd eq(spec.nq, n1), fp(spec.np + 1, n1), dfp(spec.np + 1, n1);
    std::vector<double> row(n1), drow(n1), scratch;
    for (int i = 0; i < spec.nq; ++i) {
        position_row(sol, spec.q_node(i), row.data());
        for (int k = 0; k < n1; ++k) eq(i, k) = row[k];
    }
    for (int j = 0; j <= spec.np; ++j) {
        momentum_factors(sol.basis, spec.p_node(j), scratch, row.data(), drow.data());
        for (int k = 0; k < n1; ++k) {
            fp(j, k) = row[k];
            dfp(j, k) = drow[k];
        }
    }
    const Eigen::MatrixXd left = eq * sol.coeffs;
    const Eigen::MatrixXd psi = left * fp.transpose();
    const Eigen::MatrixXd dpsi = left * dfp.transpose();
    std::vector<double> vpsi(static_cast<std::size_t>(spec.nq) * (spec.np + 1)), vdpsi(vpsi.size());
    for (int i = 0; i < spec.nq; ++i) {
        for (int j = 0; j <= spec.np; ++j) {
            vpsi[static_cast<std::size_t>(i) * (spec.np + 1) + j] = psi(i, j);
            vdpsi[static_cast<std::size_t>(i) * (spec.np + 1) + j] = dpsi(i, j);
        }
    }
    GridMetadata meta{sol.basis.beta, sol.basis.gamma, sol.potential.name(), "galerkin"};
    GridCV grid(spec, std::move(meta), std::move(vpsi), std::move(vdpsi));
    grid.set_d_psi(compute_d(grid, sol.potential, sol.basis.gamma, sol.basis.beta));
    return grid;
}

}  // namespace cvdiff
