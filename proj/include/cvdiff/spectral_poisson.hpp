#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cvdiff/grid_cv.hpp"
#include "cvdiff/potentials.hpp"

namespace cvdiff {

/// Tensor basis e_{i,j} = Z^{1/2} e^{beta H / 2} g_i(q) h_j(p), 0 <= i, j <= N,
/// orthonormal in L^2(mu). g_i: trigonometric functions (constant, then
/// sin/cos pairs of increasing frequency); h_j: normalized Hermite functions
/// rescaled by sigma.
struct SpectralBasis {
    int modes = 60;  // N
    double sigma = 1.0;
    double beta = 1.0;
    double gamma = 1.0;

    int per_variable() const noexcept { return modes + 1; }
    int size() const noexcept { return per_variable() * per_variable(); }
    int index(int i, int j) const noexcept { return i * per_variable() + j; }
    void validate() const;

    /// g_i(q)
    static double trig(int i, double q) noexcept;
    static double trig_derivative(int i, double q) noexcept;
    /// h_j(p) for j = 0..count-1
    void hermite(double p, int count, double* out) const;
};

/// Named solver presets. "desk": N = 60, sigma = 1/sqrt(beta).
/// "reference": N = 300, sigma = 0.1/sqrt(beta).
SpectralBasis spectral_preset(const std::string& name, double beta, double gamma);

/// 1D operator blocks whose Kronecker combination gives the projected generator.
///   A = -Dq (x) Pp + Vq (x) Dp - gamma I (x) F
/// with Dq = <g_k, g_i'>, Vq = <g_k, V' g_i>, Pp = <h_l, p h_j>, Dp = <h_l, h_j'>,
/// F = <h_l, (beta^{-1} d_pp - beta p^2 / 4 + 1/2) h_j>.
struct GeneratorBlocks {
    Eigen::MatrixXd dq, vq, pp, dp, fd;
};

GeneratorBlocks generator_blocks(const SpectralBasis& basis, const Potential1D& potential);

/// A[(k,l),(i,j)] = <e_{k,l}, -L e_{i,j}>_{L^2(mu)}.
Eigen::SparseMatrix<double> assemble_generator_matrix(const SpectralBasis& basis, const Potential1D& potential);

/// Coefficients of the constant function 1 and of p in the basis (projections P_N 1, P_N p).
struct ProjectionCoefficients {
    Eigen::VectorXd one;
    Eigen::VectorXd momentum;
    double z_position = 0.0;  // int_T e^{-beta V}
};
ProjectionCoefficients projection_coefficients(const SpectralBasis& basis, const Potential1D& potential);

enum class SaddleSolver { direct, krylov };

struct SpectralSolution {
    SpectralBasis basis;
    Potential1D potential;
    Eigen::MatrixXd coeffs;  // coeffs(i, j): coefficient of e_{i,j}
    double alpha = 0.0;      // Lagrange multiplier
    double residual_norm = 0.0;
    double rhs_norm = 0.0;
    double condition_estimate = 0.0;
    Eigen::VectorXd rhs;  // coefficients of P_N p
    Eigen::VectorXd unit_constant;  // u_N
    double z_position = 0.0;

    /// Direct summation of the expansion (slow; used for checks).
    double evaluate(double q, double p) const;
    double evaluate_dp(double q, double p) const;
};

/// Solves [[A, u_N], [u_N^T, 0]] (Psi; alpha) = (P_N p; 0).
SpectralSolution solve_saddle(const Eigen::SparseMatrix<double>& a, const SpectralBasis& basis,
                              const Potential1D& potential, SaddleSolver solver = SaddleSolver::direct);

/// assemble + solve in one call.
SpectralSolution solve_poisson(const SpectralBasis& basis, const Potential1D& potential,
                               SaddleSolver solver = SaddleSolver::direct);

/// <Psi_N, p> from the coefficients.
double diffusion_from_spectral(const SpectralSolution& sol);

/// Tabulates Psi_N and d_p Psi_N (analytic Hermite recurrence) on the grid.
GridCV export_to_grid(const SpectralSolution& sol, const GridSpec& spec);

}  // namespace cvdiff
