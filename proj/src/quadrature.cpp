#include "cvdiff/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cvdiff/torus.hpp"

namespace cvdiff {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("quadrature needs n >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        rule.nodes[i] = mid + half * solver.eigenvalues()[i];
        rule.weights[i] = 2.0 * v0 * v0 * half;
    }
    return rule;
}

void hermite_functions(double x, int count, double* out, double extra_exponent) {
    if (count <= 0) return;
    const double exponent = (extra_exponent - 0.25) * x * x;
    out[0] = std::pow(2.0 * kPi, -0.25) * std::exp(exponent);
    if (count == 1) return;
    out[1] = x * out[0];
    for (int j = 1; j + 1 < count; ++j)
        out[j + 1] = (x * out[j] - std::sqrt(static_cast<double>(j)) * out[j - 1]) / std::sqrt(j + 1.0);
}

QuadratureRule gauss_hermite_flat(int n) {
    if (n < 1) throw std::invalid_argument("quadrature needs n >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    QuadratureRule rule;
    rule.nodes.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    rule.weights.resize(n);
    std::vector<double> psi(n);
    for (int i = 0; i < n; ++i) {
        hermite_functions(rule.nodes[i], n, psi.data());
        double s = 0.0;
        for (double v : psi) s += v * v;
        rule.weights[i] = 1.0 / s;
    }
    return rule;
}

QuadratureRule periodic_trapezoid(int n) {
    if (n < 1) throw std::invalid_argument("quadrature needs n >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.assign(n, kTwoPi / n);
    for (int m = 0; m < n; ++m) rule.nodes[m] = -kPi + kTwoPi * m / n;
    return rule;
}

}  // namespace cvdiff
