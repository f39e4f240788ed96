#pragma once

#include <vector>

namespace cvdiff {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b] (Golub-Welsch).
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Hermite rule for flat integrals of Hermite-function products:
/// int f(x) dx ~ sum_i W_i f(x_i), exact when f = psi_k psi_l * poly with
/// k + l + deg(poly) <= 2n - 1. W_i already contains the e^{x^2/2} factor,
/// computed as 1 / sum_m psi_m(x_i)^2 so no weight underflows.
QuadratureRule gauss_hermite_flat(int n);

/// Normalized Hermite functions psi_0..psi_{count-1} at x, scaled by
/// exp(extra_exponent * x^2):
///   psi_j(x) = (2 pi)^{-1/4} He_j(x) e^{-x^2/4} / sqrt(j!).
/// Three-term recurrence, stable for large j.
void hermite_functions(double x, int count, double* out, double extra_exponent = 0.0);

/// Periodic trapezoid nodes -pi + 2 pi m / n, m = 0..n-1, with weight 2 pi / n.
QuadratureRule periodic_trapezoid(int n);

}  // namespace cvdiff
