#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace cvdiff {

enum class PotentialKind { zero, cosine, pendulum, quadratic };

/// One-dimensional potential on the torus (or on R for the quadratic oracle).
///
/// Registry names: "zero", "cosine" (-cos q / 2), "pendulum" ((1 - cos q) / 2),
/// "quadratic" (k q^2 / 2, non-periodic, oracle tests only).
class Potential1D {
public:
    Potential1D() = default;
    explicit Potential1D(PotentialKind kind, double stiffness = 1.0);

    static Potential1D from_name(std::string_view name, double stiffness = 1.0);

    double eval(double q) const noexcept;
    double grad(double q) const noexcept;

    /// E_0 = min over the torus. Exact for every registered potential.
    double min_value() const noexcept;
    /// max over the torus; +inf for the quadratic potential.
    double max_value() const noexcept;

    bool periodic() const noexcept { return kind_ != PotentialKind::quadratic; }
    PotentialKind kind() const noexcept { return kind_; }
    double stiffness() const noexcept { return stiffness_; }
    std::string name() const;

private:
    PotentialKind kind_ = PotentialKind::zero;
    double stiffness_ = 1.0;
};

/// V(q1, q2) = U(q1) + U(q2) - delta cos(q1) cos(q2), with U the separable part.
/// With U = cosine this is the "cos2d" potential.
class Potential2D {
public:
    Potential2D() = default;
    Potential2D(Potential1D separable_part, double delta);

    double eval(double q1, double q2) const noexcept;
    std::array<double, 2> grad(double q1, double q2) const noexcept;

    const Potential1D& separable_part() const noexcept { return part_; }
    double delta() const noexcept { return delta_; }
    std::string name() const;

private:
    Potential1D part_{PotentialKind::cosine};
    double delta_ = 0.0;
};

/// H(q, p) = V(q) + |p|^2 / 2 together with the inverse temperature.
struct Hamiltonian {
    std::variant<Potential1D, Potential2D> potential;
    double beta = 1.0;

    int dimension() const noexcept { return potential.index() == 0 ? 1 : 2; }
    double potential_energy(std::span<const double> q) const;
    double energy(std::span<const double> q, std::span<const double> p) const;
};

}  // namespace cvdiff
