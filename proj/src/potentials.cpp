#include "cvdiff/potentials.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvdiff/torus.hpp"

namespace cvdiff {

Potential1D::Potential1D(PotentialKind kind, double stiffness) : kind_(kind), stiffness_(stiffness) {
    if (kind == PotentialKind::quadratic && !(stiffness > 0.0))
        throw std::invalid_argument("quadratic potential needs stiffness k > 0");
}

Potential1D Potential1D::from_name(std::string_view name, double stiffness) {
    if (name == "zero") return Potential1D(PotentialKind::zero);
    if (name == "cosine") return Potential1D(PotentialKind::cosine);
    if (name == "pendulum") return Potential1D(PotentialKind::pendulum);
    if (name == "quadratic") return Potential1D(PotentialKind::quadratic, stiffness);
    throw std::invalid_argument("unknown potential: " + std::string(name));
}

double Potential1D::eval(double q) const noexcept {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::cosine: return -0.5 * std::cos(wrap_to_torus(q));
        case PotentialKind::pendulum: return 0.5 * (1.0 - std::cos(wrap_to_torus(q)));
        case PotentialKind::quadratic: return 0.5 * stiffness_ * q * q;
    }
    return 0.0;
}

double Potential1D::grad(double q) const noexcept {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::cosine:
        case PotentialKind::pendulum: return 0.5 * std::sin(wrap_to_torus(q));
        case PotentialKind::quadratic: return stiffness_ * q;
    }
    return 0.0;
}

double Potential1D::min_value() const noexcept {
    switch (kind_) {
        case PotentialKind::cosine: return -0.5;
        default: return 0.0;
    }
}

double Potential1D::max_value() const noexcept {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::cosine: return 0.5;
        case PotentialKind::pendulum: return 1.0;
        case PotentialKind::quadratic: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

std::string Potential1D::name() const {
    switch (kind_) {
        case PotentialKind::zero: return "zero";
        case PotentialKind::cosine: return "cosine";
        case PotentialKind::pendulum: return "pendulum";
        case PotentialKind::quadratic: return "quadratic";
    }
    return "unknown";
}

Potential2D::Potential2D(Potential1D separable_part, double delta) : part_(separable_part), delta_(delta) {
    if (!separable_part.periodic()) throw std::invalid_argument("2D potential needs a periodic separable part");
}

double Potential2D::eval(double q1, double q2) const noexcept {
    return part_.eval(q1) + part_.eval(q2) - delta_ * std::cos(q1) * std::cos(q2);
}

std::array<double, 2> Potential2D::grad(double q1, double q2) const noexcept {
    const double c1 = std::cos(q1), s1 = std::sin(q1);
    const double c2 = std::cos(q2), s2 = std::sin(q2);
    return {part_.grad(q1) + delta_ * s1 * c2, part_.grad(q2) + delta_ * c1 * s2};
}

std::string Potential2D::name() const {
    return part_.kind() == PotentialKind::cosine ? "cos2d" : part_.name() + "2d";
}

double Hamiltonian::potential_energy(std::span<const double> q) const {
    if (const auto* v1 = std::get_if<Potential1D>(&potential)) {
        if (q.size() != 1) throw std::invalid_argument("expected a 1D position");
        return v1->eval(q[0]);
    }
    if (q.size() != 2) throw std::invalid_argument("expected a 2D position");
    return std::get<Potential2D>(potential).eval(q[0], q[1]);
}

double Hamiltonian::energy(std::span<const double> q, std::span<const double> p) const {
    double kinetic = 0.0;
    for (double pi : p) kinetic += 0.5 * pi * pi;
    return potential_energy(q) + kinetic;
}

}  // namespace cvdiff
