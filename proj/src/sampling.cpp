#include "cvdiff/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvdiff/torus.hpp"

namespace cvdiff {

EquilibriumMeasure::EquilibriumMeasure(Hamiltonian hamiltonian, int scan_points)
    : hamiltonian_(std::move(hamiltonian)) {
    if (!(hamiltonian_.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (scan_points < 2) throw std::invalid_argument("scan needs at least two points");
    const double h = kTwoPi / scan_points;
    if (const auto* v1 = std::get_if<Potential1D>(&hamiltonian_.potential)) {
        if (!v1->periodic()) {
            v_min_ = v1->min_value();
            v_max_ = v1->max_value();
            return;
        }
        v_min_ = v_max_ = v1->eval(-kPi);
        for (int i = 1; i < scan_points; ++i) {
            const double v = v1->eval(-kPi + i * h);
            v_min_ = std::min(v_min_, v);
            v_max_ = std::max(v_max_, v);
        }
        return;
    }
    const auto& v2 = std::get<Potential2D>(hamiltonian_.potential);
    v_min_ = v_max_ = v2.eval(-kPi, -kPi);
    for (int i = 0; i < scan_points; ++i) {
        for (int j = 0; j < scan_points; ++j) {
            const double v = v2.eval(-kPi + i * h, -kPi + j * h);
            v_min_ = std::min(v_min_, v);
            v_max_ = std::max(v_max_, v);
        }
    }
}

double EquilibriumMeasure::proposal_bound() const noexcept { return std::exp(-beta() * v_min_); }

StationarySampler::StationarySampler(std::shared_ptr<const EquilibriumMeasure> measure, RandomStream stream)
    : measure_(std::move(measure)), stream_(std::move(stream)) {
    if (!measure_) throw std::invalid_argument("sampler needs a measure");
}

std::array<double, 2> StationarySampler::sample_position() {
    const Hamiltonian& ham = measure_->hamiltonian();
    const double beta = ham.beta;
    const double v_min = measure_->scanned_min();
    if (const auto* v1 = std::get_if<Potential1D>(&ham.potential)) {
        if (!v1->periodic()) {
            const double q = stream_.normal() / std::sqrt(beta * v1->stiffness());
            return {q, 0.0};
        }
        for (;;) {
            ++proposals_;
            const double q = -kPi + kTwoPi * stream_.uniform();
            if (stream_.uniform() < std::exp(-beta * (v1->eval(q) - v_min))) {
                ++accepted_;
                return {q, 0.0};
            }
        }
    }
    const auto& v2 = std::get<Potential2D>(ham.potential);
    for (;;) {
        ++proposals_;
        const double q1 = -kPi + kTwoPi * stream_.uniform();
        const double q2 = -kPi + kTwoPi * stream_.uniform();
        if (stream_.uniform() < std::exp(-beta * (v2.eval(q1, q2) - v_min))) {
            ++accepted_;
            return {q1, q2};
        }
    }
}

std::array<double, 2> StationarySampler::sample_momentum() {
    const double scale = 1.0 / std::sqrt(measure_->beta());
    std::array<double, 2> p{0.0, 0.0};
    for (int k = 0; k < measure_->dimension(); ++k) p[k] = scale * stream_.normal();
    return p;
}

StationarySampler::GleState StationarySampler::sample_gle_state() {
    if (measure_->dimension() != 1) throw std::invalid_argument("GLE sampling is one-dimensional");
    const double q = sample_position()[0];
    const double scale = 1.0 / std::sqrt(measure_->beta());
    const double p = scale * stream_.normal();
    const double z = scale * stream_.normal();
    return {q, p, z};
}

}  // namespace cvdiff
