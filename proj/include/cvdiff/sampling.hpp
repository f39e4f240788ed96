#pragma once

#include <array>
#include <memory>

#include "cvdiff/potentials.hpp"
#include "cvdiff/random.hpp"

namespace cvdiff {

/// Immutable data shared by all samplers of one run: the Hamiltonian and
/// the rejection envelope min V (so that sup e^{-beta V} = e^{-beta min V}).
class EquilibriumMeasure {
public:
    /// Envelope found by a dense scan with `scan_points` nodes per dimension.
    explicit EquilibriumMeasure(Hamiltonian hamiltonian, int scan_points = 4096);

    const Hamiltonian& hamiltonian() const noexcept { return hamiltonian_; }
    double beta() const noexcept { return hamiltonian_.beta; }
    int dimension() const noexcept { return hamiltonian_.dimension(); }
    /// sup over the torus of e^{-beta V}.
    double proposal_bound() const noexcept;
    double scanned_min() const noexcept { return v_min_; }
    double scanned_max() const noexcept { return v_max_; }

private:
    Hamiltonian hamiltonian_;
    double v_min_ = 0.0;
    double v_max_ = 0.0;
};

/// Draws i.i.d. samples of nu (positions), kappa (momenta) and mu_GLE.
/// Owns the replica's random stream; the same stream then drives the dynamics.
class StationarySampler {
public:
    StationarySampler(std::shared_ptr<const EquilibriumMeasure> measure, RandomStream stream);

    /// Position in [-pi, pi)^d by uniform-proposal rejection sampling.
    /// The non-periodic quadratic potential is sampled exactly (Gaussian on R).
    std::array<double, 2> sample_position();
    /// Each component N(0, 1/beta).
    std::array<double, 2> sample_momentum();

    struct GleState {
        double q, p, z;
    };
    GleState sample_gle_state();

    /// Proposals drawn and accepted so far by sample_position().
    long proposals() const noexcept { return proposals_; }
    long accepted() const noexcept { return accepted_; }

    RandomStream& stream() noexcept { return stream_; }
    const EquilibriumMeasure& measure() const noexcept { return *measure_; }

private:
    std::shared_ptr<const EquilibriumMeasure> measure_;
    RandomStream stream_;
    long proposals_ = 0;
    long accepted_ = 0;
};

}  // namespace cvdiff
