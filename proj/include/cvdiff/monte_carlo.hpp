#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvdiff/control_variate.hpp"
#include "cvdiff/estimators.hpp"
#include "cvdiff/potentials.hpp"

namespace cvdiff {

struct RunSettings {
    double gamma = 1.0;
    double dt = 0.01;
    double T = 100.0;
    long long J = 1000;
    /// Requested snapshot times; rounded to whole steps, T is always included.
    std::vector<double> snapshots;
    std::uint64_t seed = 0;
    /// Displacement direction (coordinate index) for 2D runs.
    int axis = 0;
    /// Aggregate outcomes in replica order so results do not depend on the worker count.
    bool bit_exact = true;
    /// 0: read CVDIFF_WORKERS, else hardware concurrency.
    int workers = 0;
};

struct GleSettings {
    double gamma = 0.1;
    double nu = 1.0;
    double dt = 0.01;
    double T = 100.0;
    long long J = 1000;
    std::vector<double> snapshots;
    std::uint64_t seed = 0;
    bool bit_exact = true;
    int workers = 0;
};

struct RunResult {
    EstimatorSeries series;
    long long steps = 0;
    long long diverged = 0;
    std::string first_error;
};

/// Worker count: `requested` if positive, else CVDIFF_WORKERS, else hardware concurrency.
int worker_count(int requested = 0);

/// Step indices of the snapshots (sorted, unique, last = round(T / dt)).
std::vector<long long> snapshot_steps(const std::vector<double>& times, double dt, double T);

/// Single Langevin replica j (used by the driver and by tests).
template <int D>
ReplicaOutcome simulate_langevin_replica(const Hamiltonian& hamiltonian, const ControlVariate<D>& cv,
                                         const RunSettings& settings, const std::vector<long long>& steps,
                                         std::uint64_t replica);

/// J independent GLA trajectories started from mu, u(t) and v(t) at each snapshot.
template <int D>
RunResult run_langevin(const Hamiltonian& hamiltonian, const ControlVariate<D>& cv, const RunSettings& settings);

ReplicaOutcome simulate_gle_replica(const Hamiltonian& hamiltonian, const GleControlVariate& cv,
                                    const GleSettings& settings, const std::vector<long long>& steps,
                                    std::uint64_t replica);

/// Same for the quasi-Markovian GLE integrated with BABO (1D potentials only).
RunResult run_gle(const Hamiltonian& hamiltonian, const GleControlVariate& cv, const GleSettings& settings);

}  // namespace cvdiff
