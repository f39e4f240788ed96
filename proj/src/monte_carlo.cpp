#include "cvdiff/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cvdiff/integrators.hpp"
#include "cvdiff/sampling.hpp"

namespace cvdiff {

int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CVDIFF_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<long long> snapshot_steps(const std::vector<double>& times, double dt, double T) {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("run needs dt > 0 and T > 0");
    const long long total = std::llround(T / dt);
    if (total < 1) throw std::invalid_argument("T / dt rounds to zero steps");
    std::vector<long long> steps;
    for (double t : times) {
        const long long n = std::llround(t / dt);
        if (n >= 1 && n < total) steps.push_back(n);
    }
    steps.push_back(total);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

namespace {

template <int D>
auto gradient_of(const Hamiltonian& h) {
    if constexpr (D == 1) {
        const Potential1D pot = std::get<Potential1D>(h.potential);
        return [pot](const std::array<double, 1>& q) { return std::array<double, 1>{pot.grad(q[0])}; };
    } else {
        const Potential2D pot = std::get<Potential2D>(h.potential);
        return [pot](const std::array<double, 2>& q) { return pot.grad(q[0], q[1]); };
    }
}

bool periodic_of(const Hamiltonian& h) {
    if (h.potential.index() == 0) return std::get<Potential1D>(h.potential).periodic();
    return true;
}

std::shared_ptr<const EquilibriumMeasure> shared_measure(const Hamiltonian& h) {
    return std::make_shared<const EquilibriumMeasure>(h);
}

// Runs `simulate(j)` for j < J on a pool; aggregates in replica order when bit_exact.
RunResult run_pool(long long J, int workers, bool bit_exact, const std::vector<double>& times, double d_psi,
                   bool has_cv, const std::function<ReplicaOutcome(std::uint64_t)>& simulate) {
    if (J < 2) throw std::invalid_argument("a run needs J >= 2 replicas");
    RunResult result;
    std::atomic<long long> next{0};
    std::mutex mutex;
    std::vector<ReplicaOutcome> outcomes;
    if (bit_exact) outcomes.resize(static_cast<std::size_t>(J));
    const int n_workers = static_cast<int>(std::min<long long>(worker_count(workers), J));
    std::vector<std::vector<RunningMoments>> partial_u(n_workers, std::vector<RunningMoments>(times.size()));
    std::vector<std::vector<RunningMoments>> partial_v(n_workers, std::vector<RunningMoments>(times.size()));
    std::vector<long long> diverged(n_workers, 0);
    std::string first_error;
    long long first_error_index = J;

    auto work = [&](int w) {
        for (;;) {
            const long long j = next.fetch_add(1);
            if (j >= J) break;
            ReplicaOutcome o = simulate(static_cast<std::uint64_t>(j));
            if (o.diverged) {
                ++diverged[w];
                std::lock_guard<std::mutex> lock(mutex);
                if (j < first_error_index) {
                    first_error_index = j;
                    first_error = o.message;
                }
            }
            if (bit_exact)
                outcomes[static_cast<std::size_t>(j)] = std::move(o);
            else
                accumulate_outcome(o, times, d_psi, partial_u[w], partial_v[w]);
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (long long d : diverged) result.diverged += d;
    result.first_error = first_error;
    if (bit_exact) {
        result.series = aggregate(outcomes, times, d_psi, has_cv);
    } else {
        for (int w = 1; w < n_workers; ++w)
            for (std::size_t k = 0; k < times.size(); ++k) {
                partial_u[0][k].merge(partial_u[w][k]);
                partial_v[0][k].merge(partial_v[w][k]);
            }
        result.series = EstimatorSeries::from_moments(times, partial_u[0], partial_v[0], d_psi, has_cv);
    }
    return result;
}

std::vector<double> times_of(const std::vector<long long>& steps, double dt) {
    std::vector<double> t;
    for (long long n : steps) t.push_back(static_cast<double>(n) * dt);
    return t;
}

template <int D>
ReplicaOutcome simulate_with(const std::shared_ptr<const EquilibriumMeasure>& measure, const ControlVariate<D>& cv,
                             const RunSettings& s, const std::vector<long long>& steps, std::uint64_t replica) {
    const Hamiltonian& h = measure->hamiltonian();
    const auto grad = gradient_of<D>(h);
    const bool periodic = periodic_of(h);
    const NoisePairCovariance noise(s.gamma, s.dt);
    const double decay = noise.decay();
    const double amplitude = std::sqrt(2.0 * s.gamma / h.beta);
    const bool use_cv = !cv.is_zero();

    StationarySampler sampler(measure, RandomStream(s.seed, replica));
    std::array<double, D> q0{}, p0{};
    const auto q_draw = sampler.sample_position();
    const auto p_draw = sampler.sample_momentum();
    for (int k = 0; k < D; ++k) {
        q0[k] = q_draw[k];
        p0[k] = p_draw[k];
    }
    ReplicaState<D> state = make_replica_state<D>(q0, p0, periodic);
    if (use_cv) state.psi_initial = cv.value(state.q_wrapped, state.p);
    RandomStream& rng = sampler.stream();

    ReplicaOutcome out;
    out.displacement.reserve(steps.size());
    out.xi.reserve(steps.size());
    const double start = state.q_unwrapped[s.axis];
    try {
        long long n = 0;
        for (long long target : steps) {
            for (; n < target; ++n) {
                const NoisePair<D> pair = make_noise_pair<D>(noise, rng);
                if (use_cv) {
                    const auto gp = cv.grad_p(state.q_wrapped, state.p);
                    double dot = 0.0;
                    for (int k = 0; k < D; ++k) dot += gp[k] * pair.g_tilde[k];
                    state.I_psi += amplitude * dot;
                }
                gla_step_core<D>(state, grad, periodic, s.dt, decay, amplitude, pair.g);
            }
            out.displacement.push_back(state.q_unwrapped[s.axis] - start);
            out.xi.push_back(use_cv ? xi_value(state.psi_initial, cv.value(state.q_wrapped, state.p), state.I_psi) : 0.0);
        }
    } catch (const ReplicaDiverged& e) {
        out.diverged = true;
        out.message = "replica " + std::to_string(replica) + ": " + e.what();
    }
    return out;
}

}  // namespace

template <int D>
ReplicaOutcome simulate_langevin_replica(const Hamiltonian& hamiltonian, const ControlVariate<D>& cv,
                                         const RunSettings& settings, const std::vector<long long>& steps,
                                         std::uint64_t replica) {
    return simulate_with<D>(shared_measure(hamiltonian), cv, settings, steps, replica);
}

template <int D>
RunResult run_langevin(const Hamiltonian& hamiltonian, const ControlVariate<D>& cv, const RunSettings& settings) {
    if (hamiltonian.dimension() != D) throw std::invalid_argument("potential dimension does not match the run");
    if (!(settings.gamma > 0.0) || !(hamiltonian.beta > 0.0)) throw std::invalid_argument("need gamma > 0, beta > 0");
    if (settings.axis < 0 || settings.axis >= D) throw std::invalid_argument("direction out of range");
    const std::vector<long long> steps = snapshot_steps(settings.snapshots, settings.dt, settings.T);
    const std::vector<double> times = times_of(steps, settings.dt);
    const auto measure = shared_measure(hamiltonian);
    RunResult r = run_pool(settings.J, settings.workers, settings.bit_exact, times, cv.d_psi(), !cv.is_zero(),
                           [&](std::uint64_t j) { return simulate_with<D>(measure, cv, settings, steps, j); });
    r.steps = steps.back();
    return r;
}

template ReplicaOutcome simulate_langevin_replica<1>(const Hamiltonian&, const ControlVariate<1>&, const RunSettings&,
                                                     const std::vector<long long>&, std::uint64_t);
template ReplicaOutcome simulate_langevin_replica<2>(const Hamiltonian&, const ControlVariate<2>&, const RunSettings&,
                                                     const std::vector<long long>&, std::uint64_t);
template RunResult run_langevin<1>(const Hamiltonian&, const ControlVariate<1>&, const RunSettings&);
template RunResult run_langevin<2>(const Hamiltonian&, const ControlVariate<2>&, const RunSettings&);

namespace {

ReplicaOutcome simulate_gle_with(const std::shared_ptr<const EquilibriumMeasure>& measure, const GLEDrift& drift,
                                 const GleControlVariate& cv, const GleSettings& s,
                                 const std::vector<long long>& steps, std::uint64_t replica) {
    const Hamiltonian& h = measure->hamiltonian();
    const Potential1D pot = std::get<Potential1D>(h.potential);
    const bool periodic = pot.periodic();
    auto grad = [&pot](double q) { return pot.grad(q); };
    const bool use_cv = !cv.is_zero();
    const double amplitude = drift.amplitude();

    StationarySampler sampler(measure, RandomStream(s.seed, replica));
    const auto init = sampler.sample_gle_state();
    GleReplicaState state;
    state.q_wrapped = periodic ? wrap_to_torus(init.q) : init.q;
    state.q_unwrapped = init.q;
    state.p = init.p;
    state.z = init.z;
    if (use_cv) state.psi_initial = cv.value(state.q_wrapped, state.p, state.z);
    RandomStream& rng = sampler.stream();

    ReplicaOutcome out;
    const double start = state.q_unwrapped;
    try {
        long long n = 0;
        for (long long target : steps) {
            for (; n < target; ++n) {
                const GleNoise noise = make_gle_noise(drift, rng);
                if (use_cv) state.I_psi += amplitude * cv.grad_z(state.q_wrapped, state.p, state.z) * noise.dw;
                babo_step_with_noise(state, grad, periodic, drift, noise);
            }
            out.displacement.push_back(state.q_unwrapped - start);
            out.xi.push_back(use_cv ? xi_value(state.psi_initial, cv.value(state.q_wrapped, state.p, state.z), state.I_psi)
                                    : 0.0);
        }
    } catch (const ReplicaDiverged& e) {
        out.diverged = true;
        out.message = "replica " + std::to_string(replica) + ": " + e.what();
    }
    return out;
}

}  // namespace

ReplicaOutcome simulate_gle_replica(const Hamiltonian& hamiltonian, const GleControlVariate& cv,
                                    const GleSettings& settings, const std::vector<long long>& steps,
                                    std::uint64_t replica) {
    const GLEDrift drift(settings.gamma, settings.nu, hamiltonian.beta, settings.dt);
    return simulate_gle_with(shared_measure(hamiltonian), drift, cv, settings, steps, replica);
}

RunResult run_gle(const Hamiltonian& hamiltonian, const GleControlVariate& cv, const GleSettings& settings) {
    if (hamiltonian.dimension() != 1) throw std::invalid_argument("GLE runs need a 1D potential");
    if (!(settings.gamma > 0.0) || !(settings.nu > 0.0)) throw std::invalid_argument("GLE needs gamma > 0, nu > 0");
    const std::vector<long long> steps = snapshot_steps(settings.snapshots, settings.dt, settings.T);
    const std::vector<double> times = times_of(steps, settings.dt);
    const auto measure = shared_measure(hamiltonian);
    const GLEDrift drift(settings.gamma, settings.nu, hamiltonian.beta, settings.dt);
    RunResult r = run_pool(settings.J, settings.workers, settings.bit_exact, times, cv.d_psi(), !cv.is_zero(),
                           [&](std::uint64_t j) { return simulate_gle_with(measure, drift, cv, settings, steps, j); });
    r.steps = steps.back();
    return r;
}

}  // namespace cvdiff
