#pragma once

#include <cstdint>
#include <vector>

#include "transq/arrival.hpp"
#include "transq/service.hpp"

namespace transq::sim {

/// One batch: arrives with the transition out of slot `epoch`.
struct Arrival {
    int epoch = 0;
    std::vector<int> service_times;

    int batch_size() const { return static_cast<int>(service_times.size()); }
};

/// One realisation over slots 0..horizon. A customer from epoch k is present
/// at slot u iff k <= u and Y > u - k; batches exist for epochs 0..horizon-1.
struct TrajectoryRecord {
    int horizon = 0;
    std::vector<int> state_path; // I(0) .. I(horizon)
    std::vector<Arrival> arrivals;
    std::vector<int> counts;     // N(0) .. N(horizon)

    int final_count() const { return counts.back(); }
};

/// Draws trajectories of one model. Joint (next state, batch size) outcomes
/// are sampled with a single uniform per transition against the cumulative
/// of the flattened {(j, l)} list of the current state.
class Simulator {
public:
    Simulator(const DBmapModel& model, ServiceLaw law);

    TrajectoryRecord trajectory(int t, Rng& rng) const;
    /// N(t) only, without storing the path.
    int count_at_horizon(int t, Rng& rng) const;

private:
    int sample_initial(Rng& rng) const;
    // Returns next state and batch size.
    std::pair<int, int> sample_transition(int state, Rng& rng) const;

    int k_;
    int l_max_;
    std::vector<double> initial_cdf_;
    std::vector<std::vector<double>> transition_cdf_; // per state over j * (L + 1) + l
    ServiceLaw law_;
};

TrajectoryRecord simulate_trajectory(const DBmapModel& model, const ServiceLaw& law, int t, Rng& rng);

/// N(s;t) for s = 0..t: customers present at s that are still in service at t.
std::vector<int> effective_path(const TrajectoryRecord& trajectory, int t);

/// Generator for run `run` of a simulation seeded with `seed`.
Rng run_rng(std::uint64_t seed, std::uint64_t run);

struct EmpiricalResult {
    int time = 0;
    std::int64_t n_runs = 0;
    std::uint64_t seed = 0;
    std::vector<double> distribution; // p^_m
    std::vector<double> std_errors;   // sqrt(p^(1 - p^) / n)
    double mean = 0.0;
    double mean_se = 0.0;
    double factorial2 = 0.0;          // E[N (N - 1)]
    double factorial2_se = 0.0;
};

/// Aggregates n_runs independent trajectories; run r uses run_rng(seed, r),
/// so the result does not depend on the worker count.
EmpiricalResult empirical_distribution(const DBmapModel& model, const ServiceLaw& law, int t,
                                       std::int64_t n_runs, std::uint64_t seed, int workers = 1);

struct InvariantReport {
    std::int64_t trajectories = 0;
    std::int64_t checks = 0;
    std::int64_t endpoint_violations = 0;    // N(t;t) != N(t)
    std::int64_t domination_violations = 0;  // N(s;t) > N(s)
    std::int64_t monotonicity_violations = 0;

    std::int64_t violations() const
    {
        return endpoint_violations + domination_violations + monotonicity_violations;
    }
};

/// Checks the effective-process invariants of one trajectory for every
/// target horizon 1..trajectory.horizon.
InvariantReport check_effective_invariants(const TrajectoryRecord& trajectory);

/// Runs check_effective_invariants over n_runs trajectories of horizon t.
InvariantReport effective_invariant_sweep(const DBmapModel& model, const ServiceLaw& law, int t,
                                       std::int64_t n_runs, std::uint64_t seed, int workers = 1);

} // namespace transq::sim
