#include "transq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace transq::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::size_t pick(const std::vector<double>& cdf, double u)
{
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
        // u above the rounded total: last outcome with positive weight.
        std::size_t idx = cdf.size() - 1;
        while (idx > 0 && cdf[idx] == cdf[idx - 1]) {
            --idx;
        }
        return idx;
    }
    return static_cast<std::size_t>(it - cdf.begin());
}

// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end, slot).
template <class Fn>
void run_partitioned(std::int64_t n, int workers, Fn&& fn)
{
    workers = std::max(1, static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(n, 1))));
    if (workers == 1) {
        fn(0, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = std::min(n, w * chunk);
        const std::int64_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace

Rng run_rng(std::uint64_t seed, std::uint64_t run)
{
    return Rng(splitmix64(splitmix64(seed) ^ run));
}

Simulator::Simulator(const DBmapModel& model, ServiceLaw law)
    : k_(model.num_states()), l_max_(model.max_batch()), law_(std::move(law))
{
    initial_cdf_.resize(static_cast<std::size_t>(k_));
    double acc = 0.0;
    for (int i = 0; i < k_; ++i) {
        acc += model.initial()(i);
        initial_cdf_[static_cast<std::size_t>(i)] = acc;
    }
    transition_cdf_.resize(static_cast<std::size_t>(k_));
    for (int i = 0; i < k_; ++i) {
        auto& cdf = transition_cdf_[static_cast<std::size_t>(i)];
        cdf.reserve(static_cast<std::size_t>(k_ * (l_max_ + 1)));
        double c = 0.0;
        for (int j = 0; j < k_; ++j) {
            for (int l = 0; l <= l_max_; ++l) {
                c += model.batch(l)(i, j);
                cdf.push_back(c);
            }
        }
    }
}

int Simulator::sample_initial(Rng& rng) const
{
    return static_cast<int>(pick(initial_cdf_, uniform_open01(rng)));
}

std::pair<int, int> Simulator::sample_transition(int state, Rng& rng) const
{
    const auto idx = static_cast<int>(pick(transition_cdf_[static_cast<std::size_t>(state)], uniform_open01(rng)));
    return {idx / (l_max_ + 1), idx % (l_max_ + 1)};
}

TrajectoryRecord Simulator::trajectory(int t, Rng& rng) const
{
    if (t < 0) {
        throw std::invalid_argument("horizon must be nonnegative");
    }
    TrajectoryRecord rec;
    rec.horizon = t;
    rec.state_path.reserve(static_cast<std::size_t>(t) + 1);
    rec.state_path.push_back(sample_initial(rng));
    // Difference array over slots 0..t+1.
    std::vector<int> delta(static_cast<std::size_t>(t) + 2, 0);
    for (int k = 0; k < t; ++k) {
        const auto [next, batch] = sample_transition(rec.state_path.back(), rng);
        rec.state_path.push_back(next);
        if (batch == 0) {
            continue;
        }
        Arrival a;
        a.epoch = k;
        a.service_times.reserve(static_cast<std::size_t>(batch));
        for (int c = 0; c < batch; ++c) {
            const int y = law_.sample(rng);
            a.service_times.push_back(y);
            // present on slots k .. k + y - 1
            const auto last = static_cast<std::int64_t>(k) + y - 1;
            delta[static_cast<std::size_t>(k)] += 1;
            if (last < t) {
                delta[static_cast<std::size_t>(last) + 1] -= 1;
            }
        }
        rec.arrivals.push_back(std::move(a));
    }
    rec.counts.resize(static_cast<std::size_t>(t) + 1);
    int running = 0;
    for (int u = 0; u <= t; ++u) {
        running += delta[static_cast<std::size_t>(u)];
        rec.counts[static_cast<std::size_t>(u)] = running;
    }
    return rec;
}

int Simulator::count_at_horizon(int t, Rng& rng) const
{
    int state = sample_initial(rng);
    int present = 0;
    for (int k = 0; k < t; ++k) {
        const auto [next, batch] = sample_transition(state, rng);
        state = next;
        for (int c = 0; c < batch; ++c) {
            if (law_.sample(rng) > t - k) {
                ++present;
            }
        }
    }
    return present;
}

TrajectoryRecord simulate_trajectory(const DBmapModel& model, const ServiceLaw& law, int t, Rng& rng)
{
    return Simulator(model, law).trajectory(t, rng);
}

std::vector<int> effective_path(const TrajectoryRecord& trajectory, int t)
{
    if (t < 0 || t > trajectory.horizon) {
        throw std::out_of_range("effective_path: target beyond the trajectory horizon");
    }
    std::vector<int> path(static_cast<std::size_t>(t) + 1, 0);
    for (int s = 0; s <= t; ++s) {
        int n = 0;
        for (const auto& a : trajectory.arrivals) {
            if (a.epoch > s) {
                break;
            }
            for (int y : a.service_times) {
                if (y > s - a.epoch && y > t - a.epoch) {
                    ++n;
                }
            }
        }
        path[static_cast<std::size_t>(s)] = n;
    }
    return path;
}

EmpiricalResult empirical_distribution(const DBmapModel& model, const ServiceLaw& law, int t,
                                       std::int64_t n_runs, std::uint64_t seed, int workers)
{
    if (n_runs < 1) {
        throw std::invalid_argument("need at least one run");
    }
    const Simulator simulator(model, law);
    std::vector<std::vector<std::int64_t>> partial(static_cast<std::size_t>(std::max(1, workers)));
    run_partitioned(n_runs, workers, [&](std::int64_t begin, std::int64_t end, int slot) {
        auto& hist = partial[static_cast<std::size_t>(slot)];
        for (std::int64_t r = begin; r < end; ++r) {
            Rng rng = run_rng(seed, static_cast<std::uint64_t>(r));
            const auto n = static_cast<std::size_t>(simulator.count_at_horizon(t, rng));
            if (hist.size() <= n) {
                hist.resize(n + 1, 0);
            }
            ++hist[n];
        }
    });

    std::vector<std::int64_t> hist;
    for (const auto& h : partial) {
        if (hist.size() < h.size()) {
            hist.resize(h.size(), 0);
        }
        for (std::size_t m = 0; m < h.size(); ++m) {
            hist[m] += h[m];
        }
    }

    EmpiricalResult out;
    out.time = t;
    out.n_runs = n_runs;
    out.seed = seed;
    const auto n = static_cast<double>(n_runs);
    double s1 = 0.0, s2 = 0.0, f1 = 0.0, f2 = 0.0;
    for (std::size_t m = 0; m < hist.size(); ++m) {
        const double p = static_cast<double>(hist[m]) / n;
        out.distribution.push_back(p);
        out.std_errors.push_back(std::sqrt(p * (1.0 - p) / n));
        const auto c = static_cast<double>(hist[m]);
        const auto x = static_cast<double>(m);
        const double ff = x * (x - 1.0);
        s1 += c * x;
        s2 += c * x * x;
        f1 += c * ff;
        f2 += c * ff * ff;
    }
    out.mean = s1 / n;
    out.factorial2 = f1 / n;
    if (n_runs > 1) {
        const double var = std::max(0.0, (s2 - n * out.mean * out.mean) / (n - 1.0));
        const double fvar = std::max(0.0, (f2 - n * out.factorial2 * out.factorial2) / (n - 1.0));
        out.mean_se = std::sqrt(var / n);
        out.factorial2_se = std::sqrt(fvar / n);
    }
    return out;
}

InvariantReport check_effective_invariants(const TrajectoryRecord& trajectory)
{
    InvariantReport rep;
    rep.trajectories = 1;
    for (int t = 1; t <= trajectory.horizon; ++t) {
        const auto path = effective_path(trajectory, t);
        if (path[static_cast<std::size_t>(t)] != trajectory.counts[static_cast<std::size_t>(t)]) {
            ++rep.endpoint_violations;
        }
        for (int s = 0; s <= t; ++s) {
            ++rep.checks;
            if (path[static_cast<std::size_t>(s)] > trajectory.counts[static_cast<std::size_t>(s)]) {
                ++rep.domination_violations;
            }
            if (s > 0 && path[static_cast<std::size_t>(s - 1)] > path[static_cast<std::size_t>(s)]) {
                ++rep.monotonicity_violations;
            }
        }
    }
    return rep;
}

InvariantReport effective_invariant_sweep(const DBmapModel& model, const ServiceLaw& law, int t,
                                       std::int64_t n_runs, std::uint64_t seed, int workers)
{
    const Simulator simulator(model, law);
    std::vector<InvariantReport> partial(static_cast<std::size_t>(std::max(1, workers)));
    run_partitioned(n_runs, workers, [&](std::int64_t begin, std::int64_t end, int slot) {
        auto& acc = partial[static_cast<std::size_t>(slot)];
        for (std::int64_t r = begin; r < end; ++r) {
            Rng rng = run_rng(seed, static_cast<std::uint64_t>(r));
            const auto rep = check_effective_invariants(simulator.trajectory(t, rng));
            acc.trajectories += rep.trajectories;
            acc.checks += rep.checks;
            acc.endpoint_violations += rep.endpoint_violations;
            acc.domination_violations += rep.domination_violations;
            acc.monotonicity_violations += rep.monotonicity_violations;
        }
    });
    InvariantReport total;
    for (const auto& p : partial) {
        total.trajectories += p.trajectories;
        total.checks += p.checks;
        total.endpoint_violations += p.endpoint_violations;
        total.domination_violations += p.domination_violations;
        total.monotonicity_violations += p.monotonicity_violations;
    }
    return total;
}

} // namespace transq::sim
