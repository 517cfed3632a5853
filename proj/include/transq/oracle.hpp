#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "transq/arrival.hpp"
#include "transq/service.hpp"

namespace transq {

/// Brute-force solver that walks the joint law of (background state,
/// effective count) slot by slot. Deliberately naive; it only exists to
/// check the series engine on small instances.
namespace oracle {

/// Joint probabilities p_{i,m}(s;t): rows are background states, columns the
/// number of customers still in service at the target horizon t.
struct JointState {
    int s = 0;
    int t = 0;
    Matrix table; // K x (L s + 1)

    double total() const { return table.sum(); }
};

/// Probability of moving i -> j in one slot while exactly delta of the
/// arriving batch survive past the gap horizon_gap = t - s.
double transition_prob(const DBmapModel& model, const ServiceLaw& law, int i, int j, int delta,
                       int horizon_gap);

/// Transition probabilities for one horizon gap, indexed [i][j][delta].
class TransitionKernel {
public:
    TransitionKernel(const DBmapModel& model, const ServiceLaw& law, int horizon_gap);

    double operator()(int i, int j, int delta) const;
    int max_delta() const { return max_delta_; }

private:
    int k_;
    int max_delta_;
    std::vector<double> values_;
};

/// Kernels memoised by horizon gap; the kernel for a slot depends only on t - s.
class KernelCache {
public:
    KernelCache(const DBmapModel& model, const ServiceLaw& law);

    const TransitionKernel& at(int horizon_gap);

private:
    const DBmapModel& model_;
    const ServiceLaw& law_;
    std::map<int, TransitionKernel> kernels_;
};

/// No customers at s = 0; column 0 holds p0.
JointState initial_state(const DBmapModel& model, int t);

JointState joint_update(const JointState& state, const DBmapModel& model, const ServiceLaw& law);
JointState joint_update(const JointState& state, const DBmapModel& model, KernelCache& cache);

/// Largest K L t accepted by brute_distribution.
inline constexpr long long kMaxTableSize = 1'000'000;

struct BruteResult {
    std::vector<double> distribution; // p_0(t) .. p_{L t}(t)
    double max_step_drift = 0.0;      // largest |total(s+1) - total(s)|
};

/// Throws std::length_error when K L t exceeds kMaxTableSize.
BruteResult brute_solve(const DBmapModel& model, const ServiceLaw& law, int t);
std::vector<double> brute_distribution(const DBmapModel& model, const ServiceLaw& law, int t);

} // namespace oracle
} // namespace transq
