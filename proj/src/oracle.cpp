#include "transq/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace transq::oracle {

namespace {

// Pascal triangle rows 0..n.
std::vector<std::vector<double>> pascal(int n)
{
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
        auto& row = c[static_cast<std::size_t>(l)];
        row.assign(static_cast<std::size_t>(l) + 1, 1.0);
        for (int r = 1; r < l; ++r) {
            row[static_cast<std::size_t>(r)] = c[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(r - 1)] +
                                               c[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(r)];
        }
    }
    return c;
}

double transition_prob_with(const DBmapModel& model, double phi,
                            const std::vector<std::vector<double>>& binom, int i, int j, int delta)
{
    if (delta < 0 || delta > model.max_batch()) {
        return 0.0;
    }
    double sum = 0.0;
    for (int l = delta; l <= model.max_batch(); ++l) {
        const double d = model.batch(l)(i, j);
        if (d == 0.0) {
            continue;
        }
        sum += d * binom[static_cast<std::size_t>(l)][static_cast<std::size_t>(delta)] *
               std::pow(phi, delta) * std::pow(1.0 - phi, l - delta);
    }
    return sum;
}

} // namespace

double transition_prob(const DBmapModel& model, const ServiceLaw& law, int i, int j, int delta,
                       int horizon_gap)
{
    if (horizon_gap < 1) {
        throw std::invalid_argument("horizon gap t - s must be at least 1");
    }
    return transition_prob_with(model, law.survival(horizon_gap), pascal(model.max_batch()), i, j, delta);
}

TransitionKernel::TransitionKernel(const DBmapModel& model, const ServiceLaw& law, int horizon_gap)
    : k_(model.num_states()), max_delta_(model.max_batch())
{
    if (horizon_gap < 1) {
        throw std::invalid_argument("horizon gap t - s must be at least 1");
    }
    const double phi = law.survival(horizon_gap);
    const auto binom = pascal(max_delta_);
    values_.resize(static_cast<std::size_t>(k_ * k_ * (max_delta_ + 1)));
    for (int i = 0; i < k_; ++i) {
        for (int j = 0; j < k_; ++j) {
            for (int d = 0; d <= max_delta_; ++d) {
                values_[static_cast<std::size_t>((i * k_ + j) * (max_delta_ + 1) + d)] =
                    transition_prob_with(model, phi, binom, i, j, d);
            }
        }
    }
}

double TransitionKernel::operator()(int i, int j, int delta) const
{
    if (delta < 0 || delta > max_delta_) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>((i * k_ + j) * (max_delta_ + 1) + delta)];
}

KernelCache::KernelCache(const DBmapModel& model, const ServiceLaw& law) : model_(model), law_(law) {}

const TransitionKernel& KernelCache::at(int horizon_gap)
{
    auto it = kernels_.find(horizon_gap);
    if (it == kernels_.end()) {
        it = kernels_.emplace(horizon_gap, TransitionKernel(model_, law_, horizon_gap)).first;
    }
    return it->second;
}

JointState initial_state(const DBmapModel& model, int t)
{
    JointState st;
    st.s = 0;
    st.t = t;
    st.table = Matrix::Zero(model.num_states(), 1);
    st.table.col(0) = model.initial().transpose();
    return st;
}

JointState joint_update(const JointState& state, const DBmapModel& model, KernelCache& cache)
{
    if (state.s >= state.t) {
        throw std::invalid_argument("joint_update: slot index already at the horizon");
    }
    const auto& kernel = cache.at(state.t - state.s);
    const int k = model.num_states();
    const int l_max = model.max_batch();
    const auto cols = state.table.cols();

    JointState next;
    next.s = state.s + 1;
    next.t = state.t;
    next.table = Matrix::Zero(k, cols + l_max);
    for (int i = 0; i < k; ++i) {
        for (Eigen::Index m = 0; m < cols; ++m) {
            const double mass = state.table(i, m);
            if (mass == 0.0) {
                continue;
            }
            for (int j = 0; j < k; ++j) {
                for (int d = 0; d <= l_max; ++d) {
                    next.table(j, m + d) += mass * kernel(i, j, d);
                }
            }
        }
    }
    return next;
}

JointState joint_update(const JointState& state, const DBmapModel& model, const ServiceLaw& law)
{
    KernelCache cache(model, law);
    return joint_update(state, model, cache);
}

BruteResult brute_solve(const DBmapModel& model, const ServiceLaw& law, int t)
{
    if (t < 0) {
        throw std::invalid_argument("horizon must be nonnegative");
    }
    const long long size = static_cast<long long>(model.num_states()) * model.max_batch() * t;
    if (size > kMaxTableSize) {
        throw std::length_error("oracle table K*L*t = " + std::to_string(size) + " exceeds " +
                                std::to_string(kMaxTableSize));
    }
    KernelCache cache(model, law);
    JointState st = initial_state(model, t);
    BruteResult out;
    double total = st.total();
    while (st.s < t) {
        st = joint_update(st, model, cache);
        const double next_total = st.total();
        out.max_step_drift = std::max(out.max_step_drift, std::abs(next_total - total));
        total = next_total;
    }
    out.distribution.resize(static_cast<std::size_t>(st.table.cols()));
    for (Eigen::Index m = 0; m < st.table.cols(); ++m) {
        out.distribution[static_cast<std::size_t>(m)] = st.table.col(m).sum();
    }
    return out;
}

std::vector<double> brute_distribution(const DBmapModel& model, const ServiceLaw& law, int t)
{
    return brute_solve(model, law, t).distribution;
}

} // namespace transq::oracle
