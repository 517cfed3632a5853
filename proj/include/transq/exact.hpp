#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "transq/arrival.hpp"
#include "transq/poly.hpp"
#include "transq/service.hpp"

namespace transq {

/// K x K matrix of series, row-major.
using PolyMatrix = std::vector<std::vector<Poly>>;

struct TransientResult {
    int time = 0;
    std::vector<double> distribution;      // p_0(t) .. p_N(t)
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> fano;            // empty when the mean is zero
    std::vector<double> factorial_moments; // mu_1 .. mu_k
    double normalization_defect = 0.0;    // |sum p_m + truncation_loss - 1|
    double truncation_loss = 0.0;
};

/// Substitution matrix applied at slot k of a horizon-t product:
/// entry (i,j) is D_ij(Phi(t-k) z + 1 - Phi(t-k)).
PolyMatrix build_slot_matrix(const DBmapModel& model, const ServiceLaw& law, int k, int t);

/// State-dependent generating functions g(z,t) = p0 T(z,0;t) ... T(z,t-1;t),
/// multiplied left to right as a row vector. Without max_degree the product
/// is exact (degree at most L t).
PgfVector transient_pgf(const DBmapModel& model, const ServiceLaw& law, int t,
                        std::optional<std::size_t> max_degree = std::nullopt);

/// p_0..p_up_to of G = sum_j G_j; by default every stored coefficient.
std::vector<double> distribution(const PgfVector& g, std::optional<std::size_t> up_to = std::nullopt);

/// mu_1..mu_k_max, the derivatives of G at z = 1.
std::vector<double> factorial_moments_from_pgf(const PgfVector& g, int k_max);

struct SolveOptions {
    int moments = 2;
    std::optional<std::size_t> max_degree;
};

/// Runs transient_pgf and derives the distribution and moments.
TransientResult solve_transient(const DBmapModel& model, const ServiceLaw& law, int t,
                                const SolveOptions& options = {});

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance from the first two derivative vectors g'(1,t), g''(1,t)
/// written as sums over powers of P. The factor before the first D'(1) in the
/// double sum is P^i.
MeanVariance mean_variance_closed(const DBmapModel& model, const ServiceLaw& law, int t);

struct LeibnizMoment {
    double value = 0.0;   // mu_m(t)
    RowVector derivative; // g^(m)(1,t)
};

/// mu_m(t) by expanding the m-th derivative of the slot product with the
/// multinomial Leibniz rule. Supports m <= 4.
LeibnizMoment factorial_moment_leibniz(const DBmapModel& model, const ServiceLaw& law, int t,
                                       int m);

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(int horizon, double last_tv);

    int horizon() const { return horizon_; }
    double last_tv() const { return last_tv_; }

private:
    int horizon_;
    double last_tv_;
};

struct StationaryResult {
    std::vector<double> distribution;
    int t_converged = 0;
    double last_tv = 0.0;
};

inline constexpr double kDefaultStationaryTol = 1e-10;
inline constexpr int kDefaultStationaryMaxTime = 10000;

/// Advances the horizon until the total-variation distance between
/// consecutive transient distributions drops below tol.
/// Throws NonConvergenceError if t_max is reached first.
StationaryResult stationary_distribution(const DBmapModel& model, const ServiceLaw& law,
                                         double tol = kDefaultStationaryTol,
                                         int t_max = kDefaultStationaryMaxTime);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

// Discrete-time M/M/inf: Bernoulli(p) arrivals, Geometric(alpha) service.

/// prod_{i=1..t} [1 + p alpha^i (z - 1)].
Poly mminf_closed_form(double p, double alpha, int t);

struct MminfMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> fano;
};

MminfMoments mminf_moments(double p, double alpha, int t);

/// Iterates G(z,tau) = G(1 - alpha + alpha z, tau - 1) (1 - p + p z) from G = 1.
Poly mminf_recursion(double p, double alpha, int t);

} // namespace transq
