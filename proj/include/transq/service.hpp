#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace transq {

/// Generator used everywhere randomness is needed. mt19937_64 is fully
/// specified by the standard, so streams are identical across platforms.
using Rng = std::mt19937_64;

/// Uniform double in (0,1) built from the top 53 bits of one draw.
double uniform_open01(Rng& rng);

/// P(Y = k) = (1 - alpha) alpha^(k-1), k >= 1.
struct Geometric {
    double alpha;
};

/// Y = 1 + Z with Z ~ Poisson(lambda).
struct ShiftedPoisson {
    double lambda;
};

/// Y = d with probability one.
struct Deterministic {
    int d;
};

/// q[k-1] = P(Y = k) for k = 1..M.
struct ExplicitPmf {
    std::vector<double> q;
};

/// Service-time law on {1, 2, ...}.
class ServiceLaw {
public:
    using Variant = std::variant<Geometric, ShiftedPoisson, Deterministic, ExplicitPmf>;

    static ServiceLaw geometric(double alpha);
    static ServiceLaw shifted_poisson(double lambda);
    static ServiceLaw deterministic(int d);
    static ServiceLaw pmf(std::vector<double> q);

    const Variant& variant() const { return law_; }
    std::string name() const;

    /// Phi(t) = P(Y > t).
    double survival(std::int64_t t) const;
    /// P(Y = k).
    double probability(std::int64_t k) const;
    double mean() const;

    int sample(Rng& rng) const;

    friend bool operator==(const ServiceLaw& a, const ServiceLaw& b);

private:
    explicit ServiceLaw(Variant law);

    Variant law_;
    // Suffix sums for ExplicitPmf: tail_[t] = sum_{k > t} q_k; cdf_ for sampling.
    std::vector<double> tail_;
    std::vector<double> cdf_;
};

/// Truncates any law to an ExplicitPmf whose dropped tail mass is below
/// tail_tol; the dropped mass is added to the last retained point.
ServiceLaw truncate_to_pmf(const ServiceLaw& law, double tail_tol);

} // namespace transq
