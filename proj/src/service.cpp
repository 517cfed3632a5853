#include "transq/service.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace transq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double poisson_pmf(double lambda, std::int64_t i)
{
    if (i < 0) {
        return 0.0;
    }
    const auto x = static_cast<double>(i);
    return std::exp(x * std::log(lambda) - lambda - std::lgamma(x + 1.0));
}

// P(Z >= t) for Z ~ Poisson(lambda), t >= 1.
double poisson_upper_tail(double lambda, std::int64_t t)
{
    if (static_cast<double>(t) <= lambda) {
        // Left of the mode the tail is at least ~1/2; the finite complement is exact enough.
        double term = std::exp(-lambda);
        double cdf = term;
        for (std::int64_t i = 1; i < t; ++i) {
            term *= lambda / static_cast<double>(i);
            cdf += term;
        }
        return std::max(0.0, 1.0 - cdf);
    }
    // Right of the mode the terms decrease monotonically, so sum them directly.
    double term = poisson_pmf(lambda, t);
    double sum = 0.0;
    for (std::int64_t i = t; term > 0.0; ++i) {
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
        term *= lambda / static_cast<double>(i + 1);
    }
    return sum;
}

} // namespace

double uniform_open01(Rng& rng)
{
    // (k + 0.5) / 2^53 lies strictly inside (0,1).
    const std::uint64_t k = rng() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

ServiceLaw::ServiceLaw(Variant law) : law_(std::move(law))
{
    if (const auto* pmf = std::get_if<ExplicitPmf>(&law_)) {
        const auto& q = pmf->q;
        tail_.assign(q.size() + 1, 0.0);
        for (std::size_t t = q.size(); t-- > 0;) {
            tail_[t] = tail_[t + 1] + q[t];
        }
        cdf_.resize(q.size());
        std::partial_sum(q.begin(), q.end(), cdf_.begin());
    }
}

ServiceLaw ServiceLaw::geometric(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("geometric service needs alpha in (0,1)");
    }
    return ServiceLaw(Geometric{alpha});
}

ServiceLaw ServiceLaw::shifted_poisson(double lambda)
{
    if (!(lambda > 0.0 && std::isfinite(lambda))) {
        throw std::invalid_argument("shifted Poisson service needs lambda > 0");
    }
    return ServiceLaw(ShiftedPoisson{lambda});
}

ServiceLaw ServiceLaw::deterministic(int d)
{
    if (d < 1) {
        throw std::invalid_argument("deterministic service time must be >= 1");
    }
    return ServiceLaw(Deterministic{d});
}

ServiceLaw ServiceLaw::pmf(std::vector<double> q)
{
    if (q.empty()) {
        throw std::invalid_argument("service pmf must have at least one entry");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (!(q[k] >= 0.0 && q[k] <= 1.0)) {
            throw std::invalid_argument("service pmf entry q_" + std::to_string(k + 1) +
                                        " outside [0,1]");
        }
        total += q[k];
    }
    if (!(std::abs(total - 1.0) <= 1e-12)) {
        throw std::invalid_argument("service pmf sums to " + std::to_string(total) + ", not 1");
    }
    return ServiceLaw(ExplicitPmf{std::move(q)});
}

std::string ServiceLaw::name() const
{
    return std::visit(overloaded{
                          [](const Geometric& g) { return "geometric(" + std::to_string(g.alpha) + ")"; },
                          [](const ShiftedPoisson& s) {
                              return "shifted_poisson(" + std::to_string(s.lambda) + ")";
                          },
                          [](const Deterministic& d) { return "deterministic(" + std::to_string(d.d) + ")"; },
                          [](const ExplicitPmf& p) { return "pmf(M=" + std::to_string(p.q.size()) + ")"; },
                      },
                      law_);
}

double ServiceLaw::survival(std::int64_t t) const
{
    if (t <= 0) {
        return 1.0;
    }
    return std::visit(overloaded{
                          [t](const Geometric& g) { return std::pow(g.alpha, static_cast<double>(t)); },
                          [t](const ShiftedPoisson& s) { return poisson_upper_tail(s.lambda, t); },
                          [t](const Deterministic& d) { return t < d.d ? 1.0 : 0.0; },
                          [t, this](const ExplicitPmf& p) {
                              return static_cast<std::size_t>(t) >= p.q.size()
                                         ? 0.0
                                         : tail_[static_cast<std::size_t>(t)];
                          },
                      },
                      law_);
}

double ServiceLaw::probability(std::int64_t k) const
{
    if (k < 1) {
        return 0.0;
    }
    return std::visit(overloaded{
                          [k](const Geometric& g) {
                              return (1.0 - g.alpha) * std::pow(g.alpha, static_cast<double>(k - 1));
                          },
                          [k](const ShiftedPoisson& s) { return poisson_pmf(s.lambda, k - 1); },
                          [k](const Deterministic& d) { return k == d.d ? 1.0 : 0.0; },
                          [k](const ExplicitPmf& p) {
                              return static_cast<std::size_t>(k) > p.q.size()
                                         ? 0.0
                                         : p.q[static_cast<std::size_t>(k - 1)];
                          },
                      },
                      law_);
}

double ServiceLaw::mean() const
{
    return std::visit(overloaded{
                          [](const Geometric& g) { return 1.0 / (1.0 - g.alpha); },
                          [](const ShiftedPoisson& s) { return 1.0 + s.lambda; },
                          [](const Deterministic& d) { return static_cast<double>(d.d); },
                          [](const ExplicitPmf& p) {
                              double m = 0.0;
                              for (std::size_t k = 0; k < p.q.size(); ++k) {
                                  m += static_cast<double>(k + 1) * p.q[k];
                              }
                              return m;
                          },
                      },
                      law_);
}

int ServiceLaw::sample(Rng& rng) const
{
    const double u = uniform_open01(rng);
    return std::visit(
        overloaded{
            [u](const Geometric& g) {
                const double y = 1.0 + std::floor(std::log(u) / std::log(g.alpha));
                return static_cast<int>(std::min(y, static_cast<double>(std::numeric_limits<int>::max())));
            },
            [u](const ShiftedPoisson& s) {
                double term = std::exp(-s.lambda);
                double cdf = term;
                int z = 0;
                while (u > cdf) {
                    ++z;
                    term *= s.lambda / z;
                    const double next = cdf + term;
                    if (next == cdf) {
                        break; // rounding floor reached
                    }
                    cdf = next;
                }
                return 1 + z;
            },
            [](const Deterministic& d) { return d.d; },
            [u, this](const ExplicitPmf& p) {
                auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                if (it == cdf_.end()) {
                    // u beyond the rounded total: take the last point with mass.
                    std::size_t k = p.q.size();
                    while (k > 1 && p.q[k - 1] == 0.0) {
                        --k;
                    }
                    return static_cast<int>(k);
                }
                return static_cast<int>(it - cdf_.begin()) + 1;
            },
        },
        law_);
}

bool operator==(const ServiceLaw& a, const ServiceLaw& b)
{
    return std::visit(
        overloaded{
            [](const Geometric& x, const Geometric& y) { return x.alpha == y.alpha; },
            [](const ShiftedPoisson& x, const ShiftedPoisson& y) { return x.lambda == y.lambda; },
            [](const Deterministic& x, const Deterministic& y) { return x.d == y.d; },
            [](const ExplicitPmf& x, const ExplicitPmf& y) { return x.q == y.q; },
            [](const auto&, const auto&) { return false; },
        },
        a.law_, b.law_);
}

ServiceLaw truncate_to_pmf(const ServiceLaw& law, double tail_tol)
{
    if (std::holds_alternative<ExplicitPmf>(law.variant())) {
        return law;
    }
    std::vector<double> q;
    std::int64_t k = 1;
    while (true) {
        q.push_back(law.probability(k));
        if (law.survival(k) < tail_tol) {
            break;
        }
        ++k;
    }
    q.back() += law.survival(k);
    return ServiceLaw::pmf(std::move(q));
}

} // namespace transq
