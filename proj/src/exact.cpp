#include "transq/exact.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace transq {

namespace {

std::vector<Poly> batch_pgfs(const DBmapModel& model)
{
    const int k = model.num_states();
    std::vector<Poly> out;
    out.reserve(static_cast<std::size_t>(k * k));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            out.emplace_back(model.batch_weights(i, j));
        }
    }
    return out;
}

PolyMatrix compose_slot(const std::vector<Poly>& pgfs, int k_states, double survival)
{
    PolyMatrix slot(static_cast<std::size_t>(k_states));
    for (int i = 0; i < k_states; ++i) {
        auto& row = slot[static_cast<std::size_t>(i)];
        row.reserve(static_cast<std::size_t>(k_states));
        for (int j = 0; j < k_states; ++j) {
            row.push_back(affine_compose(pgfs[static_cast<std::size_t>(i * k_states + j)], survival,
                                         1.0 - survival));
        }
    }
    return slot;
}

// g <- g * slot, keeping K series.
std::vector<Poly> propagate(const std::vector<Poly>& g, const PolyMatrix& slot,
                            std::optional<std::size_t> max_degree)
{
    const std::size_t k = g.size();
    std::vector<Poly> next;
    next.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        Poly acc = Poly::constant(0.0);
        for (std::size_t i = 0; i < k; ++i) {
            acc = add(acc, mul(g[i], slot[i][j], max_degree));
        }
        next.push_back(std::move(acc));
    }
    return next;
}

// left * right for K x K series matrices.
PolyMatrix multiply(const PolyMatrix& left, const PolyMatrix& right)
{
    const std::size_t k = left.size();
    PolyMatrix out(k, std::vector<Poly>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            Poly acc = Poly::constant(0.0);
            for (std::size_t r = 0; r < k; ++r) {
                acc = add(acc, mul(left[i][r], right[r][j]));
            }
            out[i][j] = std::move(acc);
        }
    }
    return out;
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

PolyMatrix build_slot_matrix(const DBmapModel& model, const ServiceLaw& law, int k, int t)
{
    if (k < 0 || k >= t) {
        throw std::out_of_range("slot index k=" + std::to_string(k) + " outside [0, " +
                                std::to_string(t - 1) + "]");
    }
    return compose_slot(batch_pgfs(model), model.num_states(), law.survival(t - k));
}

PgfVector transient_pgf(const DBmapModel& model, const ServiceLaw& law, int t,
                        std::optional<std::size_t> max_degree)
{
    if (t < 0) {
        throw std::invalid_argument("horizon must be nonnegative");
    }
    const int k_states = model.num_states();
    std::vector<Poly> g;
    g.reserve(static_cast<std::size_t>(k_states));
    for (int j = 0; j < k_states; ++j) {
        g.push_back(Poly::constant(model.initial()(j)));
    }
    const auto pgfs = batch_pgfs(model);
    for (int k = 0; k < t; ++k) {
        g = propagate(g, compose_slot(pgfs, k_states, law.survival(t - k)), max_degree);
    }
    return PgfVector{std::move(g)};
}

std::vector<double> distribution(const PgfVector& g, std::optional<std::size_t> up_to)
{
    const Poly total = g.total();
    const std::size_t n = up_to ? *up_to + 1 : total.coeffs().size();
    std::vector<double> p(n);
    for (std::size_t m = 0; m < n; ++m) {
        p[m] = coefficient(total, m);
    }
    return p;
}

std::vector<double> factorial_moments_from_pgf(const PgfVector& g, int k_max)
{
    const Poly total = g.total();
    std::vector<double> mu;
    for (int k = 1; k <= k_max; ++k) {
        mu.push_back(eval(derivative(total, k), 1.0));
    }
    return mu;
}

TransientResult solve_transient(const DBmapModel& model, const ServiceLaw& law, int t,
                                const SolveOptions& options)
{
    const auto g = transient_pgf(model, law, t, options.max_degree);
    TransientResult r;
    r.time = t;
    r.distribution = distribution(g);
    const auto mu = factorial_moments_from_pgf(g, std::max(2, options.moments));
    r.factorial_moments.assign(mu.begin(), mu.begin() + std::max(0, options.moments));
    r.mean = mu[0];
    r.variance = mu[1] + mu[0] - mu[0] * mu[0];
    if (r.mean > 0.0) {
        r.fano = r.variance / r.mean;
    }
    r.truncation_loss = g.truncation_loss();
    double mass = 0.0;
    for (double p : r.distribution) {
        mass += p;
    }
    r.normalization_defect = std::abs(mass + r.truncation_loss - 1.0);
    return r;
}

MeanVariance mean_variance_closed(const DBmapModel& model, const ServiceLaw& law, int t)
{
    if (t <= 0) {
        return {};
    }
    const Matrix& p = model.transition_matrix();
    const Matrix d1 = derivative_matrix_at_one(model, 1);
    const Matrix d2 = derivative_matrix_at_one(model, 2);
    const int k = model.num_states();

    std::vector<Matrix> pow(static_cast<std::size_t>(t));
    pow[0] = Matrix::Identity(k, k);
    for (int r = 1; r < t; ++r) {
        pow[static_cast<std::size_t>(r)] = pow[static_cast<std::size_t>(r - 1)] * p;
    }
    auto pw = [&](int r) -> const Matrix& { return pow[static_cast<std::size_t>(r)]; };
    std::vector<double> phi(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        phi[static_cast<std::size_t>(i)] = law.survival(t - i);
    }
    auto ph = [&](int i) { return phi[static_cast<std::size_t>(i)]; };

    const RowVector& p0 = model.initial();
    RowVector g1 = RowVector::Zero(k);
    RowVector g2 = RowVector::Zero(k);
    for (int i = 0; i < t; ++i) {
        const RowVector left = p0 * pw(i);
        g1 += ph(i) * (left * d1 * pw(t - 1 - i));
        g2 += ph(i) * ph(i) * (left * d2 * pw(t - 1 - i));
        const RowVector left_d1 = left * d1;
        for (int j = i + 1; j < t; ++j) {
            g2 += 2.0 * ph(i) * ph(j) * (left_d1 * pw(j - i - 1) * d1 * pw(t - 1 - j));
        }
    }
    const double mean = g1.sum();
    return {mean, g2.sum() + mean - mean * mean};
}

LeibnizMoment factorial_moment_leibniz(const DBmapModel& model, const ServiceLaw& law, int t, int m)
{
    if (m < 0 || m > 4) {
        throw std::invalid_argument("Leibniz expansion supports derivative orders 0..4");
    }
    const int k = model.num_states();
    if (t <= 0) {
        LeibnizMoment out;
        out.derivative = m == 0 ? model.initial() : RowVector::Zero(k);
        out.value = out.derivative.sum();
        return out;
    }

    // factor[i][l] = Phi(t-i)^l D^(l)(1) / l!
    std::vector<Matrix> dk;
    for (int l = 0; l <= m; ++l) {
        dk.push_back(derivative_matrix_at_one(model, l) / factorial(l));
    }
    std::vector<double> phi(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        phi[static_cast<std::size_t>(i)] = law.survival(t - i);
    }
    // tail[r] = P^r, used once the composition is exhausted.
    const Matrix& p = model.transition_matrix();
    std::vector<Matrix> tail(static_cast<std::size_t>(t) + 1);
    tail[0] = Matrix::Identity(k, k);
    for (int r = 1; r <= t; ++r) {
        tail[static_cast<std::size_t>(r)] = tail[static_cast<std::size_t>(r - 1)] * p;
    }

    RowVector sum = RowVector::Zero(k);
    // Depth-first over l_0 + ... + l_{t-1} = m, carrying p0 * prod_{<i} factors.
    auto walk = [&](auto&& self, int i, int remaining, const RowVector& prefix) -> void {
        if (remaining == 0) {
            sum += prefix * tail[static_cast<std::size_t>(t - i)];
            return;
        }
        if (i == t) {
            return;
        }
        const double ph = phi[static_cast<std::size_t>(i)];
        double weight = 1.0;
        for (int l = 0; l <= remaining; ++l) {
            if (l > 0) {
                weight *= ph;
                if (weight == 0.0) {
                    break;
                }
            }
            self(self, i + 1, remaining - l, RowVector(weight * (prefix * dk[static_cast<std::size_t>(l)])));
        }
    };
    walk(walk, 0, m, model.initial());

    LeibnizMoment out;
    out.derivative = factorial(m) * sum;
    out.value = out.derivative.sum();
    return out;
}

NonConvergenceError::NonConvergenceError(int horizon, double last_tv)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(17);
          os << "no stationary limit detected by t=" << horizon << " (last TV distance " << last_tv << ")";
          return os.str();
      }()),
      horizon_(horizon), last_tv_(last_tv)
{
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b)
{
    const std::size_t n = std::max(a.size(), b.size());
    double tv = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double x = m < a.size() ? a[m] : 0.0;
        const double y = m < b.size() ? b[m] : 0.0;
        tv += std::abs(x - y);
    }
    return 0.5 * tv;
}

StationaryResult stationary_distribution(const DBmapModel& model, const ServiceLaw& law, double tol,
                                         int t_max)
{
    if (!(tol > 0.0)) {
        throw std::invalid_argument("stationary tolerance must be positive");
    }
    const int k_states = model.num_states();
    const auto pgfs = batch_pgfs(model);

    // With r = t - k the horizon-t product is T_(t) T_(t-1) ... T_(1), where
    // T_(r) substitutes Phi(r). Going from t to t+1 prepends T_(t+1) on the left.
    PolyMatrix product(static_cast<std::size_t>(k_states),
                       std::vector<Poly>(static_cast<std::size_t>(k_states)));
    for (int i = 0; i < k_states; ++i) {
        product[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Poly::constant(1.0);
    }
    auto dist_of = [&](const PolyMatrix& prod) {
        std::vector<Poly> g(static_cast<std::size_t>(k_states));
        for (int j = 0; j < k_states; ++j) {
            Poly acc = Poly::constant(0.0);
            for (int i = 0; i < k_states; ++i) {
                acc = add(acc, scale(prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                     model.initial()(i)));
            }
            g[static_cast<std::size_t>(j)] = std::move(acc);
        }
        return distribution(PgfVector{std::move(g)});
    };

    std::vector<double> prev = dist_of(product);
    double tv = INFINITY;
    for (int t = 1; t <= t_max; ++t) {
        product = multiply(compose_slot(pgfs, k_states, law.survival(t)), product);
        auto cur = dist_of(product);
        tv = total_variation(prev, cur);
        if (tv < tol) {
            return {std::move(cur), t, tv};
        }
        prev = std::move(cur);
    }
    throw NonConvergenceError(t_max, tv);
}

Poly mminf_closed_form(double p, double alpha, int t)
{
    Poly g = Poly::constant(1.0);
    double a_i = 1.0;
    for (int i = 1; i <= t; ++i) {
        a_i *= alpha;
        g = mul(g, Poly{1.0 - p * a_i, p * a_i});
    }
    return g;
}

MminfMoments mminf_moments(double p, double alpha, int t)
{
    MminfMoments out;
    const double at = std::pow(alpha, t);
    out.mean = p * alpha * (1.0 - at) / (1.0 - alpha);
    out.variance = out.mean - p * p * alpha * alpha * (1.0 - at * at) / (1.0 - alpha * alpha);
    if (out.mean > 0.0) {
        out.fano = out.variance / out.mean;
    }
    return out;
}

Poly mminf_recursion(double p, double alpha, int t)
{
    Poly g = Poly::constant(1.0);
    const Poly arrivals{1.0 - p, p};
    for (int tau = 1; tau <= t; ++tau) {
        g = mul(affine_compose(g, alpha, 1.0 - alpha), arrivals);
    }
    return g;
}

} // namespace transq
