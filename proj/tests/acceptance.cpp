// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "test_support.hpp"
#include "transq/cli.hpp"
#include "transq/exact.hpp"
#include "transq/models.hpp"
#include "transq/oracle.hpp"
#include "transq/sim.hpp"

using namespace transq;

namespace {

const std::string kModels = TRANSQ_MODELS_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::vector<double> grid()
{
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) {
        g.push_back(i / 10.0);
    }
    return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double worst = 0.0;
    for (std::size_t m = 0; m < std::max(a.size(), b.size()); ++m) {
        const double x = m < a.size() ? a[m] : 0.0;
        const double y = m < b.size() ? b[m] : 0.0;
        worst = std::max(worst, std::abs(x - y));
    }
    return worst;
}

double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// Independent expansion of prod_{i=lo..hi} [1 + p alpha^i (z - 1)].
std::vector<double> bernoulli_product(double p, double alpha, int lo, int hi)
{
    std::vector<double> c{1.0};
    for (int i = lo; i <= hi; ++i) {
        const double q = p * std::pow(alpha, i);
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t m = 0; m < c.size(); ++m) {
            next[m] += c[m] * (1.0 - q);
            next[m + 1] += c[m] * q;
        }
        c = std::move(next);
    }
    return c;
}

Outcome dual_engine_equivalence()
{
    struct Case {
        DBmapModel model;
        ServiceLaw law;
    };
    std::vector<Case> cases;
    cases.push_back({models::binomial_two_state(), models::binomial_two_state_service()});
    cases.push_back({models::binomial_two_state(), truncate_to_pmf(models::binomial_two_state_service(), 1e-12)});
    std::mt19937_64 gen(20240601);
    for (int i = 0; i < 20; ++i) {
        auto m = testing::random_model(gen, 3, 4);
        cases.push_back({std::move(m), testing::random_law(gen)});
    }
    double worst = 0.0;
    for (const auto& c : cases) {
        for (int t = 0; t <= 10; ++t) {
            worst = std::max(worst, max_abs_diff(distribution(transient_pgf(c.model, c.law, t)),
                                                 oracle::brute_distribution(c.model, c.law, t)));
        }
    }
    return {worst <= 1e-9, std::to_string(cases.size()) + " models, t<=10, max |exact - oracle| = " +
                               fmt("%.3e", worst) + " (tol 1e-9)"};
}

Outcome mminf_regression()
{
    double worst_coeff = 0.0, worst_mean = 0.0, worst_var = 0.0;
    for (double p : grid()) {
        for (double alpha : grid()) {
            const auto model = DBmapModel::from_bernoulli(p);
            const auto law = ServiceLaw::geometric(alpha);
            for (int t = 0; t <= 50; ++t) {
                const auto engine = distribution(transient_pgf(model, law, t));
                worst_coeff = std::max(worst_coeff, max_abs_diff(engine, mminf_closed_form(p, alpha, t).coeffs()));
                if (t == 0) {
                    continue;
                }
                const auto mv = mean_variance_closed(model, law, t);
                const double at = std::pow(alpha, t);
                const double mean = p * alpha * (1 - at) / (1 - alpha);
                const double var = mean - p * p * alpha * alpha * (1 - at * at) / (1 - alpha * alpha);
                worst_mean = std::max(worst_mean, std::abs(mv.mean - mean));
                worst_var = std::max(worst_var, std::abs(mv.variance - var));
            }
        }
    }
    const bool pass = worst_coeff <= 1e-12 && worst_mean <= 1e-12 && worst_var <= 1e-12;
    return {pass, "81 (p,alpha) pairs, t<=50: coeff " + fmt("%.3e", worst_coeff) + ", mean " +
                      fmt("%.3e", worst_mean) + ", variance " + fmt("%.3e", worst_var) + " (tol 1e-12)"};
}

Outcome moment_cross_checks()
{
    struct Case {
        DBmapModel model;
        ServiceLaw law;
    };
    const std::vector<Case> cases{{models::five_batch_two_state(), models::five_batch_service()},
                                  {models::binomial_two_state(), models::binomial_two_state_service()}};
    double worst_closed = 0.0, worst_leibniz = 0.0;
    for (const auto& c : cases) {
        for (int t = 1; t <= 30; ++t) {
            const auto mu = factorial_moments_from_pgf(transient_pgf(c.model, c.law, t), 2);
            const double var = mu[1] + mu[0] - mu[0] * mu[0];
            const auto mv = mean_variance_closed(c.model, c.law, t);
            worst_closed = std::max({worst_closed, rel_err(mv.mean, mu[0]), rel_err(mv.variance, var)});
            worst_leibniz = std::max({worst_leibniz, rel_err(factorial_moment_leibniz(c.model, c.law, t, 1).value, mu[0]),
                                      rel_err(factorial_moment_leibniz(c.model, c.law, t, 2).value, mu[1])});
        }
    }
    const bool pass = worst_closed <= 1e-9 && worst_leibniz <= 1e-9;
    return {pass, "two models, t<=30: closed-form rel " + fmt("%.3e", worst_closed) + ", Leibniz rel " +
                      fmt("%.3e", worst_leibniz) + " (tol 1e-9)"};
}

Outcome sub_poissonian()
{
    double largest = -INFINITY;
    int undefined = 0;
    for (double p : grid()) {
        for (double alpha : grid()) {
            for (int t = 1; t <= 50; ++t) {
                const auto mo = mminf_moments(p, alpha, t);
                if (!mo.fano) {
                    ++undefined;
                    continue;
                }
                largest = std::max(largest, *mo.fano);
            }
        }
    }
    return {largest < 1.0 && undefined == 0,
            "max Fano factor over 81x50 grid = " + fmt("%.6f", largest) + " (must be < 1)"};
}

Outcome ssa_reproduction()
{
    const auto model = models::binomial_two_state();
    const auto law = models::binomial_two_state_service();
    const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::int64_t runs = 50000;
    int cells = 0, within = 0;
    int mean_ok = 0, f2_ok = 0;
    double worst_z = 0.0;
    for (int t = 1; t <= 30; ++t) {
        const auto exact = solve_transient(model, law, t);
        const auto e = sim::empirical_distribution(model, law, t, runs, 1000 + static_cast<std::uint64_t>(t), workers);
        auto cell = [&](double est, double ref, double se) {
            ++cells;
            const double z = se > 0.0 ? std::abs(est - ref) / se : (est == ref ? 0.0 : INFINITY);
            worst_z = std::max(worst_z, z);
            const bool ok = z <= 4.0;
            within += ok;
            return ok;
        };
        mean_ok += cell(e.mean, exact.mean, e.mean_se);
        f2_ok += cell(e.factorial2, exact.factorial_moments[1], e.factorial2_se);
        for (std::size_t m = 0; m < exact.distribution.size(); ++m) {
            if (exact.distribution[m] < 1e-3) {
                continue;
            }
            const double est = m < e.distribution.size() ? e.distribution[m] : 0.0;
            const double se = m < e.std_errors.size() ? e.std_errors[m] : 0.0;
            cell(est, exact.distribution[m], se);
        }
    }
    const double frac = static_cast<double>(within) / cells;
    return {frac >= 0.95, "50000 runs x t=1..30: " + std::to_string(within) + "/" + std::to_string(cells) +
                              " cells within 4 SE (" + fmt("%.4f", frac) + ", need >= 0.95); mean " +
                              std::to_string(mean_ok) + "/30, F2 " + std::to_string(f2_ok) + "/30, max z " +
                              fmt("%.2f", worst_z)};
}

Outcome effective_invariants()
{
    const auto rep = sim::effective_invariant_sweep(models::five_batch_two_state(), models::five_batch_service(), 20,
                                                    10000, 77, 1);
    return {rep.violations() == 0 && rep.trajectories == 10000,
            std::to_string(rep.trajectories) + " trajectories, " + std::to_string(rep.checks) +
                " checks: endpoint " + std::to_string(rep.endpoint_violations) + ", domination " +
                std::to_string(rep.domination_violations) + ", monotonicity " +
                std::to_string(rep.monotonicity_violations) + " violations"};
}

Outcome normalisation_and_conservation()
{
    std::mt19937_64 gen(777);
    double worst_norm = 0.0, worst_drift = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto model = testing::random_model(gen, 3, 4);
        const auto law = testing::random_law(gen);
        for (int t = 0; t <= 50; ++t) {
            worst_norm = std::max(worst_norm, std::abs(eval(transient_pgf(model, law, t).total(), 1.0) - 1.0));
        }
        worst_drift = std::max(worst_drift, oracle::brute_solve(model, law, 50).max_step_drift);
    }
    return {worst_norm < 1e-9 && worst_drift < 1e-12, "100 random models, t<=50: max |G(1,t)-1| = " +
                                                          fmt("%.3e", worst_norm) + " (tol 1e-9), max oracle step drift = " +
                                                          fmt("%.3e", worst_drift) + " (tol 1e-12)"};
}

Outcome simulate_determinism()
{
    auto run_with = [](const std::string& workers) {
        std::ostringstream out, err;
        const int code = cli::run({"transq", "simulate", kModels + "/binomial_two_state.json", "--time", "12", "--runs",
                                   "20000", "--seed", "31337", "--workers", workers, "--effective-checks"},
                                  out, err);
        return std::make_pair(code, out.str());
    };
    const auto one = run_with("1");
    const auto two = run_with("2");
    const auto eight = run_with("8");
    const bool pass = one.first == 0 && two.first == 0 && eight.first == 0 && one.second == two.second &&
                      one.second == eight.second && !one.second.empty();
    return {pass, "simulate output " + std::to_string(one.second.size()) + " bytes, identical for workers 1/2/8: " +
                      (one.second == two.second && one.second == eight.second ? "yes" : "no")};
}

Outcome recursion_offset()
{
    double worst = 0.0, offset = 0.0;
    for (double p : grid()) {
        for (double alpha : grid()) {
            for (int t = 0; t <= 50; ++t) {
                const auto rec = mminf_recursion(p, alpha, t).coeffs();
                worst = std::max(worst, max_abs_diff(rec, bernoulli_product(p, alpha, 0, t - 1)));
                offset = std::max(offset, max_abs_diff(rec, mminf_closed_form(p, alpha, t).coeffs()));
            }
        }
    }
    return {worst <= 1e-12, "recursion vs prod_{i=0}^{t-1}: " + fmt("%.3e", worst) +
                                " (tol 1e-12); its distance from prod_{i=1}^{t} reaches " + fmt("%.3f", offset)};
}

} // namespace

int main()
{
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"AC1", "dual-engine equivalence", dual_engine_equivalence},
        {"AC2", "M/M/inf analytic regression", mminf_regression},
        {"AC3", "moment cross-checks", moment_cross_checks},
        {"AC4", "sub-Poissonian Fano factor", sub_poissonian},
        {"AC5", "SSA agreement (50000 runs)", ssa_reproduction},
        {"AC6", "effective-process pathwise invariants", effective_invariants},
        {"AC7", "normalisation and conservation", normalisation_and_conservation},
        {"AC8", "simulate determinism across workers", simulate_determinism},
        {"AC9", "M/M/inf recursion offset", recursion_offset},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s [%s] %s: %s (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
