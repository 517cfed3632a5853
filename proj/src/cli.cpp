#include "transq/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "transq/exact.hpp"
#include "transq/model_io.hpp"
#include "transq/oracle.hpp"
#include "transq/sim.hpp"

namespace transq::cli {

namespace {

using nlohmann::json;

constexpr double kTruncationLimit = 1e-6;
constexpr double kOracleTol = 1e-9;
constexpr double kSigmaLimit = 4.0;
constexpr double kCellFloor = 1e-3;
constexpr std::uint64_t kFallbackSeed = 1;

struct ModelArgs {
    std::string path;
    std::string dump_path;
};

struct OutputArgs {
    std::string format = "json";
    std::string out_path;
};

void add_model_args(CLI::App* cmd, ModelArgs& m)
{
    cmd->add_option("model", m.path, "Model file (JSON)")->required();
    cmd->add_option("--dump-model", m.dump_path, "Write the parsed model back out in canonical form");
}

void add_output_args(CLI::App* cmd, OutputArgs& o, bool csv)
{
    auto* opt = cmd->add_option("--format", o.format, "Output format");
    opt->check(csv ? CLI::IsMember({"json", "csv"}) : CLI::IsMember({"json"}));
    cmd->add_option("--out", o.out_path, "Write results to this file instead of stdout");
}

// Outcome of loading a model for a command: the model, or the exit code.
struct Loaded {
    std::optional<io::LoadedModel> model;
    int code = kOk;
};

Loaded load(const ModelArgs& args, std::ostream& err)
{
    Loaded r;
    try {
        r.model = io::read_model_file(args.path);
    } catch (const io::MalformedInput& e) {
        err << "malformed model file: " << e.what() << '\n';
        r.code = kMalformedInput;
        return r;
    } catch (const std::invalid_argument& e) {
        err << "malformed model file: " << e.what() << '\n';
        r.code = kMalformedInput;
        return r;
    }
    if (!args.dump_path.empty() && r.model->service) {
        std::ofstream f(args.dump_path);
        io::write_json(f, io::model_to_json(r.model->model, *r.model->service));
    }
    if (!r.model->report.ok()) {
        err << "invalid model:\n" << r.model->report.to_string();
        r.code = kInvalidModel;
    }
    return r;
}

void emit(const OutputArgs& o, std::ostream& out, const std::string& text)
{
    if (o.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out_path, std::ios::binary);
    f << text;
}

std::string json_text(const json& j)
{
    std::ostringstream os;
    io::write_json(os, j);
    return os.str();
}

std::string distribution_csv(const std::vector<double>& p, const std::vector<double>* se = nullptr)
{
    std::ostringstream os;
    os << (se ? "m,probability,std_error\n" : "m,probability\n");
    for (std::size_t m = 0; m < p.size(); ++m) {
        os << m << ',' << io::format_number(p[m]);
        if (se) {
            os << ',' << io::format_number((*se)[m]);
        }
        os << '\n';
    }
    return os.str();
}

json optional_number(const std::optional<double>& x)
{
    return x ? json(*x) : json(nullptr);
}

std::optional<std::uint64_t> env_seed()
{
    const char* v = std::getenv("TRANSQ_SEED");
    if (!v || !*v) {
        return std::nullopt;
    }
    return std::stoull(v);
}

json empirical_json(const sim::EmpiricalResult& e)
{
    return {{"time", e.time},
            {"runs", e.n_runs},
            {"seed", e.seed},
            {"mean", e.mean},
            {"mean_se", e.mean_se},
            {"factorial_moment_2", e.factorial2},
            {"factorial_moment_2_se", e.factorial2_se},
            {"distribution", e.distribution},
            {"std_errors", e.std_errors}};
}

// Largest |estimate - exact| / SE over the mean, the second factorial moment
// and every bin whose exact probability is at least kCellFloor.
double max_sigma_deviation(const sim::EmpiricalResult& e, const TransientResult& exact)
{
    auto z = [](double est, double ref, double se) {
        const double d = std::abs(est - ref);
        if (d == 0.0) {
            return 0.0;
        }
        return se > 0.0 ? d / se : INFINITY;
    };
    double worst = z(e.mean, exact.mean, e.mean_se);
    worst = std::max(worst, z(e.factorial2, exact.factorial_moments.at(1), e.factorial2_se));
    for (std::size_t m = 0; m < exact.distribution.size(); ++m) {
        if (exact.distribution[m] < kCellFloor) {
            continue;
        }
        const double est = m < e.distribution.size() ? e.distribution[m] : 0.0;
        const double se = m < e.std_errors.size() ? e.std_errors[m] : 0.0;
        worst = std::max(worst, z(est, exact.distribution[m], se));
    }
    return worst;
}

int default_workers()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Transient customer-number distribution of discrete-time D-BMAP/G/inf queues"};
    app.require_subcommand(1);

    // validate
    ModelArgs validate_model;
    auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
    add_model_args(validate_cmd, validate_model);

    // solve
    ModelArgs solve_model;
    OutputArgs solve_out;
    int solve_time = 0;
    int solve_moments = 2;
    std::optional<std::size_t> solve_max_degree;
    bool allow_truncation = false;
    auto* solve_cmd = app.add_subcommand("solve", "Exact transient distribution and moments");
    add_model_args(solve_cmd, solve_model);
    add_output_args(solve_cmd, solve_out, true);
    solve_cmd->add_option("--time", solve_time, "Horizon T")->required()->check(CLI::NonNegativeNumber);
    solve_cmd->add_option("--moments", solve_moments, "Number of factorial moments")->check(CLI::Range(0, 64));
    solve_cmd->add_option("--max-degree", solve_max_degree, "Cap on the series degree");
    solve_cmd->add_flag("--allow-truncation", allow_truncation, "Accept truncation loss above 1e-6");

    // simulate
    ModelArgs sim_model;
    OutputArgs sim_out;
    int sim_time = 0;
    std::int64_t sim_runs = 0;
    std::optional<std::uint64_t> sim_seed;
    int sim_workers = default_workers();
    bool effective_checks = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the distribution");
    add_model_args(sim_cmd, sim_model);
    add_output_args(sim_cmd, sim_out, true);
    sim_cmd->add_option("--time", sim_time, "Horizon T")->required()->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--runs", sim_runs, "Number of trajectories")->required()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_seed, "Seed (default: $TRANSQ_SEED)");
    sim_cmd->add_option("--workers", sim_workers, "Worker threads")->check(CLI::PositiveNumber);
    sim_cmd->add_flag("--effective-checks", effective_checks, "Also check effective-process invariants");

    // compare
    ModelArgs cmp_model;
    OutputArgs cmp_out;
    int cmp_time = 0;
    std::int64_t cmp_runs = 0;
    std::optional<std::uint64_t> cmp_seed;
    int cmp_workers = default_workers();
    auto* cmp_cmd = app.add_subcommand("compare", "Cross-check the exact engine against the oracle and SSA");
    add_model_args(cmp_cmd, cmp_model);
    add_output_args(cmp_cmd, cmp_out, false);
    cmp_cmd->add_option("--time", cmp_time, "Check horizons 0..T")->required()->check(CLI::NonNegativeNumber);
    cmp_cmd->add_option("--runs", cmp_runs, "Also simulate this many trajectories at T")
        ->check(CLI::NonNegativeNumber);
    cmp_cmd->add_option("--seed", cmp_seed, "Seed (default: $TRANSQ_SEED)");
    cmp_cmd->add_option("--workers", cmp_workers, "Worker threads")->check(CLI::PositiveNumber);

    // mminf
    OutputArgs mm_out;
    double mm_p = 0.0;
    double mm_alpha = 0.0;
    int mm_time = 0;
    auto* mm_cmd = app.add_subcommand("mminf", "Closed form for Bernoulli arrivals and geometric service");
    add_output_args(mm_cmd, mm_out, true);
    mm_cmd->add_option("--p", mm_p, "Arrival probability")->required();
    mm_cmd->add_option("--alpha", mm_alpha, "Per-slot probability of staying in service")->required();
    mm_cmd->add_option("--time", mm_time, "Horizon T")->required()->check(CLI::NonNegativeNumber);

    // stationary
    ModelArgs st_model;
    OutputArgs st_out;
    double st_tol = kDefaultStationaryTol;
    int st_max_time = kDefaultStationaryMaxTime;
    auto* st_cmd = app.add_subcommand("stationary", "Iterate the horizon until the distribution settles");
    add_model_args(st_cmd, st_model);
    add_output_args(st_cmd, st_out, true);
    st_cmd->add_option("--tol", st_tol, "Total-variation threshold")->check(CLI::PositiveNumber);
    st_cmd->add_option("--max-time", st_max_time, "Largest horizon tried")->check(CLI::PositiveNumber);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kMalformedInput;
    }

    std::uint64_t default_seed = kFallbackSeed;
    try {
        if (auto s = env_seed()) {
            default_seed = *s;
        }
    } catch (const std::exception&) {
        err << "TRANSQ_SEED is not an unsigned integer\n";
        return kMalformedInput;
    }

    try {
        if (*validate_cmd) {
            const auto loaded = load(validate_model, err);
            if (loaded.model && loaded.code == kOk) {
                out << loaded.model->report.to_string();
            }
            return loaded.code;
        }

        if (*solve_cmd) {
            const auto loaded = load(solve_model, err);
            if (loaded.code != kOk) {
                return loaded.code;
            }
            SolveOptions opts;
            opts.moments = solve_moments;
            opts.max_degree = solve_max_degree;
            const auto r = solve_transient(loaded.model->model, *loaded.model->service, solve_time, opts);
            if (r.truncation_loss > kTruncationLimit && !allow_truncation) {
                err << "truncation loss " << io::format_number(r.truncation_loss)
                    << " exceeds 1e-6; raise --max-degree or pass --allow-truncation\n";
                return kExcessiveTruncation;
            }
            if (solve_out.format == "csv") {
                emit(solve_out, out, distribution_csv(r.distribution));
            } else {
                emit(solve_out, out,
                     json_text({{"time", r.time},
                                {"mean", r.mean},
                                {"variance", r.variance},
                                {"fano", optional_number(r.fano)},
                                {"factorial_moments", r.factorial_moments},
                                {"distribution", r.distribution},
                                {"normalization_defect", r.normalization_defect},
                                {"truncation_loss", r.truncation_loss}}));
            }
            return kOk;
        }

        if (*sim_cmd) {
            const auto loaded = load(sim_model, err);
            if (loaded.code != kOk) {
                return loaded.code;
            }
            const auto seed = sim_seed.value_or(default_seed);
            const auto& model = loaded.model->model;
            const auto& law = *loaded.model->service;
            const auto e = sim::empirical_distribution(model, law, sim_time, sim_runs, seed, sim_workers);
            int code = kOk;
            json doc = empirical_json(e);
            if (effective_checks) {
                const auto rep = sim::effective_invariant_sweep(model, law, sim_time, sim_runs, seed, sim_workers);
                doc["effective_checks"] = {{"trajectories", rep.trajectories},
                                           {"checks", rep.checks},
                                           {"endpoint_violations", rep.endpoint_violations},
                                           {"domination_violations", rep.domination_violations},
                                           {"monotonicity_violations", rep.monotonicity_violations},
                                           {"passed", rep.violations() == 0}};
                if (rep.violations() != 0) {
                    err << "effective-process invariants violated " << rep.violations() << " times\n";
                    code = kComparisonFailure;
                }
            }
            if (sim_out.format == "csv") {
                emit(sim_out, out, distribution_csv(e.distribution, &e.std_errors));
            } else {
                emit(sim_out, out, json_text(doc));
            }
            return code;
        }

        if (*cmp_cmd) {
            const auto loaded = load(cmp_model, err);
            if (loaded.code != kOk) {
                return loaded.code;
            }
            const auto& model = loaded.model->model;
            const auto& law = *loaded.model->service;
            double worst = 0.0;
            int worst_t = 0;
            for (int t = 0; t <= cmp_time; ++t) {
                const auto exact = distribution(transient_pgf(model, law, t));
                const auto brute = oracle::brute_distribution(model, law, t);
                const std::size_t n = std::max(exact.size(), brute.size());
                for (std::size_t m = 0; m < n; ++m) {
                    const double a = m < exact.size() ? exact[m] : 0.0;
                    const double b = m < brute.size() ? brute[m] : 0.0;
                    if (std::abs(a - b) > worst) {
                        worst = std::abs(a - b);
                        worst_t = t;
                    }
                }
            }
            bool pass = worst <= kOracleTol;
            json doc = {{"time", cmp_time},
                        {"max_oracle_deviation", worst},
                        {"worst_time", worst_t},
                        {"oracle_tolerance", kOracleTol}};
            if (cmp_runs > 0) {
                const auto seed = cmp_seed.value_or(default_seed);
                const auto exact = solve_transient(model, law, cmp_time);
                const auto e = sim::empirical_distribution(model, law, cmp_time, cmp_runs, seed, cmp_workers);
                const double sigma = max_sigma_deviation(e, exact);
                doc["simulation"] = {{"runs", cmp_runs},
                                     {"seed", seed},
                                     {"max_sigma_deviation", sigma},
                                     {"sigma_limit", kSigmaLimit}};
                pass = pass && sigma <= kSigmaLimit;
            }
            doc["passed"] = pass;
            emit(cmp_out, out, json_text(doc));
            return pass ? kOk : kComparisonFailure;
        }

        if (*mm_cmd) {
            if (!(mm_p >= 0.0 && mm_p <= 1.0) || !(mm_alpha > 0.0 && mm_alpha < 1.0)) {
                err << "need p in [0,1] and alpha in (0,1)\n";
                return kInvalidModel;
            }
            const auto g = mminf_closed_form(mm_p, mm_alpha, mm_time);
            const auto mo = mminf_moments(mm_p, mm_alpha, mm_time);
            if (mm_out.format == "csv") {
                emit(mm_out, out, distribution_csv(g.coeffs()));
            } else {
                emit(mm_out, out,
                     json_text({{"time", mm_time},
                                {"p", mm_p},
                                {"alpha", mm_alpha},
                                {"distribution", g.coeffs()},
                                {"mean", mo.mean},
                                {"variance", mo.variance},
                                {"fano", optional_number(mo.fano)}}));
            }
            if (mo.fano && *mo.fano >= 1.0) {
                err << "internal error: Fano factor " << io::format_number(*mo.fano) << " is not below 1\n";
                return kComparisonFailure;
            }
            return kOk;
        }

        if (*st_cmd) {
            const auto loaded = load(st_model, err);
            if (loaded.code != kOk) {
                return loaded.code;
            }
            try {
                const auto r =
                    stationary_distribution(loaded.model->model, *loaded.model->service, st_tol, st_max_time);
                if (st_out.format == "csv") {
                    emit(st_out, out, distribution_csv(r.distribution));
                } else {
                    emit(st_out, out,
                         json_text({{"converged_time", r.t_converged},
                                    {"total_variation", r.last_tv},
                                    {"distribution", r.distribution}}));
                }
            } catch (const NonConvergenceError& e) {
                err << e.what() << '\n';
                return kNonConvergence;
            }
            return kOk;
        }
    } catch (const std::length_error& e) {
        err << e.what() << '\n';
        return kMalformedInput;
    } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return kMalformedInput;
    }
    return kOk;
}

} // namespace transq::cli
