#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "transq/cli.hpp"
#include "transq/exact.hpp"
#include "transq/model_io.hpp"
#include "transq/models.hpp"

using namespace transq;
namespace fs = std::filesystem;

namespace {

const std::string kModels = TRANSQ_MODELS_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "transq");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir()
{
    auto dir = fs::temp_directory_path() / "transq_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text)
{
    const auto path = scratch_dir() / name;
    std::ofstream(path) << text;
    return path.string();
}

std::string model(const std::string& name)
{
    return kModels + "/" + name + ".json";
}

} // namespace

TEST_CASE("validate")
{
    CHECK(run_cli({"validate", model("five_batch_two_state")}).code == 0);
    CHECK(run_cli({"validate", model("binomial_two_state")}).code == 0);

    const auto bad_sum = write_file("bad_sum.json", R"({"states": 1, "batches": [[[0.6]], [[0.6]]],
        "initial": [1], "service": {"type": "geometric", "alpha": 0.5}})");
    const auto r = run_cli({"validate", bad_sum});
    CHECK(r.code == 2);
    CHECK(r.err.find("row sum 1.2") != std::string::npos);

    const auto truncated = write_file("truncated.json", R"({"states": 1, "batches": [[[1.0]])");
    CHECK(run_cli({"validate", truncated}).code == 3);

    const auto no_service = write_file("no_service.json", R"({"states": 1, "batches": [[[1.0]]], "initial": [1]})");
    CHECK(run_cli({"validate", no_service}).code == 3);

    const auto wrong_shape = write_file("wrong_shape.json", R"({"states": 2, "batches": [[[1.0]]], "initial": [1, 0],
        "service": {"type": "deterministic", "d": 1}})");
    CHECK(run_cli({"validate", wrong_shape}).code == 3);

    const auto bad_service = write_file("bad_service.json", R"({"states": 1, "batches": [[[1.0]]], "initial": [1],
        "service": {"type": "geometric", "alpha": 1.5}})");
    CHECK(run_cli({"validate", bad_service}).code == 2);

    CHECK(run_cli({"validate", (scratch_dir() / "does_not_exist.json").string()}).code == 3);
}

TEST_CASE("flat row-major matrices are accepted")
{
    const auto flat = write_file("flat.json", R"({"states": 2, "batches": [[0.5, 0.2, 0.1, 0.4], [0.2, 0.1, 0.3, 0.2]],
        "initial": [0.5, 0.5], "service": {"type": "pmf", "q": [0.5, 0.5]}})");
    const auto loaded = io::read_model_file(flat);
    CHECK(loaded.report.ok());
    CHECK(loaded.model.batch(0)(0, 1) == 0.2);
    CHECK(loaded.model.batch(1)(1, 0) == 0.3);
}

TEST_CASE("dump-model round trip")
{
    for (const auto* name : {"five_batch_two_state", "binomial_two_state", "bernoulli_geometric"}) {
        const auto dumped = (scratch_dir() / (std::string(name) + ".dump.json")).string();
        REQUIRE(run_cli({"validate", model(name), "--dump-model", dumped}).code == 0);
        const auto a = io::read_model_file(model(name));
        const auto b = io::read_model_file(dumped);
        CHECK(a.model == b.model);
        REQUIRE(a.service);
        REQUIRE(b.service);
        CHECK(*a.service == *b.service);
    }
    // Library models survive the same trip.
    std::ostringstream os;
    io::write_json(os, io::model_to_json(models::binomial_two_state(), ServiceLaw::pmf({0.1, 0.2, 0.7})));
    const auto back = io::parse_model_text(os.str());
    CHECK(back.model == models::binomial_two_state());
    CHECK(*back.service == ServiceLaw::pmf({0.1, 0.2, 0.7}));
}

TEST_CASE("solve")
{
    auto r = run_cli({"solve", model("bernoulli_geometric"), "--time", "2", "--format", "csv"});
    CHECK(r.code == 0);
    CHECK(r.out == "m,probability\n0,0.65625\n1,0.3125\n2,0.03125\n");

    r = run_cli({"solve", model("bernoulli_geometric"), "--time", "0", "--format", "csv"});
    CHECK(r.out == "m,probability\n0,1\n");

    r = run_cli({"solve", model("binomial_two_state"), "--time", "10", "--moments", "3"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto mv = mean_variance_closed(models::binomial_two_state(), models::binomial_two_state_service(), 10);
    CHECK(doc["mean"].get<double>() == doctest::Approx(mv.mean).epsilon(1e-13));
    CHECK(doc["variance"].get<double>() == doctest::Approx(mv.variance).epsilon(1e-12));
    CHECK(doc["factorial_moments"].size() == 3);
    CHECK(doc["truncation_loss"].get<double>() == 0.0);
    CHECK(doc.contains("normalization_defect"));
    CHECK(doc.contains("fano"));

    const auto out_path = (scratch_dir() / "solve.json").string();
    r = run_cli({"solve", model("bernoulli_geometric"), "--time", "3", "--out", out_path});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(fs::file_size(out_path) > 0);
}

TEST_CASE("solve truncation guard")
{
    auto r = run_cli({"solve", model("binomial_two_state"), "--time", "6", "--max-degree", "20"});
    CHECK(r.code == 4);
    r = run_cli({"solve", model("binomial_two_state"), "--time", "6", "--max-degree", "20", "--allow-truncation"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["truncation_loss"].get<double>() > 1e-6);
}

TEST_CASE("simulate")
{
    const std::vector<std::string> base{"simulate", model("five_batch_two_state"), "--time", "7", "--runs", "4000",
                                        "--seed", "42"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return run_cli(args);
    };
    const auto a = with({"--workers", "1"});
    const auto b = with({"--workers", "1"});
    const auto c = with({"--workers", "2"});
    const auto d = with({"--workers", "8"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK(a.out == d.out);

    const auto checks = with({"--effective-checks"});
    CHECK(checks.code == 0);
    const auto doc = nlohmann::json::parse(checks.out);
    CHECK(doc["effective_checks"]["passed"].get<bool>());
    CHECK(doc["effective_checks"]["trajectories"].get<int>() == 4000);

    const auto csv = with({"--format", "csv"});
    CHECK(csv.out.rfind("m,probability,std_error\n", 0) == 0);
}

TEST_CASE("simulate seed from the environment")
{
    const std::vector<std::string> args{"simulate", model("bernoulli_geometric"), "--time", "4", "--runs", "500"};
    ::setenv("TRANSQ_SEED", "42", 1);
    const auto env = run_cli(args);
    ::unsetenv("TRANSQ_SEED");
    auto explicit_args = args;
    explicit_args.insert(explicit_args.end(), {"--seed", "42"});
    const auto expl = run_cli(explicit_args);
    CHECK(env.out == expl.out);
    CHECK(nlohmann::json::parse(env.out)["seed"].get<std::uint64_t>() == 42);
}

TEST_CASE("compare")
{
    auto r = run_cli({"compare", model("binomial_two_state"), "--time", "10"});
    CHECK(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["max_oracle_deviation"].get<double>() <= 1e-9);

    r = run_cli({"compare", model("five_batch_two_state"), "--time", "6", "--runs", "20000", "--seed", "8"});
    CHECK(r.code == 0);
    doc = nlohmann::json::parse(r.out);
    CHECK(doc["simulation"]["max_sigma_deviation"].get<double>() <= 4.0);
}

TEST_CASE("mminf")
{
    auto r = run_cli({"mminf", "--p", "0.5", "--alpha", "0.5", "--time", "2"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["mean"].get<double>() == doctest::Approx(0.375));
    CHECK(doc["variance"].get<double>() == doctest::Approx(0.296875));
    CHECK(doc["fano"].get<double>() == doctest::Approx(0.791667).epsilon(1e-6));

    CHECK(run_cli({"mminf", "--p", "0.5", "--alpha", "1.5", "--time", "2"}).code == 2);
    r = run_cli({"mminf", "--p", "0.5", "--alpha", "0.5", "--time", "0"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["fano"].is_null());
}

TEST_CASE("stationary")
{
    auto r = run_cli({"stationary", model("bernoulli_deterministic1")});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["converged_time"].get<int>() == 1);
    CHECK(doc["distribution"][0].get<double>() == 1.0);

    r = run_cli({"stationary", model("binomial_two_state"), "--max-time", "3"});
    CHECK(r.code == 5);
    CHECK(r.err.find("last TV") != std::string::npos);
}

TEST_CASE("usage errors")
{
    CHECK(run_cli({"frobnicate"}).code == 3);
    CHECK(run_cli({"solve", model("bernoulli_geometric")}).code == 3);
    CHECK(run_cli({"--help"}).code == 0);
}
