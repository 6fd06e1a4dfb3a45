#include <catch2/catch_amalgamated.hpp>

#include "aggpi/cli.hpp"
#include "aggpi/config.hpp"
#include "aggpi/error.hpp"
#include "aggpi/io.hpp"
#include "aggpi/manifest.hpp"
#include "aggpi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace aggpi;
namespace fs = std::filesystem;
using config::Json;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("aggpi_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(std::vector<std::string> args)
{
    args.insert(args.begin(), "aggpi");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) { return io::read_text(path); }

void write_file(const std::string& path, const std::string& text) { io::write_text(path, text); }

std::size_t line_count(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

const char* kMinimal = R"({"dgp": {"kind": "ar1", "sigma": 1.0, "alpha_star": 2.0},
  "n": 100, "horizons": [10], "covariate_layout": "none", "rng_seed": 7})";

}  // namespace

TEST_CASE("number formatting round-trips", "[io]")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 5e-324}) CHECK(io::parse_double(io::format_double(v)) == v);
    CHECK(io::format_double(std::nan("")) == "NA");
    CHECK(std::isnan(io::parse_double("NA")));
    CHECK(std::isinf(io::parse_double("-inf")));
    CHECK_THROWS_AS(io::parse_double("1.5x"), Error);
    CHECK_THROWS_AS(io::parse_double(""), Error);
}

TEST_CASE("design CSV round trip", "[io]")
{
    TempDir dir;
    Eigen::MatrixXd values(3, 2);
    values << 1.0 / 3.0, -2.0, 1e-17, 4.0, 5.5, 6.25;
    DesignMatrix X(values, {"sin1", "sat"});
    io::write_design(dir / "x.csv", X, 10);
    CHECK(slurp(dir / "x.csv").rfind("t,sin1,sat\n10,", 0) == 0);
    const DesignMatrix back = io::read_design(dir / "x.csv");
    CHECK(back.col_names == X.col_names);
    CHECK(back.values == values);

    // index-only file: rows without columns
    io::write_design(dir / "empty.csv", DesignMatrix(Eigen::MatrixXd(4, 0)));
    const DesignMatrix empty = io::read_design(dir / "empty.csv");
    CHECK(empty.rows() == 4);
    CHECK(empty.cols() == 0);

    write_file(dir / "ragged.csv", "t,a,b\n0,1,2\n1,3\n");
    try {
        io::read_csv(dir / "ragged.csv");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("series CSV accepts a file without index", "[io]")
{
    TempDir dir;
    write_file(dir / "s.csv", "price\n1.5\n2.5\n");
    CHECK(io::read_series(dir / "s.csv") == std::vector<double>{1.5, 2.5});
}

TEST_CASE("SHA-256 and digests", "[manifest]")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const Json a = Json::parse(R"({"b": 1, "a": {"y": 2, "x": 3}})");
    const Json b = Json::parse(R"({"a": {"x": 3, "y": 2}, "b": 1})");
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a) != config_digest(Json::parse(R"({"b": 2, "a": {"x": 3, "y": 2}})")));
}

TEST_CASE("experiment config parsing", "[config]")
{
    const auto cfg = config::experiment_from_json(config::parse(kMinimal));
    CHECK(cfg.n == 100);
    CHECK(cfg.covariate_layout == CovariateLayout::None);
    CHECK(cfg.dgp.alpha_star == 2.0);

    // serialization round trip
    const auto again = config::experiment_from_json(config::to_json(cfg));
    CHECK(config::canonical(config::to_json(again)) == config::canonical(config::to_json(cfg)));

    // presets with overrides
    const auto hi = config::experiment_from_json(config::parse(R"({"preset": "table1ii-90-cauchy-longheavy", "n_reps": 3})"));
    CHECK(hi.n_reps == 3);
    CHECK(hi.beta.dist == BetaDist::Cauchy);
    CHECK(hi.dgp.kind == DgpKind::LongMemory);

    auto message = [](const std::string& text) {
        try {
            config::experiment_from_json(config::parse(text));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigInvalid);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message(R"({"dgp": {"phi": 0.5}})").find("dgp.phi") != std::string::npos);
    CHECK(message(R"({"horizons": [24, -1]})").find("horizons[1]") != std::string::npos);
    CHECK(message(R"({"methods": ["qtl", "bogus"]})").find("methods[1]") != std::string::npos);
    CHECK(message(R"({"level": 1.5})").find("level") != std::string::npos);
    CHECK(message("{\n  \"n\": 100,\n  \"level\" 0.9\n}").find("line 3") != std::string::npos);
}

TEST_CASE("Nagaev config fills innovation moments", "[config]")
{
    const auto cfg = config::nagaev_from_json(config::parse(R"({
        "n": 10, "x": [0, 5], "n_mc": 10000,
        "cases": [{"case": "srd_light", "q": 4, "process": {"coefficients": "geometric", "rho": 0.5, "length": 3}}]})"));
    REQUIRE(cfg.cases.size() == 1);
    CHECK(cfg.cases[0].process.a == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(cfg.cases[0].consts.eps_q_moment == Catch::Approx(3.0));
    CHECK(cfg.cases[0].consts.eps_second_moment == Catch::Approx(1.0));
    CHECK_THROWS_AS(config::nagaev_from_json(config::parse(R"({"x": [1], "n_mc": 10, "cases": []})")), Error);
}

TEST_CASE("simulate writes the documented files deterministically", "[cli]")
{
    TempDir dir;
    write_file(dir / "min.json", kMinimal);
    auto r = run({"simulate", "--config", dir / "min.json", "--out", dir / "a"});
    REQUIRE(r.code == 0);
    CHECK(line_count(slurp(dir / "a/series.csv")) == 101);
    CHECK(fs::exists(dir.path / "a/truth.json"));
    CHECK(fs::exists(dir.path / "a/manifest.json"));
    const Json manifest = Json::parse(slurp(dir / "a/manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["config_digest"].get<std::string>().size() == 64);
    CHECK(manifest["rng_seed"] == 7);

    REQUIRE(run({"simulate", "--config", dir / "min.json", "--out", dir / "b"}).code == 0);
    for (const char* f : {"series.csv", "covariates.csv", "future_covariates.csv", "truth.json"})
        CHECK(slurp(dir / (std::string("a/") + f)) == slurp(dir / (std::string("b/") + f)));

    REQUIRE(run({"simulate", "--config", dir / "min.json", "--seed", "8", "--out", dir / "c"}).code == 0);
    CHECK(slurp(dir / "a/series.csv") != slurp(dir / "c/series.csv"));
    CHECK(Json::parse(slurp(dir / "c/manifest.json"))["config_digest"] != manifest["config_digest"]);
}

TEST_CASE("seed environment variable is overridden by --seed", "[cli]")
{
    TempDir dir;
    write_file(dir / "min.json", kMinimal);
    ::setenv(cli::kSeedEnv, "8", 1);
    REQUIRE(run({"simulate", "--config", dir / "min.json", "--out", dir / "env"}).code == 0);
    REQUIRE(run({"simulate", "--config", dir / "min.json", "--seed", "7", "--out", dir / "flag"}).code == 0);
    ::unsetenv(cli::kSeedEnv);
    REQUIRE(run({"simulate", "--config", dir / "min.json", "--seed", "8", "--out", dir / "eight"}).code == 0);
    REQUIRE(run({"simulate", "--config", dir / "min.json", "--out", dir / "cfg"}).code == 0);
    CHECK(slurp(dir / "env/series.csv") == slurp(dir / "eight/series.csv"));
    CHECK(slurp(dir / "flag/series.csv") == slurp(dir / "cfg/series.csv"));
}

TEST_CASE("HighDim preset simulates 487 covariate columns", "[cli]")
{
    TempDir dir;
    REQUIRE(run({"simulate", "--preset", "table1ii-99-uniform-shortheavy", "--out", dir.path.string()}).code == 0);
    const auto X = io::read_design(dir / "covariates.csv");
    CHECK(X.cols() == 487);
    CHECK(X.rows() == 336);
    CHECK(io::read_design(dir / "future_covariates.csv").rows() == 96);
}

TEST_CASE("predict consumes simulate output", "[cli]")
{
    TempDir dir;
    const std::string cfg = R"({"dgp": {"kind": "ar1", "sigma": 1.0, "alpha_star": 2.0}, "n": 300,
        "horizons": [12], "covariate_layout": "custom",
        "custom": {"n_weather": 3, "n_freqs": 2, "period": 24, "weekend_dummies": true},
        "beta": {"sparsity_pct": 0}})";
    write_file(dir / "cfg.json", cfg);
    REQUIRE(run({"simulate", "--config", dir / "cfg.json", "--out", dir / "sim"}).code == 0);
    for (const char* est : {"ols", "lad", "lasso"}) {
        auto r = run({"predict", "--data", dir / "sim/series.csv", "--covariates", dir / "sim/covariates.csv",
                      "--future-covariates", dir / "sim/future_covariates.csv", "--estimator", est, "--method",
                      "qtl", "--m", "12", "--out", dir / (std::string("p_") + est)});
        REQUIRE(r.code == 0);
        const Json pi = Json::parse(slurp(dir / (std::string("p_") + est + "/interval.json")));
        CHECK(pi["lower"].get<double>() <= pi["point_forecast"].get<double>());
        CHECK(pi["upper"].get<double>() >= pi["point_forecast"].get<double>());
        CHECK(pi["m"] == 12);
        CHECK(pi["method"] == "qtl");
        CHECK(r.out.find("qtl interval") != std::string::npos);
    }

    // the mean-row stand-in for unknown future covariates
    auto r = run({"predict", "--data", dir / "sim/series.csv", "--covariates", dir / "sim/covariates.csv",
                  "--future-mean", "--m", "12", "--out", dir / "mean"});
    REQUIRE(r.code == 0);
    const auto X = io::read_design(dir / "sim/covariates.csv");
    const std::vector<double> y = io::read_series(dir / "sim/series.csv");
    const Json pi = Json::parse(slurp(dir / "mean/interval.json"));
    // OLS with an intercept passes through the means
    CHECK(pi["point_forecast"].get<double>() ==
          Catch::Approx(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size())).epsilon(1e-9));

    // covariates without future rows is a configuration error
    CHECK(run({"predict", "--data", dir / "sim/series.csv", "--covariates", dir / "sim/covariates.csv", "--m", "12",
               "--out", dir / "x"})
              .code == cli::kExitConfig);

    // reordered future columns do not match
    auto F = io::read_design(dir / "sim/future_covariates.csv");
    std::swap(F.col_names[0], F.col_names[1]);
    io::write_design(dir / "swapped.csv", F);
    r = run({"predict", "--data", dir / "sim/series.csv", "--covariates", dir / "sim/covariates.csv",
             "--future-covariates", dir / "swapped.csv", "--m", "12", "--out", dir / "y"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("ColumnMismatch") != std::string::npos);
}

TEST_CASE("predict on zeros gives a degenerate interval", "[cli]")
{
    TempDir dir;
    io::write_series(dir / "zeros.csv", std::vector<double>(80, 0.0));
    auto r = run({"predict", "--data", dir / "zeros.csv", "--method", "qtl", "--m", "10", "--out", dir / "z"});
    REQUIRE(r.code == 0);
    const Json pi = Json::parse(slurp(dir / "z/interval.json"));
    CHECK(pi["lower"] == 0.0);
    CHECK(pi["upper"] == 0.0);

    r = run({"predict", "--data", dir / "zeros.csv", "--method", "qtl", "--m", "70", "--out", dir / "short"});
    CHECK(r.code == cli::kExitNumeric);
    CHECK(r.err.find("InsufficientWindows") != std::string::npos);
}

TEST_CASE("CLT and QTL agree on Gaussian noise", "[cli]")
{
    TempDir dir;
    Rng rng(99);
    std::vector<double> y(2000);
    for (double& v : y) v = rng.normal();
    io::write_series(dir / "g.csv", y);
    REQUIRE(run({"predict", "--data", dir / "g.csv", "--method", "clt", "--m", "20", "--out", dir / "clt"}).code == 0);
    REQUIRE(run({"predict", "--data", dir / "g.csv", "--method", "qtl", "--m", "20", "--out", dir / "qtl"}).code == 0);
    const Json c = Json::parse(slurp(dir / "clt/interval.json"));
    const Json q = Json::parse(slurp(dir / "qtl/interval.json"));
    const double c_lo = c["lower"], c_hi = c["upper"], q_lo = q["lower"], q_hi = q["upper"];
    CHECK(c_lo < q_hi);
    CHECK(q_lo < c_hi);
    const double ratio = (c_hi - c_lo) / (q_hi - q_lo);
    CHECK(ratio > 0.75);
    CHECK(ratio < 1.25);
}

TEST_CASE("evaluate is independent of --jobs", "[cli]")
{
    TempDir dir;
    write_file(dir / "e.json", R"({"dgp": {"kind": "ar1", "sigma": 1.0, "alpha_star": 2.0}, "n": 120,
        "horizons": [6, 12], "methods": ["qtl", "clt", "adj"], "estimators": ["ols", "lasso"], "n_reps": 6,
        "covariate_layout": "custom", "custom": {"n_weather": 4, "n_freqs": 3, "period": 24},
        "boot_B": 200, "cv_folds": 5})");
    REQUIRE(run({"evaluate", "--config", dir / "e.json", "--jobs", "1", "--out", dir / "j1"}).code == 0);
    REQUIRE(run({"evaluate", "--config", dir / "e.json", "--jobs", "4", "--out", dir / "j4"}).code == 0);
    CHECK(slurp(dir / "j1/report.csv") == slurp(dir / "j4/report.csv"));
    CHECK(slurp(dir / "j1/report.txt") == slurp(dir / "j4/report.txt"));
    CHECK(line_count(slurp(dir / "j1/report.csv")) == 1 + 2 * 3 * 2);

    // one repetition: every valid cell is 0 or 100
    REQUIRE(run({"evaluate", "--config", dir / "e.json", "--reps", "1", "--out", dir / "one"}).code == 0);
    std::istringstream csv(slurp(dir / "one/report.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        REQUIRE(f.size() == 11);
        CHECK((f[7] == "0" || f[7] == "100"));
    }
}

TEST_CASE("evaluate flags override the config", "[cli]")
{
    TempDir dir;
    write_file(dir / "e.json", kMinimal);
    auto r = run({"evaluate", "--config", dir / "e.json", "--reps", "2", "--method", "clt,qtl", "--estimator", "ols",
                  "--m", "5,10", "--level", "0.8", "--block-len", "4", "--out", dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(line_count(slurp(dir / "o/report.csv")) == 1 + 4);
    CHECK(r.out.find("ols-clt") != std::string::npos);
    CHECK(run({"evaluate", "--config", dir / "e.json", "--method", "nope", "--out", dir / "bad"}).code ==
          cli::kExitConfig);
    CHECK(run({"evaluate", "--out", dir / "none"}).code == cli::kExitConfig);
}

TEST_CASE("nagaev command table", "[cli]")
{
    TempDir dir;
    write_file(dir / "n.json", R"({"n": 50, "x": [0, 5, 20, 60, 200], "n_mc": 10000, "rng_seed": 4,
        "cases": [{"case": "srd_light", "q": 4, "process": {"coefficients": "geometric", "rho": 0.3, "length": 10}},
                  {"case": "srd_heavy", "q": 1.2,
                   "process": {"coefficients": "explicit", "a": [1.0], "innovation": "stable", "alpha_star": 1.5}}]})");
    auto r = run({"nagaev", "--config", dir / "n.json", "--out", dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("10/10 cells hold") != std::string::npos);
    CHECK(r.out.find("implementation-calibrated") != std::string::npos);
    std::istringstream csv(slurp(dir / "o/nagaev.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "case,q,x,poly_term,exp_term,bound,mc,se,holds");
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f[2] == "0") CHECK(f[6] == "1");
        if (f[0] == "srd_heavy") CHECK(f[4] == "0");
        CHECK(f[8] == "true");
    }
    CHECK(rows == 10);
    CHECK(run({"nagaev", "--out", dir / "x"}).code == cli::kExitConfig);
}

TEST_CASE("exit codes", "[cli]")
{
    TempDir dir;
    CHECK(run({}).code == cli::kExitConfig);
    CHECK(run({"bogus"}).code == cli::kExitConfig);
    CHECK(run({"--help"}).code == cli::kExitOk);
    CHECK(run({"simulate", "--config", dir / "missing.json"}).code == cli::kExitConfig);
    write_file(dir / "bad.json", "{\n \"n\": 100,\n \"dgp\": \n");
    auto r = run({"simulate", "--config", dir / "bad.json", "--out", dir / "o"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("line") != std::string::npos);
    write_file(dir / "unstable.json",
               R"({"dgp": {"kind": "ar1", "phi1": 1.0}, "n": 100, "covariate_layout": "none", "horizons": [5]})");
    CHECK(run({"simulate", "--config", dir / "unstable.json", "--out", dir / "u"}).code == cli::kExitNumeric);
}
