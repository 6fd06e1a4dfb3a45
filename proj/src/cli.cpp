#include "aggpi/cli.hpp"

#include "aggpi/config.hpp"
#include "aggpi/error.hpp"
#include "aggpi/harness.hpp"
#include "aggpi/io.hpp"
#include "aggpi/manifest.hpp"
#include "aggpi/nagaev.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace aggpi::cli {

namespace fs = std::filesystem;
using config::Json;

namespace {

// Flags shared by several subcommands. Unset optionals leave the config alone.
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    unsigned jobs = 1;
    std::string preset;
    std::string methods;
    std::string estimators;
    std::string horizons;
    std::optional<double> level;
    std::optional<double> weights_delta;
    std::optional<std::size_t> block_len;
    std::optional<std::size_t> boot_B;
    std::optional<double> boot_block;
    std::optional<std::size_t> reps;
    // predict only
    std::string data;
    std::string covariates;
    std::string future_covariates;
    bool future_mean = false;
};

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::size_t parse_count(const std::string& s, const char* flag)
{
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used == s.size()) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ConfigInvalid, std::string(flag) + ": not a non-negative integer: '" + s + "'");
}

// --seed beats AGGPI_SEED, which beats the config file.
std::optional<std::uint64_t> effective_seed_override(const Overrides& o)
{
    if (o.seed) return o.seed;
    if (const char* env = std::getenv(kSeedEnv); env && *env) return parse_count(env, kSeedEnv);
    return std::nullopt;
}

std::string fmt(double v, const char* spec = "%.6g")
{
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_json(const fs::path& path, const Json& j) { io::write_text(path, j.dump(2) + "\n"); }

class ManifestWriter {
public:
    ManifestWriter(std::string command, const Json& effective, std::uint64_t seed, fs::path dir)
        : dir_(std::move(dir))
    {
        m_.command = std::move(command);
        m_.config_digest = config_digest(effective);
        m_.rng_seed = seed;
        m_.tool_version = tool_version();
        m_.started = utc_timestamp();
    }

    void output(const std::string& name) { m_.outputs.push_back(name); }

    void finish()
    {
        m_.finished = utc_timestamp();
        write_json(dir_ / "manifest.json", to_json(m_));
    }

private:
    fs::path dir_;
    RunManifest m_;
};

ExperimentConfig load_experiment(const Overrides& o)
{
    Json j = o.config_path.empty() ? Json::object() : config::load(o.config_path);
    if (!o.preset.empty()) {
        if (j.contains("preset")) throw Error(ErrorCode::ConfigInvalid, "--preset conflicts with 'preset' in the config file");
        j["preset"] = o.preset;
    }
    if (o.config_path.empty() && o.preset.empty())
        throw Error(ErrorCode::ConfigInvalid, "either --config or --preset is required");
    ExperimentConfig cfg = config::experiment_from_json(j);

    if (auto seed = effective_seed_override(o)) cfg.rng_seed = *seed;
    if (!o.methods.empty()) {
        cfg.methods.clear();
        for (const auto& s : split_list(o.methods)) cfg.methods.push_back(parse_method(s));
    }
    if (!o.estimators.empty()) {
        cfg.estimators.clear();
        for (const auto& s : split_list(o.estimators)) cfg.estimators.push_back(parse_estimator(s));
    }
    if (!o.horizons.empty()) {
        cfg.horizons.clear();
        for (const auto& s : split_list(o.horizons)) cfg.horizons.push_back(parse_count(s, "--m"));
    }
    if (o.level) cfg.level = *o.level;
    if (o.weights_delta) cfg.weights_delta = *o.weights_delta;
    if (o.block_len) cfg.clt_block_len = *o.block_len;
    if (o.boot_B) cfg.boot_B = *o.boot_B;
    if (o.boot_block) cfg.boot_block_len = *o.boot_block;
    if (o.reps) cfg.n_reps = *o.reps;
    validate(cfg);
    return cfg;
}

int cmd_simulate(const Overrides& o, std::ostream& out)
{
    const ExperimentConfig cfg = load_experiment(o);
    const fs::path dir = o.out_dir;
    ManifestWriter manifest("simulate", config::to_json(cfg), cfg.rng_seed, dir);

    const ExperimentFixture fixture = make_fixture(cfg);
    const SimulatedSample sample = simulate_sample(cfg, fixture, 0);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const Eigen::Index future = sample.y.size() - n;

    const std::vector<double> y(sample.y.data(), sample.y.data() + n);
    io::write_series(dir / "series.csv", y);
    io::write_design(dir / "covariates.csv", sample.X.slice_rows(0, n));
    io::write_design(dir / "future_covariates.csv", sample.X.slice_rows(n, future), cfg.n);

    Json future_means = Json::object();
    for (auto m : cfg.horizons) future_means[std::to_string(m)] = sample.y.segment(n, static_cast<Eigen::Index>(m)).mean();
    Json truth{{"beta", std::vector<double>(fixture.beta.data(), fixture.beta.data() + fixture.beta.size())},
               {"covariate_names", sample.X.col_names},
               {"dgp", config::to_json(cfg.dgp)},
               {"rng_seed", cfg.rng_seed},
               {"n", cfg.n},
               {"future_y", std::vector<double>(sample.y.data() + n, sample.y.data() + sample.y.size())},
               {"future_means", future_means}};
    write_json(dir / "truth.json", truth);
    for (const char* name : {"series.csv", "covariates.csv", "future_covariates.csv", "truth.json"}) manifest.output(name);
    manifest.finish();

    out << "simulated " << cfg.n << " points with " << sample.X.cols() << " covariates (+" << future
        << " future rows) into " << dir.string() << "\n";
    return kExitOk;
}

config::PredictConfig load_predict(const Overrides& o, const std::string& method, const std::string& estimator,
                                   const std::string& m)
{
    config::PredictConfig cfg;
    if (!o.config_path.empty()) cfg = config::predict_from_json(config::load(o.config_path));
    if (!o.data.empty()) cfg.data = o.data;
    if (!o.covariates.empty()) cfg.covariates = o.covariates;
    if (!o.future_covariates.empty()) cfg.future_covariates = o.future_covariates;
    if (o.future_mean) cfg.future_mean = true;
    if (!method.empty()) cfg.method = parse_method(method);
    if (!estimator.empty()) cfg.estimator = parse_estimator(estimator);
    if (!m.empty()) cfg.m = parse_count(m, "--m");
    if (o.level) cfg.level = *o.level;
    if (o.weights_delta) cfg.weights_delta = *o.weights_delta;
    if (o.block_len) cfg.block_len = *o.block_len;
    if (o.boot_B) cfg.boot_B = *o.boot_B;
    if (o.boot_block) cfg.boot_block_len = *o.boot_block;
    if (auto seed = effective_seed_override(o)) cfg.rng_seed = *seed;

    if (cfg.data.empty()) throw Error(ErrorCode::ConfigInvalid, "predict needs --data (or 'data' in the config)");
    if (cfg.m < 1) throw Error(ErrorCode::ConfigInvalid, "--m must be at least 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw Error(ErrorCode::ConfigInvalid, "--level must lie in (0, 1)");
    if (cfg.weights_delta && !(*cfg.weights_delta > 0.0 && *cfg.weights_delta < 1.0))
        throw Error(ErrorCode::ConfigInvalid, "--weights-delta must lie in (0, 1)");
    if (cfg.future_mean && !cfg.future_covariates.empty())
        throw Error(ErrorCode::ConfigInvalid, "--future-mean and --future-covariates are mutually exclusive");
    return cfg;
}

DesignMatrix future_design(const config::PredictConfig& cfg, const DesignMatrix& X)
{
    const auto m = static_cast<Eigen::Index>(cfg.m);
    if (cfg.future_mean) {
        Eigen::MatrixXd rows = X.values.colwise().mean().replicate(m, 1);
        return DesignMatrix(std::move(rows), X.col_names);
    }
    if (cfg.future_covariates.empty()) {
        if (X.cols() > 0)
            throw Error(ErrorCode::ConfigInvalid, "covariates given but no --future-covariates or --future-mean");
        return DesignMatrix(Eigen::MatrixXd(m, 0));
    }
    DesignMatrix F = io::read_design(cfg.future_covariates);
    if (F.col_names != X.col_names)
        throw Error(ErrorCode::ColumnMismatch, "future covariate columns do not match the training covariates");
    if (F.rows() < m)
        throw Error(ErrorCode::InsufficientData, "future covariates have " + std::to_string(F.rows()) +
                                                     " rows, need m = " + std::to_string(cfg.m));
    return F.slice_rows(0, m);
}

int cmd_predict(const Overrides& o, const std::string& method, const std::string& estimator, const std::string& m,
                std::ostream& out)
{
    const config::PredictConfig cfg = load_predict(o, method, estimator, m);
    const fs::path dir = o.out_dir;
    Json effective = config::to_json(cfg);
    for (const auto& [key, path] : {std::pair{"data", cfg.data}, {"covariates", cfg.covariates},
                                    {"future_covariates", cfg.future_covariates}})
        if (!path.empty()) effective["input_sha256"][key] = sha256_hex(io::read_text(path));
    ManifestWriter manifest("predict", effective, cfg.rng_seed, dir);

    const std::vector<double> y_vec = io::read_series(cfg.data);
    const auto n = static_cast<Eigen::Index>(y_vec.size());
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_vec.data(), n);
    DesignMatrix X = cfg.covariates.empty() ? DesignMatrix(Eigen::MatrixXd(n, 0)) : io::read_design(cfg.covariates);
    if (X.rows() != n)
        throw Error(ErrorCode::DimensionMismatch, "covariates have " + std::to_string(X.rows()) + " rows, series has " +
                                                      std::to_string(n));
    const DesignMatrix X_future = future_design(cfg, X);

    std::optional<ObservationWeights> w;
    if (cfg.weights_delta) w = exp_weights(static_cast<std::size_t>(n), *cfg.weights_delta);
    const DesignMatrix Xs = X.standardize();
    FitResult fit;
    switch (cfg.estimator) {
    case Estimator::OLS: fit = fit_ols(Xs, y, w); break;
    case Estimator::LAD: fit = fit_lad(Xs, y); break;
    case Estimator::LASSO:
        fit = X.cols() > 0 ? fit_lasso_cv(Xs, y, cfg.cv_folds, w, derive_seed(cfg.rng_seed, 5)) : fit_ols(Xs, y, w);
        break;
    }

    IntervalOptions opts;
    opts.method = cfg.method;
    opts.block_len = cfg.block_len;
    opts.boot.B = cfg.boot_B;
    opts.boot.expected_block_len = cfg.boot_block_len;
    opts.boot.rng_seed = derive_seed(cfg.rng_seed, 4);
    const PredictionInterval pi = pi_regression(fit, X_future, 1.0 - cfg.level, opts);

    Json result{{"lower", pi.lower},
                {"upper", pi.upper},
                {"level", pi.level},
                {"m", pi.horizon_m},
                {"method", to_string(pi.method)},
                {"point_forecast", pi.point_forecast},
                {"estimator", to_string(cfg.estimator)},
                {"n", n},
                {"p", X.cols()},
                {"lambda", fit.lambda ? Json(*fit.lambda) : Json(nullptr)}};
    write_json(dir / "interval.json", result);
    manifest.output("interval.json");
    manifest.finish();

    out << to_string(pi.method) << " interval for the mean of the next " << pi.horizon_m << " values\n"
        << "  estimator " << to_string(cfg.estimator) << ", n = " << n << ", p = " << X.cols() << ", level "
        << fmt(pi.level, "%.3g") << "\n"
        << "  [" << fmt(pi.lower) << ", " << fmt(pi.upper) << "]  point " << fmt(pi.point_forecast) << "  width "
        << fmt(pi.width()) << "\n";
    return kExitOk;
}

int cmd_evaluate(const Overrides& o, std::ostream& out)
{
    const ExperimentConfig cfg = load_experiment(o);
    const fs::path dir = o.out_dir;
    ManifestWriter manifest("evaluate", config::to_json(cfg), cfg.rng_seed, dir);

    const CoverageReport report = run_coverage_experiment(cfg, o.jobs);
    std::ostringstream csv, table;
    write_report_csv(report, csv);
    write_report_table(report, table);
    io::write_text(dir / "report.csv", csv.str());
    io::write_text(dir / "report.txt", table.str());
    manifest.output("report.csv");
    manifest.output("report.txt");
    manifest.finish();
    out << table.str();
    return kExitOk;
}

int cmd_nagaev(const Overrides& o, std::ostream& out)
{
    if (o.config_path.empty()) throw Error(ErrorCode::ConfigInvalid, "nagaev needs --config");
    NagaevCheckConfig cfg = config::nagaev_from_json(config::load(o.config_path));
    if (auto seed = effective_seed_override(o)) cfg.rng_seed = *seed;
    const fs::path dir = o.out_dir;
    ManifestWriter manifest("nagaev", config::to_json(cfg), cfg.rng_seed, dir);

    const auto rows = run_nagaev_check(cfg);
    std::string csv = "case,q,x,poly_term,exp_term,bound,mc,se,holds\n";
    std::size_t violations = 0;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %5s %12s %12s %12s %12s %10s %9s %s\n", "case", "q", "x", "bound", "poly",
                  "exp", "mc", "se", "ok");
    std::string text = line;
    for (const auto& r : rows) {
        csv += std::string(to_string(r.which)) + "," + io::format_double(r.q) + "," + io::format_double(r.x) + "," +
               io::format_double(r.bound.poly_term) + "," + io::format_double(r.bound.exp_term) + "," +
               io::format_double(r.bound.total()) + "," + io::format_double(r.mc.proportion) + "," +
               io::format_double(r.mc.se) + "," + (r.holds ? "true" : "false") + "\n";
        std::snprintf(line, sizeof line, "%-10s %5.3g %12.6g %12.6g %12.6g %12.6g %10.6g %9.3g %s\n",
                      std::string(to_string(r.which)).c_str(), r.q, r.x, r.bound.total(), r.bound.poly_term,
                      r.bound.exp_term, r.mc.proportion, r.mc.se, r.holds ? "yes" : "NO");
        text += line;
        if (!r.holds) ++violations;
    }
    text += "constants: c_q, C1, C2 are implementation-calibrated defaults unless set in the config;\n"
            "this table checks the direction of the inequality (bound >= MC - 3 SE), not sharpness.\n";
    text += std::to_string(rows.size() - violations) + "/" + std::to_string(rows.size()) + " cells hold\n";
    io::write_text(dir / "nagaev.csv", csv);
    manifest.output("nagaev.csv");
    manifest.finish();
    out << text;
    return kExitOk;
}

void add_common(CLI::App* cmd, Overrides& o, bool config_required)
{
    auto* c = cmd->add_option("--config", o.config_path, "JSON configuration file");
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "base random seed (overrides config and " + std::string(kSeedEnv) + ")");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

void add_interval_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--level", o.level, "nominal coverage level, e.g. 0.9");
    cmd->add_option("--weights-delta", o.weights_delta, "exponential down-weighting factor in (0, 1)");
    cmd->add_option("--block-len", o.block_len, "CLT subsampling block length");
    cmd->add_option("--boot-B", o.boot_B, "bootstrap replicates for ADJ");
    cmd->add_option("--boot-block", o.boot_block, "expected stationary-bootstrap block length for ADJ");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Prediction intervals for time-aggregated forecasts", "aggpi"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    Overrides o;
    std::string method, estimator, m_value;

    auto* sim = app.add_subcommand("simulate", "simulate a series, covariates and truth from an experiment config");
    add_common(sim, o, false);
    sim->add_option("--preset", o.preset, "named experiment preset");

    auto* pred = app.add_subcommand("predict", "fit a model and build one prediction interval");
    add_common(pred, o, false);
    pred->add_option("--data", o.data, "series CSV (t,y)");
    pred->add_option("--covariates", o.covariates, "training covariates CSV");
    pred->add_option("--future-covariates", o.future_covariates, "covariates for the next m time points");
    pred->add_flag("--future-mean", o.future_mean, "use training column means as future covariates");
    pred->add_option("--method", method, "clt, qtl or adj");
    pred->add_option("--estimator", estimator, "ols, lad or lasso");
    pred->add_option("--m", m_value, "forecast horizon");
    add_interval_flags(pred, o);

    auto* eval = app.add_subcommand("evaluate", "run a Monte Carlo coverage experiment");
    add_common(eval, o, false);
    eval->add_option("--preset", o.preset, "named experiment preset");
    eval->add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->capture_default_str();
    eval->add_option("--method", o.methods, "comma-separated interval methods");
    eval->add_option("--estimator", o.estimators, "comma-separated estimators");
    eval->add_option("--m", o.horizons, "comma-separated horizons");
    eval->add_option("--reps", o.reps, "number of repetitions");
    add_interval_flags(eval, o);

    auto* nag = app.add_subcommand("nagaev", "compare tail bounds with simulated tail probabilities");
    add_common(nag, o, true);

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(o, out);
        if (*pred) return cmd_predict(o, method, estimator, m_value, out);
        if (*eval) return cmd_evaluate(o, out);
        if (*nag) return cmd_nagaev(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_numeric_failure(e.code()) ? kExitNumeric : kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}

}  // namespace aggpi::cli
