#include "aggpi/harness.hpp"

#include "aggpi/error.hpp"
#include "aggpi/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace aggpi {

namespace {

// independent seed streams hanging off the experiment seed
constexpr std::uint64_t kBetaStream = 1;
constexpr std::uint64_t kCovariateStream = 2;
constexpr std::uint64_t kErrorStream = 3;
constexpr std::uint64_t kBootStream = 4;
constexpr std::uint64_t kCvStream = 5;
constexpr std::uint64_t kRedrawStream = 6;

constexpr std::size_t kWeatherSeries = 151;

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::uint64_t stream_seed(const ExperimentConfig& cfg, std::uint64_t stream, std::uint64_t index)
{
    return derive_seed(derive_seed(cfg.rng_seed, stream), index);
}

std::string format_real(double x)
{
    if (std::isnan(x)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::size_t max_horizon(const ExperimentConfig& cfg)
{
    return *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
}

FitResult fit_estimator(const ExperimentConfig& cfg, Estimator estimator, const DesignMatrix& Xs,
                        const Eigen::VectorXd& y, const std::optional<ObservationWeights>& w, std::size_t rep)
{
    switch (estimator) {
    case Estimator::OLS: return fit_ols(Xs, y, w);
    case Estimator::LAD: return fit_lad(Xs, y);
    case Estimator::LASSO: return fit_lasso_cv(Xs, y, cfg.cv_folds, w, stream_seed(cfg, kCvStream, rep));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown estimator");
}

}  // namespace

std::string_view to_string(CovariateLayout layout)
{
    switch (layout) {
    case CovariateLayout::None: return "none";
    case CovariateLayout::LowDim: return "lowdim";
    case CovariateLayout::HighDim: return "highdim";
    case CovariateLayout::Custom: return "custom";
    }
    return "unknown";
}

CovariateLayout parse_layout(std::string_view name)
{
    const auto s = lowercase(name);
    if (s == "none") return CovariateLayout::None;
    if (s == "lowdim") return CovariateLayout::LowDim;
    if (s == "highdim") return CovariateLayout::HighDim;
    if (s == "custom") return CovariateLayout::Custom;
    throw Error(ErrorCode::ConfigInvalid, "unknown covariate layout '" + std::string(name) + "'");
}

std::string_view short_label(Estimator e)
{
    return e == Estimator::LASSO ? "lss" : to_string(e);
}

void validate(const ExperimentConfig& cfg)
{
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
    if (cfg.n_reps < 1) fail("n_reps must be at least 1");
    if (cfg.n < 2) fail("n must be at least 2");
    if (cfg.horizons.empty()) fail("horizons must not be empty");
    for (auto m : cfg.horizons)
        if (m < 1) fail("every horizon must be at least 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail("level must lie in (0, 1)");
    if (cfg.methods.empty()) fail("methods must not be empty");
    if (cfg.estimators.empty()) fail("estimators must not be empty");
    if (cfg.cv_folds < 2) fail("cv_folds must be at least 2");
    if (cfg.boot_B < 100) fail("boot_B must be at least 100");
    if (cfg.boot_block_len && !(*cfg.boot_block_len >= 1.0)) fail("boot_block_len must be at least 1");
    if (cfg.clt_block_len && *cfg.clt_block_len < 1) fail("clt_block_len must be at least 1");
    if (cfg.weights_delta && !(*cfg.weights_delta > 0.0 && *cfg.weights_delta < 1.0))
        fail("weights_delta must lie in (0, 1)");
    if (!(cfg.beta.sparsity_pct >= 0.0 && cfg.beta.sparsity_pct <= 100.0)) fail("sparsity must lie in [0, 100]");
    if (!(cfg.dgp.sigma > 0.0)) fail("sigma must be positive");
    if (!(cfg.dgp.alpha_star > 0.0 && cfg.dgp.alpha_star <= 2.0)) fail("alpha_star must lie in (0, 2]");
    if (cfg.covariate_layout == CovariateLayout::Custom) {
        if (cfg.custom.n_freqs > cfg.custom.period / 2) fail("custom n_freqs must not exceed period / 2");
        if (!(std::abs(cfg.custom.weather_ar) < 1.0)) fail("custom weather_ar must lie in (-1, 1)");
    }
}

std::size_t layout_width(const ExperimentConfig& cfg)
{
    switch (cfg.covariate_layout) {
    case CovariateLayout::None: return 0;
    case CovariateLayout::LowDim: return kWeatherSeries + 168;
    case CovariateLayout::HighDim: return kWeatherSeries + 336;
    case CovariateLayout::Custom:
        return cfg.custom.n_weather + 2 * cfg.custom.n_freqs + (cfg.custom.weekend_dummies ? 2 : 0);
    }
    return 0;
}

DesignMatrix make_covariates(const ExperimentConfig& cfg, std::size_t rows, Rng& rng)
{
    std::size_t weather = 0, freqs = 0, period = 168;
    bool dummies = false;
    double ar = 0.9;
    switch (cfg.covariate_layout) {
    case CovariateLayout::None: return DesignMatrix(Eigen::MatrixXd(static_cast<Eigen::Index>(rows), 0));
    case CovariateLayout::LowDim:
        weather = kWeatherSeries;
        freqs = 84;
        break;
    case CovariateLayout::HighDim:
        weather = kWeatherSeries;
        freqs = 168;
        period = 336;
        break;
    case CovariateLayout::Custom:
        weather = cfg.custom.n_weather;
        freqs = cfg.custom.n_freqs;
        period = cfg.custom.period;
        dummies = cfg.custom.weekend_dummies;
        ar = cfg.custom.weather_ar;
        break;
    }
    const DesignMatrix w = gen_stochastic_covariates(rows, weather, ar, rng);
    const DesignMatrix d = gen_deterministic_covariates(rows, freqs, dummies, period);
    return DesignMatrix::hstack(w, d);
}

Eigen::VectorXd experiment_beta(const ExperimentConfig& cfg)
{
    BetaSpec spec = cfg.beta;
    spec.p = layout_width(cfg);
    if (spec.rng_seed == 0) spec.rng_seed = derive_seed(cfg.rng_seed, kBetaStream);
    return draw_beta(spec);
}

std::vector<CellKey> experiment_cells(const ExperimentConfig& cfg)
{
    std::vector<CellKey> cells;
    for (auto e : cfg.estimators)
        for (auto method : cfg.methods)
            for (auto m : cfg.horizons) cells.push_back({e, method, m});
    return cells;
}

ExperimentFixture make_fixture(const ExperimentConfig& cfg)
{
    validate(cfg);
    ExperimentFixture fx;
    fx.beta = experiment_beta(cfg);
    if (!cfg.redraw_covariates) {
        Rng rng(derive_seed(cfg.rng_seed, kCovariateStream));
        fx.covariates = make_covariates(cfg, cfg.n + max_horizon(cfg), rng);
    }
    return fx;
}

RepOutcome run_rep(const ExperimentConfig& cfg, std::size_t rep_index)
{
    return run_rep(cfg, make_fixture(cfg), rep_index);
}

SimulatedSample simulate_sample(const ExperimentConfig& cfg, const ExperimentFixture& fixture, std::size_t rep_index)
{
    const std::size_t total = cfg.n + max_horizon(cfg);
    DesignMatrix X = fixture.covariates;
    if (cfg.redraw_covariates) {
        Rng rng(stream_seed(cfg, kRedrawStream, rep_index));
        X = make_covariates(cfg, total, rng);
    }
    if (static_cast<std::size_t>(X.rows()) != total || X.cols() != fixture.beta.size())
        throw Error(ErrorCode::DimensionMismatch, "fixture does not match the experiment");

    DgpSpec spec = cfg.dgp;
    spec.n = total;
    Rng err_rng(stream_seed(cfg, kErrorStream, rep_index));
    const auto errors = gen_errors(spec, err_rng);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(errors.data(), static_cast<Eigen::Index>(total));
    if (X.cols() > 0) y += X.values * fixture.beta;
    return {std::move(y), std::move(X)};
}

RepOutcome run_rep(const ExperimentConfig& cfg, const ExperimentFixture& fixture, std::size_t rep_index)
{
    const std::size_t n = cfg.n;
    const auto [y, X] = simulate_sample(cfg, fixture, rep_index);

    const auto ni = static_cast<Eigen::Index>(n);
    const DesignMatrix Xs = X.slice_rows(0, ni).standardize();
    const Eigen::VectorXd y_train = y.head(ni);
    std::optional<ObservationWeights> w;
    if (cfg.weights_delta) w = exp_weights(n, *cfg.weights_delta);

    RepOutcome out;
    out.rep = rep_index;
    const double alpha = 1.0 - cfg.level;
    for (auto estimator : cfg.estimators) {
        std::optional<FitResult> fit;
        try {
            fit = fit_estimator(cfg, estimator, Xs, y_train, w, rep_index);
        } catch (const Error&) {
            fit.reset();
        }
        for (auto method : cfg.methods) {
            for (auto m : cfg.horizons) {
                CellOutcome cell;
                cell.key = {estimator, method, m};
                const auto mi = static_cast<Eigen::Index>(m);
                cell.target = y.segment(ni, mi).mean();
                if (fit) {
                    IntervalOptions opts;
                    opts.method = method;
                    opts.block_len = cfg.clt_block_len;
                    opts.boot.B = cfg.boot_B;
                    opts.boot.expected_block_len = cfg.boot_block_len;
                    opts.boot.rng_seed = derive_seed(stream_seed(cfg, kBootStream, rep_index), m);
                    try {
                        const auto pi = pi_regression(*fit, X.slice_rows(ni, mi), alpha, opts);
                        cell.lower = pi.lower;
                        cell.upper = pi.upper;
                        cell.width = pi.width();
                        cell.hit = pi.contains(cell.target);
                    } catch (const Error&) {
                        cell.hit.reset();
                    }
                }
                out.cells.push_back(cell);
            }
        }
    }
    return out;
}

const CoverageCell* CoverageReport::find(Estimator e, IntervalMethod method, std::size_t m) const
{
    const CellKey key{e, method, m};
    for (const auto& c : cells)
        if (c.key == key) return &c;
    return nullptr;
}

CoverageReport aggregate(const ExperimentConfig& cfg, const std::vector<RepOutcome>& reps)
{
    CoverageReport report;
    report.name = cfg.name;
    report.dgp = std::string(to_string(cfg.dgp.kind));
    report.beta_dist = std::string(to_string(cfg.beta.dist));
    report.sparsity = cfg.beta.sparsity_pct;
    report.level = cfg.level;
    report.n_reps = reps.size();
    for (const auto& key : experiment_cells(cfg)) {
        CoverageCell cell;
        cell.key = key;
        report.cells.push_back(cell);
    }
    std::vector<double> width_sums(report.cells.size(), 0.0);
    // sum widths in rep order so the mean does not depend on scheduling
    std::vector<const RepOutcome*> ordered;
    for (const auto& r : reps) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](auto a, auto b) { return a->rep < b->rep; });
    for (const auto* r : ordered) {
        if (r->cells.size() != report.cells.size())
            throw Error(ErrorCode::DimensionMismatch, "repetition outcome does not match the experiment cells");
        for (std::size_t k = 0; k < r->cells.size(); ++k) {
            const auto& c = r->cells[k];
            auto& agg = report.cells[k];
            if (!c.hit) {
                ++agg.n_na;
                continue;
            }
            ++agg.n_reps;
            if (*c.hit) ++agg.hit_count;
            width_sums[k] += c.width;
        }
    }
    for (std::size_t k = 0; k < report.cells.size(); ++k) {
        auto& agg = report.cells[k];
        const double valid = static_cast<double>(agg.n_reps);
        agg.coverage_pct = agg.n_reps > 0 ? 100.0 * static_cast<double>(agg.hit_count) / valid : std::nan("");
        agg.mean_width = agg.n_reps > 0 ? width_sums[k] / valid : std::nan("");
    }
    return report;
}

CoverageReport run_coverage_experiment(const ExperimentConfig& cfg, unsigned jobs)
{
    const ExperimentFixture fixture = make_fixture(cfg);
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cfg.n_reps));

    std::vector<RepOutcome> outcomes(cfg.n_reps);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= cfg.n_reps) return;
            try {
                outcomes[rep] = run_rep(cfg, fixture, rep);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cfg.n_reps);
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return aggregate(cfg, outcomes);
}

void write_report_csv(const CoverageReport& report, std::ostream& out)
{
    out << "dgp,beta_dist,sparsity,estimator,method,m,n_reps,coverage_pct,mean_width,hit_count,n_na\n";
    for (const auto& c : report.cells) {
        out << report.dgp << ',' << report.beta_dist << ',' << format_real(report.sparsity) << ','
            << to_string(c.key.estimator) << ',' << to_string(c.key.method) << ',' << c.key.m << ',' << c.n_reps
            << ',' << format_real(c.coverage_pct) << ',' << format_real(c.mean_width) << ',' << c.hit_count << ','
            << c.n_na << '\n';
    }
}

void write_report_table(const CoverageReport& report, std::ostream& out)
{
    std::vector<std::size_t> horizons;
    std::vector<std::pair<Estimator, IntervalMethod>> rows;
    for (const auto& c : report.cells) {
        if (std::find(horizons.begin(), horizons.end(), c.key.m) == horizons.end()) horizons.push_back(c.key.m);
        const std::pair row{c.key.estimator, c.key.method};
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    }
    out << (report.name.empty() ? std::string("experiment") : report.name) << ": errors=" << report.dgp
        << " beta=" << report.beta_dist << " sparsity=" << format_real(report.sparsity)
        << "% level=" << format_real(100.0 * report.level) << "% reps=" << report.n_reps << '\n';
    out << std::left << std::setw(10) << "";
    for (auto m : horizons) out << std::right << std::setw(9) << ("m=" + std::to_string(m));
    out << '\n';
    for (const auto& [e, method] : rows) {
        out << std::left << std::setw(10) << (std::string(short_label(e)) + "-" + std::string(to_string(method)));
        for (auto m : horizons) {
            const auto* c = report.find(e, method, m);
            std::string cell = "NA";
            if (c && c->n_reps > 0) {
                std::ostringstream s;
                s << std::fixed << std::setprecision(1) << c->coverage_pct;
                cell = s.str();
            }
            out << std::right << std::setw(9) << cell;
        }
        out << '\n';
    }
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const char* table : {"table1i", "table1ii"})
        for (const char* s : {"99", "90", "70", "50", "20"})
            for (const char* dist : {"uniform", "cauchy"})
                for (const char* dgp : {"shortheavy", "longheavy", "nonlinheavy"})
                    names.push_back(std::string(table) + "-" + s + "-" + dist + "-" + dgp);
    names.emplace_back("calibration-iid");
    return names;
}

ExperimentConfig preset(std::string_view name)
{
    ExperimentConfig cfg;
    cfg.name = std::string(name);
    if (name == "calibration-iid") {
        cfg.dgp.kind = DgpKind::AR1;
        cfg.dgp.phi1 = 0.0;
        cfg.dgp.sigma = 1.0;
        cfg.dgp.alpha_star = 2.0;
        cfg.covariate_layout = CovariateLayout::None;
        cfg.beta.sparsity_pct = 100.0;
        cfg.n = 2000;
        cfg.horizons = {20};
        cfg.methods = {IntervalMethod::QTL, IntervalMethod::CLT};
        cfg.estimators = {Estimator::OLS};
        cfg.n_reps = 500;
        return cfg;
    }

    std::vector<std::string> parts;
    std::string token;
    std::istringstream in{std::string(name)};
    while (std::getline(in, token, '-')) parts.push_back(token);
    if (parts.size() != 4 || (parts[0] != "table1i" && parts[0] != "table1ii"))
        throw Error(ErrorCode::ConfigInvalid, "unknown preset '" + std::string(name) + "'");

    const bool high = parts[0] == "table1ii";
    if (high) {
        cfg.covariate_layout = CovariateLayout::HighDim;
        cfg.n = 336;
        cfg.horizons = {24, 48, 72, 96};
        cfg.estimators = {Estimator::LASSO};
        cfg.methods = {IntervalMethod::QTL, IntervalMethod::CLT, IntervalMethod::ADJ};
    } else {
        cfg.covariate_layout = CovariateLayout::LowDim;
        cfg.n = 8736;
        cfg.horizons = {168, 336, 504, 672};
        cfg.estimators = {Estimator::OLS, Estimator::LAD, Estimator::LASSO};
        cfg.methods = {IntervalMethod::QTL, IntervalMethod::CLT};
    }

    const std::string& s = parts[1];
    if (s != "99" && s != "90" && s != "70" && s != "50" && s != "20")
        throw Error(ErrorCode::ConfigInvalid, "preset sparsity must be one of 99, 90, 70, 50, 20");
    cfg.beta.sparsity_pct = std::stod(s);
    cfg.beta.dist = parse_beta_dist(parts[2]);

    // shared error-process parameters
    cfg.dgp.phi1 = 0.6;
    cfg.dgp.phi2 = -0.3;
    cfg.dgp.gamma = -0.8;
    cfg.dgp.delta = 0.05;
    cfg.dgp.threshold = 0.0;
    cfg.dgp.sigma = 54.1;
    cfg.dgp.alpha_star = 1.5;
    if (parts[3] == "shortheavy")
        cfg.dgp.kind = DgpKind::AR1;
    else if (parts[3] == "longheavy")
        cfg.dgp.kind = DgpKind::LongMemory;
    else if (parts[3] == "nonlinheavy")
        cfg.dgp.kind = DgpKind::LSTAR;
    else
        throw Error(ErrorCode::ConfigInvalid, "preset error process must be shortheavy, longheavy or nonlinheavy");
    return cfg;
}

}  // namespace aggpi
