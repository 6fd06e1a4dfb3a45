#pragma once

#include "aggpi/dgp.hpp"
#include "aggpi/intervals.hpp"
#include "aggpi/linmodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aggpi {

/// How the simulated covariates are built.
///   None:    no covariates; y is the error process itself.
///   LowDim:  151 AR(1) weather stand-ins + 168 Fourier columns (period 168), p = 319.
///   HighDim: 151 AR(1) weather stand-ins + 336 Fourier columns (period 336), p = 487.
///   Custom:  sizes taken from CustomLayout.
enum class CovariateLayout { None, LowDim, HighDim, Custom };

std::string_view to_string(CovariateLayout layout);
CovariateLayout parse_layout(std::string_view name);

struct CustomLayout {
    std::size_t n_weather = 0;
    double weather_ar = 0.9;
    std::size_t n_freqs = 0;
    std::size_t period = 168;
    bool weekend_dummies = false;
};

struct ExperimentConfig {
    std::string name;
    DgpSpec dgp;
    BetaSpec beta;
    std::size_t n = 336;
    std::vector<std::size_t> horizons{24, 48, 72, 96};
    std::vector<IntervalMethod> methods{IntervalMethod::QTL};
    std::vector<Estimator> estimators{Estimator::LASSO};
    std::size_t n_reps = 200;
    double level = 0.9;
    std::uint64_t rng_seed = 1;
    CovariateLayout covariate_layout = CovariateLayout::HighDim;
    CustomLayout custom;
    /// Draw a fresh covariate matrix in every repetition instead of once.
    bool redraw_covariates = false;
    /// Exponential down-weighting of the training sample (OLS and LASSO).
    std::optional<double> weights_delta;
    int cv_folds = 10;
    /// CLT block length; ceil(n^(1/3)) when unset.
    std::optional<std::size_t> clt_block_len;
    /// ADJ bootstrap settings; the seed is derived per repetition.
    std::size_t boot_B = 1000;
    std::optional<double> boot_block_len;
};

/// Throws ConfigInvalid when a field is out of range.
void validate(const ExperimentConfig& cfg);

/// Number of covariate columns the layout produces.
std::size_t layout_width(const ExperimentConfig& cfg);

/// Covariates for time points 0..rows-1 (raw scale).
DesignMatrix make_covariates(const ExperimentConfig& cfg, std::size_t rows, Rng& rng);

/// The fixed coefficient vector of an experiment.
Eigen::VectorXd experiment_beta(const ExperimentConfig& cfg);

struct CellKey {
    Estimator estimator = Estimator::LASSO;
    IntervalMethod method = IntervalMethod::QTL;
    std::size_t m = 1;

    bool operator==(const CellKey&) const = default;
};

/// Cells in report order: estimator-major, then method, then horizon.
std::vector<CellKey> experiment_cells(const ExperimentConfig& cfg);

struct CellOutcome {
    CellKey key;
    /// Unset when the fit or the interval failed (NA).
    std::optional<bool> hit;
    double width = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double target = 0.0;
};

struct RepOutcome {
    std::size_t rep = 0;
    std::vector<CellOutcome> cells;
};

/// Fixed inputs shared by all repetitions of an experiment.
struct ExperimentFixture {
    Eigen::VectorXd beta;
    /// n + max(m) rows; empty when covariates are redrawn per repetition.
    DesignMatrix covariates;
};

ExperimentFixture make_fixture(const ExperimentConfig& cfg);

/// Response and covariates of one repetition over n + max(m) time points.
struct SimulatedSample {
    Eigen::VectorXd y;
    DesignMatrix X;
};

SimulatedSample simulate_sample(const ExperimentConfig& cfg, const ExperimentFixture& fixture, std::size_t rep_index);

/// One repetition: simulate n + max(m) points, fit on the first n, build every
/// (estimator, method, m) interval and check it against the realized mean of
/// the next m values. Future covariate rows are treated as known.
RepOutcome run_rep(const ExperimentConfig& cfg, const ExperimentFixture& fixture, std::size_t rep_index);
RepOutcome run_rep(const ExperimentConfig& cfg, std::size_t rep_index);

struct CoverageCell {
    CellKey key;
    std::size_t hit_count = 0;
    /// Repetitions with a valid interval.
    std::size_t n_reps = 0;
    std::size_t n_na = 0;
    double coverage_pct = 0.0;
    double mean_width = 0.0;
};

struct CoverageReport {
    std::string name;
    std::string dgp;
    std::string beta_dist;
    double sparsity = 0.0;
    double level = 0.9;
    std::size_t n_reps = 0;
    std::vector<CoverageCell> cells;

    const CoverageCell* find(Estimator e, IntervalMethod method, std::size_t m) const;
};

/// Aggregates rep outcomes (any order) into a report.
CoverageReport aggregate(const ExperimentConfig& cfg, const std::vector<RepOutcome>& reps);

/// Runs all repetitions on `jobs` threads (0 = hardware concurrency). The
/// report does not depend on the thread count.
CoverageReport run_coverage_experiment(const ExperimentConfig& cfg, unsigned jobs = 1);

/// CSV: dgp,beta_dist,sparsity,estimator,method,m,n_reps,coverage_pct,mean_width,hit_count,n_na
void write_report_csv(const CoverageReport& report, std::ostream& out);

/// Aligned table with one row per estimator-method pair ("lss-qtl") and one
/// column per horizon.
void write_report_table(const CoverageReport& report, std::ostream& out);

/// Named experiment presets such as "table1ii-99-uniform-shortheavy".
std::vector<std::string> preset_names();
ExperimentConfig preset(std::string_view name);

/// Short estimator label used in tables: ols, lad, lss.
std::string_view short_label(Estimator e);

}  // namespace aggpi
