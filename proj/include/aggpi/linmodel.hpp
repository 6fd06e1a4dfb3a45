#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aggpi {

/// n x p covariate matrix with column labels and standardization metadata.
///
/// When `standardized` is set, `values` holds (x - col_means) / col_scales and
/// the raw design can be recovered with raw_values(). Columns with zero
/// variance are exempt from scaling: they are centered to zero, keep scale 1,
/// and are flagged in `constant_cols`. Fits drop flagged columns (their
/// coefficient is reported as exactly 0; the intercept absorbs them).
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> col_names;
    bool standardized = false;
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_scales;
    std::vector<bool> constant_cols;

    DesignMatrix() = default;

    /// Wraps raw values; names default to x1..xp.
    explicit DesignMatrix(Eigen::MatrixXd raw, std::vector<std::string> names = {});

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    /// Returns a copy with every non-constant column scaled to sample mean 0
    /// and sample sd 1 (n-1 denominator). Requires n >= 2.
    DesignMatrix standardize() const;

    /// Values on the original scale.
    Eigen::MatrixXd raw_values() const;

    /// Rows [first, first + count) as a new (unstandardized) design on the raw scale.
    DesignMatrix slice_rows(Eigen::Index first, Eigen::Index count) const;

    /// Horizontal concatenation of raw designs with the same row count.
    static DesignMatrix hstack(const DesignMatrix& left, const DesignMatrix& right);
};

/// Nonnegative observation weights normalized to sum n.
struct ObservationWeights {
    Eigen::VectorXd v;

    ObservationWeights() = default;

    /// Validates nonnegativity and rescales so the entries sum to their count.
    static ObservationWeights normalized(Eigen::VectorXd raw);

    static ObservationWeights uniform(Eigen::Index n);

    /// Subset of entries, renormalized to sum to the subset size.
    ObservationWeights subset(const std::vector<Eigen::Index>& rows) const;
};

enum class Estimator { OLS, LAD, LASSO };

std::string_view to_string(Estimator e);
/// Parses "ols", "lad", "lasso" (case-insensitive); throws ConfigInvalid.
Estimator parse_estimator(std::string_view name);

struct FitResult {
    /// Coefficients on the original covariate scale.
    Eigen::VectorXd beta;
    /// Coefficients on the standardized scale (equal to beta when the design
    /// was not standardized).
    Eigen::VectorXd beta_standardized;
    double intercept = 0.0;
    Eigen::VectorXd residuals;
    Estimator estimator = Estimator::OLS;
    std::optional<double> lambda;
    std::optional<Eigen::VectorXd> weights_used;
    int iterations = 0;
    /// LASSO only, when requested: objective after every sweep.
    std::vector<double> objective_trace;

    /// intercept + x^T beta for each row of a raw-scale design.
    Eigen::VectorXd predict(const Eigen::MatrixXd& raw_rows) const;
};

struct LadOptions {
    int max_iter = 200;
    double denominator_floor = 1e-8;
    double tol = 1e-10;
};

struct LassoOptions {
    double tol = 1e-7;
    int max_sweeps = 10000;
    bool record_objective = false;
};

FitResult fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y,
                  const std::optional<ObservationWeights>& w = std::nullopt);

FitResult fit_lad(const DesignMatrix& X, const Eigen::VectorXd& y, const LadOptions& opts = {});

/// sign(z) * max(|z| - g, 0).
double soft_threshold(double z, double g);

/// Weighted LASSO by cyclic coordinate descent:
///   (1/n) sum v_i (y_i - b0 - x_i^T b)^2 + lambda * ||b||_1
/// with an unpenalized intercept. X must be standardized.
FitResult fit_lasso(const DesignMatrix& X, const Eigen::VectorXd& y, double lambda,
                    const std::optional<ObservationWeights>& w = std::nullopt,
                    const LassoOptions& opts = {});

/// Smallest lambda for which the all-zero coefficient vector is optimal:
/// max_j |(2/n) sum v_i x_ij (y_i - ybar_w)|.
double lambda_max(const DesignMatrix& X, const Eigen::VectorXd& y,
                  const std::optional<ObservationWeights>& w = std::nullopt);

/// count values log-spaced from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda_grid(const DesignMatrix& X, const Eigen::VectorXd& y,
                                        const std::optional<ObservationWeights>& w = std::nullopt,
                                        int count = 100, double ratio = 1e-4);

/// Warm-started solutions along a decreasing lambda grid.
struct LassoPath {
    std::vector<double> lambdas;
    /// p x L, standardized scale; only the first `fitted` columns are valid.
    Eigen::MatrixXd betas;
    std::vector<double> intercepts;
    /// Number of grid points solved. The path stops early once the fit
    /// explains at least 99.9% of the weighted variance of y (the remaining
    /// points would only interpolate noise).
    std::size_t fitted = 0;
};

LassoPath lasso_path(const DesignMatrix& X, const Eigen::VectorXd& y,
                     const std::vector<double>& lambdas,
                     const std::optional<ObservationWeights>& w = std::nullopt,
                     const LassoOptions& opts = {});

enum class FoldScheme { Contiguous, Shuffled };

struct CvResult {
    double lambda_star = 0.0;
    /// Mean out-of-fold weighted squared error per grid point; +inf where a
    /// fold's path stopped before reaching that lambda.
    std::vector<double> cv_errors;
};

/// K-fold cross-validation over a strictly decreasing grid. Folds are
/// contiguous blocks by default; the seed only matters for shuffled folds.
/// Ties go to the larger lambda.
CvResult cv_lasso(const DesignMatrix& X, const Eigen::VectorXd& y, int k_folds,
                  const std::vector<double>& lambda_grid,
                  const std::optional<ObservationWeights>& w = std::nullopt,
                  std::uint64_t rng_seed = 0, FoldScheme scheme = FoldScheme::Contiguous,
                  const LassoOptions& opts = {});

/// Cross-validated LASSO: default grid, cv_lasso, then a full-data fit at
/// lambda_star (warm-started along the grid).
FitResult fit_lasso_cv(const DesignMatrix& X, const Eigen::VectorXd& y, int k_folds = 10,
                       const std::optional<ObservationWeights>& w = std::nullopt,
                       std::uint64_t rng_seed = 0, const LassoOptions& opts = {});

}  // namespace aggpi
