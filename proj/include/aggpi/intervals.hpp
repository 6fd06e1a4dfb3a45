#pragma once

#include "aggpi/linmodel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace aggpi {

enum class IntervalMethod { CLT, QTL, ADJ };

std::string_view to_string(IntervalMethod method);
/// Parses "clt", "qtl" (also "qlt"), "adj"; throws ConfigInvalid.
IntervalMethod parse_method(std::string_view name);

/// Interval for the mean of the next m values of a series.
struct PredictionInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.9;
    std::size_t horizon_m = 1;
    IntervalMethod method = IntervalMethod::QTL;
    double point_forecast = 0.0;

    double width() const { return upper - lower; }
    bool contains(double value) const { return lower <= value && value <= upper; }
};

struct BootstrapConfig {
    std::size_t B = 1000;
    /// Mean block length of the stationary bootstrap; defaults to n^(1/3).
    std::optional<double> expected_block_len;
    std::uint64_t rng_seed = 0;
    /// Kernel bandwidth for the ADJ quantiles; Silverman's rule when unset.
    std::optional<double> bandwidth;
};

struct LongRunSd {
    double sigma_tilde = 0.0;
    std::size_t kappa = 0;
};

/// Subsampling block estimator of the long-run standard deviation:
///   sigma = sqrt(pi * l / 2) / n * sum_k |sum of block k|,
/// over kappa = ceil(n / l) consecutive blocks; the final block may be partial.
LongRunSd longrun_sd_subsample(std::span<const double> e, std::size_t l);

/// ceil(n^(1/3)).
std::size_t default_block_length(std::size_t n);

/// Quenched-CLT interval for the mean of the next m errors:
///   +- sigma_tilde * |t_{kappa-1}(alpha/2)| / sqrt(m).
/// Block length defaults to default_block_length(n).
PredictionInterval pi_clt(std::span<const double> e, std::size_t m, double alpha,
                          std::optional<std::size_t> l = std::nullopt);

/// Empirical-quantile interval: type-7 alpha/2 and 1-alpha/2 quantiles of the
/// n-m+1 moving-window averages of e. Needs n >= m + 20.
PredictionInterval pi_qtl(std::span<const double> e, std::size_t m, double alpha);

/// One stationary-bootstrap replicate of length n: uniform block starts,
/// geometric block lengths with the given mean, circular wrap-around.
std::vector<double> stationary_bootstrap_replicate(std::span<const double> e, double expected_block_len,
                                                   std::uint64_t seed);

/// B replicates; replicate b uses the stream derive_seed(cfg.rng_seed, b).
std::vector<std::vector<double>> stationary_bootstrap(std::span<const double> e, const BootstrapConfig& cfg);

/// Silverman's rule 0.9 * min(sd, IQR/1.34) * B^(-1/5), floored at 1e-8 * (1 + |mean|).
double silverman_bandwidth(std::span<const double> samples);

/// u-quantile of the Gaussian-kernel-smoothed distribution of the samples,
/// found by bisection on F(q) = mean_b Phi((q - s_b) / h).
double kernel_quantile(std::span<const double> samples, double u, std::optional<double> bandwidth = std::nullopt);

/// Final m-window average of every bootstrap replicate (ADJ step iii at t = n).
std::vector<double> adj_final_window_means(std::span<const double> e, std::size_t m, const BootstrapConfig& cfg);

/// All t = m..n window averages of every replicate; diagnostics only.
std::vector<std::vector<double>> adj_replicate_window_means(std::span<const double> e, std::size_t m,
                                                            const BootstrapConfig& cfg);

/// Bootstrap-adjusted interval: kernel quantiles at alpha/2 and 1-alpha/2 of
/// the final window means of B stationary-bootstrap replicates.
PredictionInterval pi_adj(std::span<const double> e, std::size_t m, double alpha, const BootstrapConfig& cfg);

struct IntervalOptions {
    IntervalMethod method = IntervalMethod::QTL;
    /// CLT block length; default_block_length(n) when unset.
    std::optional<std::size_t> block_len;
    BootstrapConfig boot;
};

/// Interval for the mean of the next m residuals by the selected method.
PredictionInterval residual_interval(std::span<const double> e, std::size_t m, double alpha,
                                     const IntervalOptions& opts);

/// Regression interval: the average fitted value over the m future rows plus
/// the residual interval for horizon m. X_future is on the raw scale.
PredictionInterval pi_regression(const FitResult& fit, const DesignMatrix& X_future, double alpha,
                                 const IntervalOptions& opts);

}  // namespace aggpi
