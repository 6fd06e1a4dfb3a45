#include "aggpi/intervals.hpp"

#include "aggpi/error.hpp"
#include "aggpi/rng.hpp"
#include "aggpi/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

namespace aggpi {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0, 1), got " + std::to_string(alpha));
}

void check_horizon(std::size_t m)
{
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "horizon m must be at least 1");
}

double default_expected_block(std::size_t n)
{
    return std::max(1.0, std::cbrt(static_cast<double>(n)));
}

}  // namespace

std::string_view to_string(IntervalMethod method)
{
    switch (method) {
    case IntervalMethod::CLT: return "clt";
    case IntervalMethod::QTL: return "qtl";
    case IntervalMethod::ADJ: return "adj";
    }
    return "unknown";
}

IntervalMethod parse_method(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "clt") return IntervalMethod::CLT;
    if (lower == "qtl" || lower == "qlt") return IntervalMethod::QTL;
    if (lower == "adj") return IntervalMethod::ADJ;
    throw Error(ErrorCode::ConfigInvalid, "unknown interval method '" + std::string(name) + "'");
}

LongRunSd longrun_sd_subsample(std::span<const double> e, std::size_t l)
{
    const std::size_t n = e.size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "residual vector is empty");
    if (l < 1 || l > n) throw Error(ErrorCode::InvalidArgument, "block length must lie in [1, n]");
    LongRunSd out;
    out.kappa = (n + l - 1) / l;
    double total = 0.0;
    for (std::size_t k = 0; k < out.kappa; ++k) {
        const std::size_t first = k * l;
        const std::size_t last = std::min(n, first + l);
        double block = 0.0;
        for (std::size_t i = first; i < last; ++i) block += e[i];
        total += std::abs(block);
    }
    out.sigma_tilde = std::sqrt(std::numbers::pi * static_cast<double>(l) / 2.0) / static_cast<double>(n) * total;
    return out;
}

std::size_t default_block_length(std::size_t n)
{
    if (n == 0) return 1;
    auto l = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    // cbrt of a perfect cube can land a hair above the integer
    if ((l - 1) * (l - 1) * (l - 1) >= n) --l;
    return std::max<std::size_t>(l, 1);
}

PredictionInterval pi_clt(std::span<const double> e, std::size_t m, double alpha, std::optional<std::size_t> l)
{
    check_alpha(alpha);
    check_horizon(m);
    const std::size_t block = l.value_or(default_block_length(e.size()));
    const LongRunSd sd = longrun_sd_subsample(e, block);
    if (sd.kappa < 2)
        throw Error(ErrorCode::InsufficientData, "CLT interval needs at least two blocks (kappa - 1 >= 1 df)");
    const double t = std::abs(stats::student_t_quantile(static_cast<double>(sd.kappa - 1), alpha / 2.0));
    const double half = sd.sigma_tilde * t / std::sqrt(static_cast<double>(m));
    PredictionInterval pi;
    pi.lower = -half;
    pi.upper = half;
    pi.level = 1.0 - alpha;
    pi.horizon_m = m;
    pi.method = IntervalMethod::CLT;
    return pi;
}

PredictionInterval pi_qtl(std::span<const double> e, std::size_t m, double alpha)
{
    check_alpha(alpha);
    check_horizon(m);
    if (e.size() < m + 20)
        throw Error(ErrorCode::InsufficientWindows, "need n >= m + 20 (n=" + std::to_string(e.size()) +
                                                        ", m=" + std::to_string(m) + ")");
    std::vector<double> means = stats::window_means(e, m);
    std::sort(means.begin(), means.end());
    PredictionInterval pi;
    pi.lower = stats::quantile_type7_sorted(means, alpha / 2.0);
    pi.upper = stats::quantile_type7_sorted(means, 1.0 - alpha / 2.0);
    pi.level = 1.0 - alpha;
    pi.horizon_m = m;
    pi.method = IntervalMethod::QTL;
    return pi;
}

std::vector<double> stationary_bootstrap_replicate(std::span<const double> e, double expected_block_len,
                                                   std::uint64_t seed)
{
    const std::size_t n = e.size();
    if (n < 2) throw Error(ErrorCode::InsufficientData, "stationary bootstrap needs n >= 2");
    if (!(expected_block_len >= 1.0))
        throw Error(ErrorCode::InvalidArgument, "expected block length must be at least 1");
    Rng rng(seed);
    const double p = 1.0 / expected_block_len;
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const std::uint64_t start = rng.below(n);
        const std::uint64_t len = rng.geometric(p);
        for (std::uint64_t k = 0; k < len && out.size() < n; ++k) out.push_back(e[(start + k) % n]);
    }
    return out;
}

std::vector<std::vector<double>> stationary_bootstrap(std::span<const double> e, const BootstrapConfig& cfg)
{
    if (cfg.B < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs B >= 1");
    const double block = cfg.expected_block_len.value_or(default_expected_block(e.size()));
    std::vector<std::vector<double>> reps;
    reps.reserve(cfg.B);
    for (std::size_t b = 0; b < cfg.B; ++b)
        reps.push_back(stationary_bootstrap_replicate(e, block, derive_seed(cfg.rng_seed, b)));
    return reps;
}

double silverman_bandwidth(std::span<const double> samples)
{
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double mu = stats::mean(sorted);
    const double sd = stats::sample_sd(sorted);
    const double iqr = stats::quantile_type7_sorted(sorted, 0.75) - stats::quantile_type7_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = std::max(sd, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
    return std::max(h, 1e-8 * (1.0 + std::abs(mu)));
}

double kernel_quantile(std::span<const double> samples, double u, std::optional<double> bandwidth)
{
    if (samples.size() < 10) throw Error(ErrorCode::InsufficientData, "kernel quantile needs at least 10 samples");
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
    if (bandwidth && !(*bandwidth > 0.0))
        throw Error(ErrorCode::BandwidthNonPositive, "kernel bandwidth must be positive");
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double count = static_cast<double>(sorted.size());
    constexpr double reach = 10.0;  // Phi(-10) ~ 7.6e-24

    auto cdf = [&](double q) {
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), q - reach * h);
        const auto last = std::upper_bound(first, sorted.end(), q + reach * h);
        double total = static_cast<double>(first - sorted.begin());
        for (auto it = first; it != last; ++it) total += stats::normal_cdf((q - *it) / h);
        return total / count;
    };

    double lo = sorted.front() - reach * h;
    double hi = sorted.back() + reach * h;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> adj_final_window_means(std::span<const double> e, std::size_t m, const BootstrapConfig& cfg)
{
    check_horizon(m);
    if (e.size() < m) throw Error(ErrorCode::InsufficientData, "ADJ needs n >= m");
    const double block = cfg.expected_block_len.value_or(default_expected_block(e.size()));
    std::vector<double> means;
    means.reserve(cfg.B);
    for (std::size_t b = 0; b < cfg.B; ++b) {
        const auto rep = stationary_bootstrap_replicate(e, block, derive_seed(cfg.rng_seed, b));
        double sum = 0.0;
        for (std::size_t i = rep.size() - m; i < rep.size(); ++i) sum += rep[i];
        means.push_back(sum / static_cast<double>(m));
    }
    return means;
}

std::vector<std::vector<double>> adj_replicate_window_means(std::span<const double> e, std::size_t m,
                                                            const BootstrapConfig& cfg)
{
    check_horizon(m);
    if (e.size() < m) throw Error(ErrorCode::InsufficientData, "ADJ needs n >= m");
    std::vector<std::vector<double>> out;
    for (const auto& rep : stationary_bootstrap(e, cfg)) out.push_back(stats::window_means(rep, m));
    return out;
}

PredictionInterval pi_adj(std::span<const double> e, std::size_t m, double alpha, const BootstrapConfig& cfg)
{
    check_alpha(alpha);
    if (cfg.B < 100) throw Error(ErrorCode::InvalidArgument, "ADJ interval needs B >= 100 replicates");
    const auto means = adj_final_window_means(e, m, cfg);
    PredictionInterval pi;
    pi.lower = kernel_quantile(means, alpha / 2.0, cfg.bandwidth);
    pi.upper = kernel_quantile(means, 1.0 - alpha / 2.0, cfg.bandwidth);
    pi.level = 1.0 - alpha;
    pi.horizon_m = m;
    pi.method = IntervalMethod::ADJ;
    return pi;
}

PredictionInterval residual_interval(std::span<const double> e, std::size_t m, double alpha,
                                     const IntervalOptions& opts)
{
    switch (opts.method) {
    case IntervalMethod::CLT: return pi_clt(e, m, alpha, opts.block_len);
    case IntervalMethod::QTL: return pi_qtl(e, m, alpha);
    case IntervalMethod::ADJ: return pi_adj(e, m, alpha, opts.boot);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown interval method");
}

PredictionInterval pi_regression(const FitResult& fit, const DesignMatrix& X_future, double alpha,
                                 const IntervalOptions& opts)
{
    if (X_future.cols() != fit.beta.size())
        throw Error(ErrorCode::ColumnMismatch, "future design has " + std::to_string(X_future.cols()) +
                                                   " columns, fit has " + std::to_string(fit.beta.size()));
    const auto m = static_cast<std::size_t>(X_future.rows());
    check_horizon(m);
    const double point = fit.predict(X_future.raw_values()).mean();
    const std::span<const double> resid(fit.residuals.data(), static_cast<std::size_t>(fit.residuals.size()));
    PredictionInterval pi = residual_interval(resid, m, alpha, opts);
    pi.point_forecast = point;
    pi.lower += point;
    pi.upper += point;
    return pi;
}

}  // namespace aggpi
