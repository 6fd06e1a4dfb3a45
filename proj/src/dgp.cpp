#include "aggpi/dgp.hpp"

#include "aggpi/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace aggpi {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void check_stable_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw Error(ErrorCode::AlphaOutOfRange, "alpha* must lie in (0, 2], got " + std::to_string(alpha));
}

void check_sigma(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorCode::InvalidArgument, "sigma must be positive and finite");
}

}  // namespace

std::string_view to_string(DgpKind kind)
{
    switch (kind) {
    case DgpKind::AR1: return "ar1";
    case DgpKind::LongMemory: return "longmemory";
    case DgpKind::LSTAR: return "lstar";
    }
    return "unknown";
}

DgpKind parse_dgp_kind(std::string_view name)
{
    const auto s = lowercase(name);
    if (s == "ar1") return DgpKind::AR1;
    if (s == "longmemory" || s == "long_memory" || s == "lm") return DgpKind::LongMemory;
    if (s == "lstar") return DgpKind::LSTAR;
    throw Error(ErrorCode::ConfigInvalid, "unknown error process '" + std::string(name) + "'");
}

std::string_view to_string(BetaDist dist)
{
    return dist == BetaDist::Cauchy ? "cauchy" : "uniform";
}

BetaDist parse_beta_dist(std::string_view name)
{
    const auto s = lowercase(name);
    if (s == "uniform" || s == "uniformpm1") return BetaDist::UniformPM1;
    if (s == "cauchy") return BetaDist::Cauchy;
    throw Error(ErrorCode::ConfigInvalid, "unknown coefficient law '" + std::string(name) + "'");
}

double sample_alpha_stable(double alpha, Rng& rng)
{
    check_stable_alpha(alpha);
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    if (alpha == 1.0) return std::tan(v);
    const double lead = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    return lead * std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

double stable_abs_moment(double alpha, double p)
{
    check_stable_alpha(alpha);
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be positive");
    const double gaussian_part = std::pow(2.0, p) * std::tgamma((1.0 + p) / 2.0) / std::sqrt(std::numbers::pi);
    if (alpha == 2.0) return gaussian_part;
    if (p >= alpha) return std::numeric_limits<double>::infinity();
    return gaussian_part * std::tgamma(1.0 - p / alpha) / std::tgamma(1.0 - p / 2.0);
}

double logistic_transition(double e_prev, double delta, double threshold)
{
    return 1.0 / (1.0 + std::exp(-delta * (e_prev - threshold)));
}

std::vector<double> gen_ar1(const DgpSpec& spec, Rng& rng)
{
    if (!(std::abs(spec.phi1) < 1.0)) throw Error(ErrorCode::UnstableSpec, "AR(1) needs |phi1| < 1");
    check_sigma(spec.sigma);
    check_stable_alpha(spec.alpha_star);
    std::vector<double> out;
    out.reserve(spec.n);
    double e = 0.0;
    for (std::size_t i = 0; i < spec.burn_in + spec.n; ++i) {
        e = spec.phi1 * e + spec.sigma * sample_alpha_stable(spec.alpha_star, rng);
        if (i >= spec.burn_in) out.push_back(e);
    }
    return out;
}

std::vector<double> longmem_coefficients(double gamma, std::size_t J)
{
    std::vector<double> c(J + 1);
    for (std::size_t j = 0; j <= J; ++j) c[j] = std::pow(static_cast<double>(j + 1), gamma);
    return c;
}

void check_longmem_truncation(double gamma, std::size_t J)
{
    if (!(gamma < -0.5))
        throw Error(ErrorCode::InvalidArgument, "long-memory filter needs gamma < -0.5 (square-summable weights)");
    if (J < 1000) throw Error(ErrorCode::TruncationTooSmall, "truncation J must be at least 1000");
    const double e2 = 2.0 * gamma + 1.0;
    const double tail = std::pow(static_cast<double>(J + 1), e2) / std::abs(e2);
    double retained = 0.0;
    for (std::size_t j = 0; j <= J; ++j) retained += std::pow(static_cast<double>(j + 1), 2.0 * gamma);
    if (tail > 1e-2 * retained)
        throw Error(ErrorCode::TruncationTooSmall,
                    "truncation J=" + std::to_string(J) + " leaves squared tail mass " + std::to_string(tail / retained) +
                        " of the retained mass (limit 0.01)");
}

std::vector<double> longmem_filter(std::span<const double> innovations, double gamma, std::size_t J, double sigma,
                                   std::size_t n)
{
    if (innovations.size() != n + J)
        throw Error(ErrorCode::DimensionMismatch, "long-memory filter needs n + J innovations");
    const auto c = longmem_coefficients(gamma, J);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // innovations[J + i - j] for j = 0..J
        const double* eps = innovations.data() + i;
        double acc = 0.0;
        for (std::size_t j = 0; j <= J; ++j) acc += c[j] * eps[J - j];
        out[i] = sigma * acc;
    }
    return out;
}

std::vector<double> gen_longmem(const DgpSpec& spec, Rng& rng)
{
    check_longmem_truncation(spec.gamma, spec.truncation_J);
    check_sigma(spec.sigma);
    check_stable_alpha(spec.alpha_star);
    std::vector<double> eps(spec.n + spec.truncation_J);
    for (double& v : eps) v = sample_alpha_stable(spec.alpha_star, rng);
    return longmem_filter(eps, spec.gamma, spec.truncation_J, spec.sigma, spec.n);
}

std::vector<double> gen_lstar(const DgpSpec& spec, Rng& rng)
{
    if (!(std::abs(spec.phi1) < 1.0) || !(std::abs(spec.phi1 + spec.phi2) < 1.0))
        throw Error(ErrorCode::UnstableSpec, "LSTAR needs |phi1| < 1 and |phi1 + phi2| < 1");
    check_sigma(spec.sigma);
    check_stable_alpha(spec.alpha_star);
    std::vector<double> out;
    out.reserve(spec.n);
    double e = 0.0;
    for (std::size_t i = 0; i < spec.burn_in + spec.n; ++i) {
        const double g = logistic_transition(e, spec.delta, spec.threshold);
        e = (spec.phi1 * e + g * (spec.phi2 * e)) + spec.sigma * sample_alpha_stable(spec.alpha_star, rng);
        if (i >= spec.burn_in) out.push_back(e);
    }
    return out;
}

std::vector<double> gen_errors(const DgpSpec& spec, Rng& rng)
{
    switch (spec.kind) {
    case DgpKind::AR1: return gen_ar1(spec, rng);
    case DgpKind::LongMemory: return gen_longmem(spec, rng);
    case DgpKind::LSTAR: return gen_lstar(spec, rng);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown error process");
}

DesignMatrix gen_deterministic_covariates(std::size_t n, std::size_t n_freqs, bool include_weekend_dummies,
                                          std::size_t period, std::size_t t0)
{
    if (period < 2) throw Error(ErrorCode::InvalidArgument, "Fourier period must be at least 2");
    if (n_freqs > period / 2)
        throw Error(ErrorCode::TooManyFrequencies, "at most " + std::to_string(period / 2) +
                                                       " frequencies fit in period " + std::to_string(period));
    const std::size_t p = 2 * n_freqs + (include_weekend_dummies ? 2 : 0);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<std::string> names;
    names.reserve(p);
    for (std::size_t k = 1; k <= n_freqs; ++k) {
        names.push_back("sin" + std::to_string(k));
        names.push_back("cos" + std::to_string(k));
    }
    const double step = 2.0 * std::numbers::pi / static_cast<double>(period);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = t0 + i;
        for (std::size_t k = 1; k <= n_freqs; ++k) {
            const std::size_t r = (k * (t % period)) % period;
            double s = 0.0;
            double c = 1.0;
            if (2 * r == period) {
                c = -1.0;
            } else if (r != 0) {
                s = std::sin(step * static_cast<double>(r));
                c = std::cos(step * static_cast<double>(r));
            }
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * k - 2)) = s;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * k - 1)) = c;
        }
        if (include_weekend_dummies) {
            const std::size_t day = (t / 24) % 7;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p - 2)) = day == 5 ? 1.0 : 0.0;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p - 1)) = day == 6 ? 1.0 : 0.0;
        }
    }
    if (include_weekend_dummies) {
        names.emplace_back("sat");
        names.emplace_back("sun");
    }
    return DesignMatrix(std::move(values), std::move(names));
}

DesignMatrix gen_stochastic_covariates(std::size_t n, std::size_t q, double ar_coef, Rng& rng)
{
    if (!(std::abs(ar_coef) < 1.0)) throw Error(ErrorCode::UnstableSpec, "covariate AR coefficient needs |a| < 1");
    if (n < 2) throw Error(ErrorCode::InsufficientData, "need at least two rows");
    constexpr std::size_t burn_in = 1000;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    std::vector<std::string> names;
    names.reserve(q);
    for (std::size_t j = 0; j < q; ++j) {
        names.push_back("w" + std::to_string(j + 1));
        double x = 0.0;
        for (std::size_t i = 0; i < burn_in + n; ++i) {
            x = ar_coef * x + rng.normal();
            if (i >= burn_in) values(static_cast<Eigen::Index>(i - burn_in), static_cast<Eigen::Index>(j)) = x;
        }
        auto col = values.col(static_cast<Eigen::Index>(j));
        const double mu = col.mean();
        col.array() -= mu;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
        col /= sd;
    }
    return DesignMatrix(std::move(values), std::move(names));
}

Eigen::VectorXd draw_beta(const BetaSpec& spec)
{
    if (!(spec.sparsity_pct >= 0.0 && spec.sparsity_pct <= 100.0))
        throw Error(ErrorCode::InvalidArgument, "sparsity must lie in [0, 100]");
    const auto p = static_cast<Eigen::Index>(spec.p);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const auto nnz = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.p) * (100.0 - spec.sparsity_pct) / 100.0));
    Rng rng(spec.rng_seed);
    std::vector<std::size_t> idx(spec.p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < nnz; ++k) {
        const auto pick = k + static_cast<std::size_t>(rng.below(spec.p - k));
        std::swap(idx[k], idx[pick]);
    }
    for (std::size_t k = 0; k < nnz; ++k) {
        const double u = rng.uniform();
        const double value = spec.dist == BetaDist::Cauchy ? std::tan(std::numbers::pi * (u - 0.5)) : 2.0 * u - 1.0;
        beta(static_cast<Eigen::Index>(idx[k])) = value;
    }
    return beta;
}

Eigen::VectorXd exp_weights_raw(std::size_t n, double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t t = 1; t <= n; ++t) {
        const double td = static_cast<double>(t);
        v(static_cast<Eigen::Index>(n - t)) = std::pow(delta, td - 1.0) * (1.0 - delta) / (1.0 - std::pow(delta, td));
    }
    return v;
}

ObservationWeights exp_weights(std::size_t n, double delta)
{
    return ObservationWeights::normalized(exp_weights_raw(n, delta));
}

}  // namespace aggpi
