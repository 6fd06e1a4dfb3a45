#pragma once

#include "aggpi/linmodel.hpp"
#include "aggpi/rng.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace aggpi {

enum class DgpKind { AR1, LongMemory, LSTAR };

std::string_view to_string(DgpKind kind);
/// Accepts "ar1", "longmemory" (or "long_memory", "lm"), "lstar".
DgpKind parse_dgp_kind(std::string_view name);

/// Error-process description. Defaults are the short-memory heavy-tailed
/// scenario: phi1 = 0.6, sigma = 54.1, alpha* = 1.5.
struct DgpSpec {
    DgpKind kind = DgpKind::AR1;
    double phi1 = 0.6;
    double phi2 = -0.3;
    double gamma = -0.8;
    double delta = 0.05;
    double threshold = 0.0;
    double sigma = 54.1;
    double alpha_star = 1.5;
    std::size_t n = 336;
    std::size_t burn_in = 1000;
    std::size_t truncation_J = 10000;
};

enum class BetaDist { UniformPM1, Cauchy };

std::string_view to_string(BetaDist dist);
/// Accepts "uniform" and "cauchy".
BetaDist parse_beta_dist(std::string_view name);

struct BetaSpec {
    std::size_t p = 0;
    /// Percentage of exactly-zero coefficients.
    double sparsity_pct = 99.0;
    BetaDist dist = BetaDist::UniformPM1;
    std::uint64_t rng_seed = 0;
};

/// Symmetric standard alpha-stable draw (Chambers-Mallows-Stuck). At alpha = 2
/// the law is N(0, 2); at alpha = 1 it is standard Cauchy.
double sample_alpha_stable(double alpha_star, Rng& rng);

/// E|X|^p for the symmetric standard alpha-stable law, finite for p < alpha
/// (any p when alpha = 2).
double stable_abs_moment(double alpha_star, double p);

/// 1 / (1 + exp(-delta * (e_prev - threshold))).
double logistic_transition(double e_prev, double delta, double threshold);

/// e_i = phi1 e_{i-1} + sigma eps_i from e = 0, burn-in discarded.
std::vector<double> gen_ar1(const DgpSpec& spec, Rng& rng);

/// Filter weights (j + 1)^gamma for j = 0..J.
std::vector<double> longmem_coefficients(double gamma, std::size_t J);

/// Throws TruncationTooSmall unless the squared-coefficient tail beyond J,
/// bounded by (J+1)^(2 gamma + 1) / |2 gamma + 1|, is below 1% of the
/// retained squared mass. Also rejects J < 1000 and gamma >= -0.5.
void check_longmem_truncation(double gamma, std::size_t J);

/// e_i = sigma * sum_{j=0..J} (j+1)^gamma eps_{i-j} by direct convolution.
/// `innovations` must hold n + J values; innovations[J + i] is eps_i.
std::vector<double> longmem_filter(std::span<const double> innovations, double gamma, std::size_t J, double sigma,
                                   std::size_t n);

std::vector<double> gen_longmem(const DgpSpec& spec, Rng& rng);

/// e_i = phi1 e_{i-1} + G(e_{i-1}; delta, T) phi2 e_{i-1} + sigma eps_i.
/// Same draw order as gen_ar1, so phi2 = 0 reproduces its path.
std::vector<double> gen_lstar(const DgpSpec& spec, Rng& rng);

/// Dispatches on spec.kind.
std::vector<double> gen_errors(const DgpSpec& spec, Rng& rng);

/// Fourier seasonal columns sin(2 pi k t / period), cos(2 pi k t / period) for
/// k = 1..n_freqs and t = t0..t0+n-1, plus Saturday/Sunday indicators (day =
/// floor(t / 24) mod 7, days 5 and 6) when requested. Angles are reduced
/// exactly as (k t mod period), so the columns repeat bit-for-bit.
DesignMatrix gen_deterministic_covariates(std::size_t n, std::size_t n_freqs, bool include_weekend_dummies,
                                          std::size_t period = 168, std::size_t t0 = 0);

/// q independent AR(1) columns with unit-sd Gaussian innovations (1000 burn-in
/// steps), each scaled to sample mean 0 and sd 1. Stand-in for weather series.
DesignMatrix gen_stochastic_covariates(std::size_t n, std::size_t q, double ar_coef, Rng& rng);

/// round(p (1 - s/100)) nonzeros at seed-determined positions, drawn from
/// U[-1, 1] or the standard Cauchy law; all other entries exactly 0.
Eigen::VectorXd draw_beta(const BetaSpec& spec);

/// The weight formula v_{n-t+1} = delta^(t-1) (1 - delta) / (1 - delta^t),
/// t = 1..n, as a vector indexed by observation (last entry is t = 1).
Eigen::VectorXd exp_weights_raw(std::size_t n, double delta);

/// exp_weights_raw renormalized to sum n.
ObservationWeights exp_weights(std::size_t n, double delta);

}  // namespace aggpi
