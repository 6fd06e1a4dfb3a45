#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace aggpi {

/// Dependence/tail regime of a linear process e_i = sum_j a_j eps_{i-j}.
enum class NagaevCase { SRD_light, LRD_light, SRD_heavy, LRD_heavy };

std::string_view to_string(NagaevCase c);
/// Accepts "srd_light", "lrd_light", "srd_heavy", "lrd_heavy" (case-insensitive,
/// '-' for '_'); throws ConfigInvalid.
NagaevCase parse_nagaev_case(std::string_view name);

/// Innovation moments and the constants the bound leaves unspecified.
///
/// c_q defaults to 2 / ((q + 2)^2 e^q) in the light-tailed short-range case
/// and to 2 in the heavy-tailed case (the von Bahr-Esseen constant). C1 and C2
/// default to 1. beta is the long-range exponent in (0, 1).
struct NagaevConstants {
    double eps_q_moment = 1.0;    ///< E|eps_0|^q
    double eps_second_moment = 1.0;  ///< E eps_0^2
    std::optional<double> c_q;
    double C1 = 1.0;
    double C2 = 1.0;
    double beta = 0.5;
};

/// Right-hand side split into its two terms; heavy cases have exp_term = 0.
struct NagaevBound {
    double poly_term = 0.0;
    double exp_term = 0.0;
    double total() const { return poly_term + exp_term; }
};

double default_c_q(NagaevCase c, double q);

/// Tail bound for P(|sum_i b_i e_i| >= x) with n = b.size():
///   SRD light: (1+2/q)^q |b|_q^q A^q E|eps|^q / x^q + 2 exp(-c_q x^2 / (n A^2 E eps^2)),  A = sum |a_j|
///   LRD light: C1 K^q |b|_q^q n^{q(1-beta)} E|eps|^q / x^q + 2 exp(-C2 x^2 / (n^{3-2beta} E eps^2 K^2)),
///              K = sum |a_j| (1+j)^beta
///   SRD heavy: c_q |b|_q^q A^q E|eps|^q / x^q
///   LRD heavy: C1 K^q |b|_q^q n^{q(1-beta)} E|eps|^q / x^q
/// Light cases need q > 2, heavy cases 1 < q <= 2. The result is not clipped
/// at 1; x = 0 gives +inf. Throws DivergentCoefficientSum when A or K is not finite.
NagaevBound nagaev_bound_linear(std::span<const double> a, std::span<const double> b, double q, double x,
                                NagaevCase c, const NagaevConstants& consts);

enum class Innovation { Gaussian, Stable };

/// Finite-order linear process driven by iid innovations sigma * eps, where
/// eps is N(0, 1) or symmetric standard alpha-stable.
struct LinearProcessSpec {
    std::vector<double> a{1.0};
    Innovation innovation = Innovation::Gaussian;
    double alpha_star = 2.0;
    double sigma = 1.0;
};

/// E|sigma eps|^q for the process's innovation law; +inf when the moment does not exist.
double innovation_abs_moment(const LinearProcessSpec& spec, double q);

struct TailEstimate {
    double proportion = 0.0;
    double se = 0.0;
    std::size_t n_mc = 0;
};

/// Monte Carlo estimate of P(|S_{n,b}| >= x) with its binomial standard
/// error. S is evaluated as sum_k c_k eps_k with the convolution weights
/// c_k = sum_i b_i a_{i-k} computed once. Needs n_mc >= 10^4.
TailEstimate mc_tail_estimate(const LinearProcessSpec& spec, std::span<const double> b, double x, std::size_t n_mc,
                              std::uint64_t seed);

/// Same draws evaluated at several thresholds (one simulation pass).
std::vector<TailEstimate> mc_tail_estimates(const LinearProcessSpec& spec, std::span<const double> b,
                                            std::span<const double> xs, std::size_t n_mc, std::uint64_t seed);

/// Bound-versus-simulation grid: every case is evaluated at every threshold.
/// consts must carry the innovation moments of the case's process.
struct NagaevCheckCase {
    NagaevCase which = NagaevCase::SRD_light;
    double q = 4.0;
    LinearProcessSpec process;
    NagaevConstants consts;
};

struct NagaevCheckConfig {
    std::size_t n = 100;
    /// Weights b; all ones when empty.
    std::vector<double> b;
    std::vector<double> xs;
    std::vector<NagaevCheckCase> cases;
    std::size_t n_mc = 20000;
    std::uint64_t rng_seed = 1;
};

struct NagaevCheckRow {
    NagaevCase which = NagaevCase::SRD_light;
    double q = 0.0;
    double x = 0.0;
    NagaevBound bound;
    TailEstimate mc;
    /// bound >= mc - 3 SE
    bool holds = false;
};

/// Case k uses the simulation stream derive_seed(rng_seed, k) for all thresholds.
std::vector<NagaevCheckRow> run_nagaev_check(const NagaevCheckConfig& cfg);

}  // namespace aggpi
