#include "aggpi/nagaev.hpp"

#include "aggpi/dgp.hpp"
#include "aggpi/error.hpp"
#include "aggpi/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace aggpi {

namespace {

bool is_light(NagaevCase c) { return c == NagaevCase::SRD_light || c == NagaevCase::LRD_light; }
bool is_long(NagaevCase c) { return c == NagaevCase::LRD_light || c == NagaevCase::LRD_heavy; }

double coefficient_sum(std::span<const double> a, double beta)
{
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) total += std::abs(a[j]) * std::pow(1.0 + static_cast<double>(j), beta);
    if (!std::isfinite(total))
        throw Error(ErrorCode::DivergentCoefficientSum, "coefficient sum is not finite");
    return total;
}

}  // namespace

std::string_view to_string(NagaevCase c)
{
    switch (c) {
    case NagaevCase::SRD_light: return "srd_light";
    case NagaevCase::LRD_light: return "lrd_light";
    case NagaevCase::SRD_heavy: return "srd_heavy";
    case NagaevCase::LRD_heavy: return "lrd_heavy";
    }
    return "unknown";
}

NagaevCase parse_nagaev_case(std::string_view name)
{
    std::string key(name);
    for (char& ch : key) ch = ch == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (key == "srd_light") return NagaevCase::SRD_light;
    if (key == "lrd_light") return NagaevCase::LRD_light;
    if (key == "srd_heavy") return NagaevCase::SRD_heavy;
    if (key == "lrd_heavy") return NagaevCase::LRD_heavy;
    throw Error(ErrorCode::ConfigInvalid, "unknown Nagaev case '" + std::string(name) + "'");
}

double default_c_q(NagaevCase c, double q)
{
    if (!is_light(c)) return 2.0;
    return 2.0 / ((q + 2.0) * (q + 2.0) * std::exp(q));
}

NagaevBound nagaev_bound_linear(std::span<const double> a, std::span<const double> b, double q, double x,
                                NagaevCase c, const NagaevConstants& consts)
{
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "coefficient and weight vectors must be non-empty");
    if (!(q > 1.0)) throw Error(ErrorCode::InvalidArgument, "moment order q must exceed 1");
    if (is_light(c) && !(q > 2.0))
        throw Error(ErrorCode::InvalidArgument, "light-tailed cases need q > 2");
    if (!is_light(c) && q > 2.0) throw Error(ErrorCode::InvalidArgument, "heavy-tailed cases need q <= 2");
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold x must be non-negative");
    if (is_long(c) && !(consts.beta > 0.0 && consts.beta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "long-range exponent beta must lie in (0, 1)");
    if (!(consts.eps_q_moment >= 0.0) || !(consts.eps_second_moment >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "innovation moments must be non-negative");

    const double n = static_cast<double>(b.size());
    double b_q = 0.0;
    for (double v : b) b_q += std::pow(std::abs(v), q);

    NagaevBound out;
    if (x == 0.0) {
        out.poly_term = std::numeric_limits<double>::infinity();
        out.exp_term = is_light(c) ? 2.0 : 0.0;
        return out;
    }

    const double c_q = consts.c_q.value_or(default_c_q(c, q));
    const double xq = std::pow(x, q);
    if (!is_long(c)) {
        const double A = coefficient_sum(a, 0.0);
        const double lead = is_light(c) ? std::pow(1.0 + 2.0 / q, q) : c_q;
        out.poly_term = lead * b_q * std::pow(A, q) * consts.eps_q_moment / xq;
        if (is_light(c)) out.exp_term = 2.0 * std::exp(-c_q * x * x / (n * A * A * consts.eps_second_moment));
    } else {
        const double K = coefficient_sum(a, consts.beta);
        const double growth = std::pow(n, q * (1.0 - consts.beta));
        out.poly_term = consts.C1 * std::pow(K, q) * b_q * growth * consts.eps_q_moment / xq;
        if (is_light(c))
            out.exp_term = 2.0 * std::exp(-consts.C2 * x * x /
                                          (std::pow(n, 3.0 - 2.0 * consts.beta) * consts.eps_second_moment * K * K));
    }
    return out;
}

double innovation_abs_moment(const LinearProcessSpec& spec, double q)
{
    if (!(q > 0.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be positive");
    const double scale = std::pow(std::abs(spec.sigma), q);
    if (spec.innovation == Innovation::Gaussian)
        return scale * std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    return scale * stable_abs_moment(spec.alpha_star, q);
}

std::vector<TailEstimate> mc_tail_estimates(const LinearProcessSpec& spec, std::span<const double> b,
                                            std::span<const double> xs, std::size_t n_mc, std::uint64_t seed)
{
    if (n_mc < 10000) throw Error(ErrorCode::InvalidArgument, "n_mc must be at least 10^4");
    if (spec.a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "coefficient and weight vectors must be non-empty");
    if (spec.innovation == Innovation::Stable && !(spec.alpha_star > 0.0 && spec.alpha_star <= 2.0))
        throw Error(ErrorCode::AlphaOutOfRange, "alpha* must lie in (0, 2]");

    // S = sum_i b_i sum_j a_j eps_{i-j}; innovation index k = i - j + (J - 1) runs over [0, n + J - 1).
    const std::size_t n = b.size();
    const std::size_t J = spec.a.size();
    std::vector<double> weight(n + J - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < J; ++j) weight[i + J - 1 - j] += b[i] * spec.a[j];
    for (double& w : weight) w *= spec.sigma;

    std::vector<std::size_t> hits(xs.size(), 0);
    Rng rng(seed);
    for (std::size_t r = 0; r < n_mc; ++r) {
        double s = 0.0;
        if (spec.innovation == Innovation::Gaussian)
            for (double w : weight) s += w * rng.normal();
        else
            for (double w : weight) s += w * sample_alpha_stable(spec.alpha_star, rng);
        const double abs_s = std::abs(s);
        for (std::size_t k = 0; k < xs.size(); ++k)
            if (abs_s >= xs[k]) ++hits[k];
    }

    std::vector<TailEstimate> out;
    out.reserve(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        TailEstimate t;
        t.n_mc = n_mc;
        t.proportion = static_cast<double>(hits[k]) / static_cast<double>(n_mc);
        t.se = std::sqrt(t.proportion * (1.0 - t.proportion) / static_cast<double>(n_mc));
        out.push_back(t);
    }
    return out;
}

TailEstimate mc_tail_estimate(const LinearProcessSpec& spec, std::span<const double> b, double x, std::size_t n_mc,
                              std::uint64_t seed)
{
    const double xs[1] = {x};
    return mc_tail_estimates(spec, b, xs, n_mc, seed).front();
}

std::vector<NagaevCheckRow> run_nagaev_check(const NagaevCheckConfig& cfg)
{
    if (cfg.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
    std::vector<double> b = cfg.b;
    if (b.empty()) b.assign(cfg.n, 1.0);
    if (b.size() != cfg.n) throw Error(ErrorCode::DimensionMismatch, "weight vector length differs from n");

    std::vector<NagaevCheckRow> rows;
    for (std::size_t k = 0; k < cfg.cases.size(); ++k) {
        const auto& c = cfg.cases[k];
        const auto mc = mc_tail_estimates(c.process, b, cfg.xs, cfg.n_mc, derive_seed(cfg.rng_seed, k));
        for (std::size_t i = 0; i < cfg.xs.size(); ++i) {
            NagaevCheckRow row;
            row.which = c.which;
            row.q = c.q;
            row.x = cfg.xs[i];
            row.bound = nagaev_bound_linear(c.process.a, b, c.q, cfg.xs[i], c.which, c.consts);
            row.mc = mc[i];
            row.holds = row.bound.total() >= row.mc.proportion - 3.0 * row.mc.se;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace aggpi
