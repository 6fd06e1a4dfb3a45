#include "aggpi/stats.hpp"

#include "aggpi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace aggpi::stats {

double mean(std::span<const double> x)
{
    if (x.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x)
{
    if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "sd needs at least two values");
    const double mu = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile_type7_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile_type7(std::span<const double> x, double p)
{
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_type7_sorted(sorted, p);
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_quantile(double df, double p)
{
    return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

std::vector<double> window_means(std::span<const double> x, std::size_t m)
{
    if (m == 0 || m > x.size()) return {};
    std::vector<double> out;
    out.reserve(x.size() - m + 1);
    // running sum, re-anchored every window to keep rounding drift bounded
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += x[i];
    out.push_back(sum / static_cast<double>(m));
    for (std::size_t i = m; i < x.size(); ++i) {
        if ((i - m + 1) % 1024 == 0) {
            sum = 0.0;
            for (std::size_t j = i + 1 - m; j <= i; ++j) sum += x[j];
        } else {
            sum += x[i] - x[i - m];
        }
        out.push_back(sum / static_cast<double>(m));
    }
    return out;
}

}  // namespace aggpi::stats
