#pragma once

#include <span>
#include <vector>

namespace aggpi::stats {

double mean(std::span<const double> x);

/// Sample standard deviation with the n-1 denominator.
double sample_sd(std::span<const double> x);

/// Type-7 quantile (linear interpolation between order statistics) of a
/// sorted sample. p is clamped to [0, 1].
double quantile_type7_sorted(std::span<const double> sorted, double p);

/// Type-7 quantile of an unsorted sample (copies and sorts).
double quantile_type7(std::span<const double> x, double p);

double normal_cdf(double z);
double normal_quantile(double p);

/// Quantile of Student's t with the given degrees of freedom.
double student_t_quantile(double df, double p);

/// Moving-window averages (1/m) sum_{j=i-m+1..i} x_j for i = m..n.
std::vector<double> window_means(std::span<const double> x, std::size_t m);

}  // namespace aggpi::stats
