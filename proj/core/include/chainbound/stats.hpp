#pragma once

#include <cstddef>
#include <span>

namespace chainbound {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact (Clopper-Pearson) two-sided binomial confidence interval for the
// success probability at the given confidence level.
Interval clopper_pearson(long long count, long long total, double level);

double mean_of(std::span<const double> values);
double variance_of(std::span<const double> values);  // population variance
double stddev_of(std::span<const double> values);

// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Asymptotic two-sample KS critical value c(alpha) sqrt((m+n)/(mn)).
double ks_critical_value(std::size_t m, std::size_t n, double alpha);

}  // namespace chainbound
