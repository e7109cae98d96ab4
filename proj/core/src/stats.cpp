#include "chainbound/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/beta.hpp>

namespace chainbound {

Interval clopper_pearson(long long count, long long total, double level) {
  if (total <= 0 || count < 0 || count > total) {
    throw std::invalid_argument("clopper_pearson: bad counts");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("clopper_pearson: level must lie in (0, 1)");
  }
  const double alpha = 1.0 - level;
  Interval out;
  if (count == 0) {
    out.lo = 0.0;
  } else {
    const boost::math::beta_distribution<double> lo_dist(static_cast<double>(count),
                                                         static_cast<double>(total - count + 1));
    out.lo = boost::math::quantile(lo_dist, 0.5 * alpha);
  }
  if (count == total) {
    out.hi = 1.0;
  } else {
    const boost::math::beta_distribution<double> hi_dist(static_cast<double>(count + 1),
                                                         static_cast<double>(total - count));
    out.hi = boost::math::quantile(hi_dist, 1.0 - 0.5 * alpha);
  }
  return out;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("mean_of: empty span");
  }
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values) {
  const double m = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  return std::sqrt(variance_of(values));
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_statistic: empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double t = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= t) ++i;
    while (j < sb.size() && sb[j] <= t) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(sa.size());
    const double fb = static_cast<double>(j) / static_cast<double>(sb.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

double ks_critical_value(std::size_t m, std::size_t n, double alpha) {
  // c(alpha) = sqrt(-ln(alpha/2) / 2).
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  return c * std::sqrt(static_cast<double>(m + n) / mn);
}

}  // namespace chainbound
