#include "chainbound/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chainbound {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E|Z|^p for Z standard normal: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double std_normal_abs_moment(double p) {
  return std::exp(std::lgamma(0.5 * (p + 1.0)) + 0.5 * p * std::numbers::ln2 -
                  0.5 * std::log(std::numbers::pi));
}

// Composite Simpson over [lo, hi].
template <typename F>
double simpson(F f, double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) {
    acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

// E|X|^p for X ~ N(mu, sigma^2), mu != 0, by quadrature split at the kink.
double gaussian_abs_moment_numeric(double mu, double sigma, double p) {
  const auto f = [&](double x) {
    const double z = (x - mu) / sigma;
    return std::pow(std::fabs(x), p) * std_normal_pdf(z) / sigma;
  };
  const double lo = mu - 13.0 * sigma;
  const double hi = mu + 13.0 * sigma;
  if (lo < 0.0 && hi > 0.0) {
    return simpson(f, lo, 0.0, 4096) + simpson(f, 0.0, hi, 4096);
  }
  return simpson(f, lo, hi, 8192);
}

// Truncated Poisson pmf on {0..m}; log-space so large means do not
// underflow the recurrence.
std::vector<double> poisson_pmf(double t, std::size_t max_support) {
  if (t <= 0.0) {
    return {1.0};
  }
  const double spread = 40.0 * std::sqrt(t) + 60.0;
  const auto hi = static_cast<std::size_t>(std::min<double>(
      static_cast<double>(max_support), std::ceil(t + spread)));
  std::vector<double> pmf(hi + 1, 0.0);
  const double logt = std::log(t);
  for (std::size_t j = 0; j <= hi; ++j) {
    const double lp = -t + static_cast<double>(j) * logt - std::lgamma(static_cast<double>(j) + 1.0);
    if (lp > -745.0) {
      pmf[j] = std::exp(lp);
    }
  }
  return pmf;
}

std::vector<double> binomial_pmf(long long n, double q) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (q <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (q >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  for (long long k = 0; k <= n; ++k) {
    const double lp = lgn - std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0) +
                      static_cast<double>(k) * lq + static_cast<double>(n - k) * l1q;
    if (lp > -745.0) {
      pmf[static_cast<std::size_t>(k)] = std::exp(lp);
    }
  }
  return pmf;
}

bool is_nonneg_integer(double v) {
  return v >= 0.0 && v == std::floor(v) && v <= 1e15;
}

// Pareto(alpha, xm) on [xm, inf): E|e - X|. Needs alpha > 1.
double pareto_one_sided_mad(double alpha, double xm, double e) {
  const double mu = alpha * xm / (alpha - 1.0);
  if (e <= xm) {
    return mu - e;
  }
  return e - mu + 2.0 * std::pow(xm, alpha) * std::pow(e, 1.0 - alpha) / (alpha - 1.0);
}

}  // namespace

ScalarLaw ScalarLaw::point(double value) {
  return {LawKind::point_mass, value, 0.0, {}, false};
}

ScalarLaw ScalarLaw::rademacher() {
  return {LawKind::rademacher, 0.0, 0.0, {}, false};
}

ScalarLaw ScalarLaw::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0)) {
    throw std::domain_error("ScalarLaw::gaussian: stddev must be positive");
  }
  return {LawKind::gaussian, mean, stddev, {}, false};
}

ScalarLaw ScalarLaw::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw std::domain_error("ScalarLaw::uniform: need lo < hi");
  }
  return {LawKind::uniform, lo, hi, {}, false};
}

ScalarLaw ScalarLaw::bernoulli(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("ScalarLaw::bernoulli: q must lie in [0, 1]");
  }
  return {LawKind::bernoulli, q, 0.0, {}, false};
}

ScalarLaw ScalarLaw::poisson(double mean) {
  if (!(mean >= 0.0)) {
    throw std::domain_error("ScalarLaw::poisson: mean must be nonnegative");
  }
  return {LawKind::poisson, mean, 0.0, {}, false};
}

ScalarLaw ScalarLaw::choice(std::vector<double> values) {
  if (values.empty()) {
    throw std::domain_error("ScalarLaw::choice: support must be nonempty");
  }
  return {LawKind::choice, 0.0, 0.0, std::move(values), false};
}

ScalarLaw ScalarLaw::pareto(double tail_index, double scale, bool symmetric_sign) {
  if (!(tail_index > 0.0) || !(scale > 0.0)) {
    throw std::domain_error("ScalarLaw::pareto: index and scale must be positive");
  }
  return {LawKind::pareto, tail_index, scale, {}, symmetric_sign};
}

double ScalarLaw::sample(Stream& stream) const {
  switch (kind) {
    case LawKind::point_mass:
      return a;
    case LawKind::rademacher:
      return stream.rademacher();
    case LawKind::gaussian:
      return stream.gaussian(a, b);
    case LawKind::uniform:
      return stream.uniform(a, b);
    case LawKind::bernoulli:
      return stream.bernoulli(a) ? 1.0 : 0.0;
    case LawKind::poisson:
      return static_cast<double>(stream.poisson(a));
    case LawKind::choice: {
      const auto n = support.size();
      auto idx = static_cast<std::size_t>(stream.uniform01() * static_cast<double>(n));
      return support[std::min(idx, n - 1)];
    }
    case LawKind::pareto: {
      const double sign = symmetric ? stream.rademacher() : 1.0;
      return sign * stream.pareto(a, b);
    }
  }
  return 0.0;
}

bool ScalarLaw::integer_valued() const {
  switch (kind) {
    case LawKind::bernoulli:
    case LawKind::poisson:
      return true;
    case LawKind::point_mass:
      return a == std::floor(a);
    case LawKind::choice:
      return std::all_of(support.begin(), support.end(),
                         [](double v) { return v == std::floor(v); });
    default:
      return false;
  }
}

double ScalarLaw::mean() const {
  switch (kind) {
    case LawKind::point_mass:
      return a;
    case LawKind::rademacher:
      return 0.0;
    case LawKind::gaussian:
      return a;
    case LawKind::uniform:
      return 0.5 * (a + b);
    case LawKind::bernoulli:
      return a;
    case LawKind::poisson:
      return a;
    case LawKind::choice: {
      double s = 0.0;
      for (double v : support) s += v;
      return s / static_cast<double>(support.size());
    }
    case LawKind::pareto:
      if (symmetric) {
        if (a <= 1.0) {
          throw std::domain_error("ScalarLaw::mean: pareto mean needs index > 1");
        }
        return 0.0;
      }
      if (a <= 1.0) {
        throw std::domain_error("ScalarLaw::mean: pareto mean needs index > 1");
      }
      return a * b / (a - 1.0);
  }
  return 0.0;
}

double ScalarLaw::abs_moment(double p) const {
  if (!(p >= 0.0)) {
    throw std::domain_error("ScalarLaw::abs_moment: p must be nonnegative");
  }
  switch (kind) {
    case LawKind::point_mass:
      return std::pow(std::fabs(a), p);
    case LawKind::rademacher:
      return 1.0;
    case LawKind::gaussian:
      if (a == 0.0) {
        return std::pow(b, p) * std_normal_abs_moment(p);
      }
      return gaussian_abs_moment_numeric(a, b, p);
    case LawKind::uniform: {
      const double width = b - a;
      const double q = p + 1.0;
      if (a >= 0.0) {
        return (std::pow(b, q) - std::pow(a, q)) / (q * width);
      }
      if (b <= 0.0) {
        return (std::pow(-a, q) - std::pow(-b, q)) / (q * width);
      }
      return (std::pow(-a, q) + std::pow(b, q)) / (q * width);
    }
    case LawKind::bernoulli:
      return a;
    case LawKind::poisson: {
      if (p == std::floor(p) && p <= 170.0) {
        return poisson_raw_moment(a, static_cast<int>(p));
      }
      return raw_moment_pmf(poisson_pmf(a, 1 << 20), p);
    }
    case LawKind::choice: {
      double s = 0.0;
      for (double v : support) s += std::pow(std::fabs(v), p);
      return s / static_cast<double>(support.size());
    }
    case LawKind::pareto:
      if (p >= a) {
        throw std::domain_error("ScalarLaw::abs_moment: pareto moment of order >= index is infinite");
      }
      return a * std::pow(b, p) / (a - p);
  }
  return 0.0;
}

bool ScalarLaw::has_abs_diff_moment() const {
  return kind != LawKind::pareto;
}

double ScalarLaw::abs_diff_moment(double p) const {
  switch (kind) {
    case LawKind::point_mass:
      return 0.0;
    case LawKind::rademacher:
      // |X - X'| is 0 or 2 with equal probability.
      return 0.5 * std::pow(2.0, p);
    case LawKind::gaussian:
      // X - X' ~ N(0, 2 sigma^2).
      return std::pow(b * std::numbers::sqrt2, p) * std_normal_abs_moment(p);
    case LawKind::uniform: {
      const double w = b - a;
      return 2.0 * std::pow(w, p) / ((p + 1.0) * (p + 2.0));
    }
    case LawKind::bernoulli:
      // |X - X'| is Bernoulli(2q(1-q)).
      return 2.0 * a * (1.0 - a);
    case LawKind::poisson: {
      const auto pmf = poisson_pmf(a, 1 << 14);
      double acc = 0.0;
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] == 0.0) continue;
        for (std::size_t j = 0; j < pmf.size(); ++j) {
          if (i == j || pmf[j] == 0.0) continue;
          acc += pmf[i] * pmf[j] *
                 std::pow(std::fabs(static_cast<double>(i) - static_cast<double>(j)), p);
        }
      }
      return acc;
    }
    case LawKind::choice: {
      const auto n = support.size();
      double acc = 0.0;
      for (double u : support) {
        for (double v : support) {
          acc += std::pow(std::fabs(u - v), p);
        }
      }
      return acc / static_cast<double>(n * n);
    }
    case LawKind::pareto:
      throw std::domain_error("ScalarLaw::abs_diff_moment: no closed form for pareto");
  }
  return 0.0;
}

bool ScalarLaw::has_mean_abs_dev() const {
  if (kind == LawKind::pareto) {
    return a > 1.0;
  }
  return true;
}

double ScalarLaw::mean_abs_dev(double e) const {
  switch (kind) {
    case LawKind::point_mass:
      return std::fabs(e - a);
    case LawKind::rademacher:
      return 0.5 * (std::fabs(e - 1.0) + std::fabs(e + 1.0));
    case LawKind::gaussian: {
      const double z = (e - a) / b;
      return (e - a) * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * b * std_normal_pdf(z);
    }
    case LawKind::uniform: {
      if (e <= a) {
        return 0.5 * (a + b) - e;
      }
      if (e >= b) {
        return e - 0.5 * (a + b);
      }
      const double w = b - a;
      return ((e - a) * (e - a) + (b - e) * (b - e)) / (2.0 * w);
    }
    case LawKind::bernoulli:
      return a * std::fabs(e - 1.0) + (1.0 - a) * std::fabs(e);
    case LawKind::poisson:
      return mean_abs_dev_pmf(poisson_pmf(a, 1 << 20), e);
    case LawKind::choice: {
      double s = 0.0;
      for (double v : support) s += std::fabs(e - v);
      return s / static_cast<double>(support.size());
    }
    case LawKind::pareto:
      if (a <= 1.0) {
        throw std::domain_error("ScalarLaw::mean_abs_dev: pareto needs index > 1");
      }
      if (!symmetric) {
        return pareto_one_sided_mad(a, b, e);
      }
      return 0.5 * (pareto_one_sided_mad(a, b, e) + pareto_one_sided_mad(a, b, -e));
  }
  return 0.0;
}

ScalarLaw::McMoment ScalarLaw::abs_diff_moment_mc(double p, int samples, Stream& stream) const {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double d = std::pow(std::fabs(sample(stream) - sample(stream)), p);
    sum += d;
    sum_sq += d * d;
  }
  const double m = sum / samples;
  const double var = std::max(0.0, sum_sq / samples - m * m);
  return {m, std::sqrt(var / samples)};
}

std::vector<double> discrete_pmf(const ScalarLaw& law) {
  switch (law.kind) {
    case LawKind::bernoulli:
      return {1.0 - law.a, law.a};
    case LawKind::poisson:
      return poisson_pmf(law.a, 1 << 16);
    case LawKind::point_mass: {
      if (!is_nonneg_integer(law.a)) return {};
      std::vector<double> pmf(static_cast<std::size_t>(law.a) + 1, 0.0);
      pmf.back() = 1.0;
      return pmf;
    }
    case LawKind::choice: {
      double hi = 0.0;
      for (double v : law.support) {
        if (!is_nonneg_integer(v)) return {};
        hi = std::max(hi, v);
      }
      std::vector<double> pmf(static_cast<std::size_t>(hi) + 1, 0.0);
      for (double v : law.support) {
        pmf[static_cast<std::size_t>(v)] += 1.0 / static_cast<double>(law.support.size());
      }
      return pmf;
    }
    default:
      return {};
  }
}

std::vector<double> pmf_of_sum(const ScalarLaw& law, long long count, std::size_t max_support) {
  if (count < 0) {
    throw std::domain_error("pmf_of_sum: count must be nonnegative");
  }
  if (count == 0) {
    return {1.0};
  }
  switch (law.kind) {
    case LawKind::bernoulli:
      if (static_cast<std::size_t>(count) + 1 > max_support) return {};
      return binomial_pmf(count, law.a);
    case LawKind::poisson:
      return poisson_pmf(law.a * static_cast<double>(count), max_support);
    case LawKind::point_mass: {
      if (!is_nonneg_integer(law.a)) return {};
      const double total = law.a * static_cast<double>(count);
      if (total + 1.0 > static_cast<double>(max_support)) return {};
      std::vector<double> pmf(static_cast<std::size_t>(total) + 1, 0.0);
      pmf.back() = 1.0;
      return pmf;
    }
    case LawKind::choice: {
      auto base = discrete_pmf(law);
      if (base.empty()) return {};
      std::vector<double> acc{1.0};
      for (long long i = 0; i < count; ++i) {
        std::vector<double> next(acc.size() + base.size() - 1, 0.0);
        if (next.size() > max_support) return {};
        for (std::size_t j = 0; j < acc.size(); ++j) {
          if (acc[j] == 0.0) continue;
          for (std::size_t l = 0; l < base.size(); ++l) {
            next[j + l] += acc[j] * base[l];
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
    default:
      return {};
  }
}

double mean_abs_dev_pmf(const std::vector<double>& pmf, double e) {
  double acc = 0.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    acc += pmf[j] * std::fabs(e - static_cast<double>(j));
  }
  return acc;
}

double raw_moment_pmf(const std::vector<double>& pmf, double p) {
  double acc = 0.0;
  for (std::size_t j = 1; j < pmf.size(); ++j) {
    acc += pmf[j] * std::pow(static_cast<double>(j), p);
  }
  return acc;
}

double poisson_raw_moment(double t, int p) {
  if (p < 0) {
    throw std::domain_error("poisson_raw_moment: p must be nonnegative");
  }
  if (p == 0) {
    return 1.0;
  }
  // Stirling numbers of the second kind, S(n, k) = k S(n-1, k) + S(n-1, k-1).
  std::vector<double> stirling(static_cast<std::size_t>(p) + 1, 0.0);
  stirling[0] = 1.0;  // row n = 0
  for (int n = 1; n <= p; ++n) {
    for (int k = n; k >= 1; --k) {
      stirling[static_cast<std::size_t>(k)] =
          static_cast<double>(k) * stirling[static_cast<std::size_t>(k)] +
          stirling[static_cast<std::size_t>(k - 1)];
    }
    stirling[0] = 0.0;
  }
  double acc = 0.0;
  double tj = 1.0;
  for (int j = 1; j <= p; ++j) {
    tj *= t;
    acc += stirling[static_cast<std::size_t>(j)] * tj;
  }
  return acc;
}

ScalarLaw::McMoment poisson_raw_moment_mc(double t, double p, int samples, Stream& stream) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = std::pow(static_cast<double>(stream.poisson(t)), p);
    sum += v;
    sum_sq += v * v;
  }
  const double m = sum / samples;
  const double var = std::max(0.0, sum_sq / samples - m * m);
  return {m, std::sqrt(var / samples)};
}

}  // namespace chainbound
