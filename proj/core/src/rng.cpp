#include "chainbound/rng.hpp"

#include <cmath>
#include <numbers>

namespace chainbound {

double Stream::gaussian() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Stream::exponential() noexcept {
  return -std::log(1.0 - uniform01());
}

double Stream::pareto(double alpha, double xm) noexcept {
  return xm * std::pow(1.0 - uniform01(), -1.0 / alpha);
}

namespace {

// Knuth's product-of-uniforms method; expected cost grows with lambda,
// so it is only used below the rejection threshold.
long long poisson_small(Stream& s, double lambda) noexcept {
  const double limit = std::exp(-lambda);
  long long k = 0;
  double prod = s.uniform01();
  while (prod > limit) {
    ++k;
    prod *= s.uniform01();
  }
  return k;
}

// Hormann's PTRS transformed-rejection sampler for lambda >= 10.
long long poisson_ptrs(Stream& s, double lambda) noexcept {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = s.uniform01() - 0.5;
    const double v = s.uniform01();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<long long>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - lambda - std::lgamma(k + 1.0)) {
      return static_cast<long long>(k);
    }
  }
}

}  // namespace

long long Stream::poisson(double lambda) noexcept {
  if (lambda <= 0.0) {
    return 0;
  }
  if (lambda < 10.0) {
    return poisson_small(*this, lambda);
  }
  return poisson_ptrs(*this, lambda);
}

}  // namespace chainbound
