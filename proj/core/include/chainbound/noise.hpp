#pragma once

#include <cstdint>
#include <vector>

#include "chainbound/rng.hpp"

namespace chainbound {

enum class LawKind {
  point_mass,
  rademacher,
  gaussian,
  uniform,
  bernoulli,
  poisson,
  choice,   // uniform over a finite support
  pareto,   // tail index a, scale b; symmetric flips the sign fairly
};

// One scalar noise law. Parameter meaning by kind:
//   point_mass: a = value
//   gaussian:   a = mean, b = stddev (> 0)
//   uniform:    a < b endpoints
//   bernoulli:  a = success probability
//   poisson:    a = mean (>= 0)
//   choice:     equal weights on `support`
//   pareto:     a = tail index (> 0), b = scale (> 0)
//
// Most laws carry closed forms for the functionals the dominating-variable
// machinery needs: E[X], E|X|^p, E|X - X'|^p for an independent copy X',
// and the conditional mean deviation E|e - X|. Where a closed form does
// not exist the accessor throws and callers fall back to Monte Carlo.
struct ScalarLaw {
  LawKind kind = LawKind::point_mass;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> support;
  bool symmetric = false;  // pareto only

  static ScalarLaw point(double value);
  static ScalarLaw rademacher();
  static ScalarLaw gaussian(double mean, double stddev);
  static ScalarLaw uniform(double lo, double hi);
  static ScalarLaw bernoulli(double q);
  static ScalarLaw poisson(double mean);
  static ScalarLaw choice(std::vector<double> values);
  static ScalarLaw pareto(double tail_index, double scale, bool symmetric_sign);

  double sample(Stream& stream) const;

  bool integer_valued() const;

  double mean() const;
  // E|X|^p. Throws when the moment is infinite (pareto with p >= index).
  double abs_moment(double p) const;
  // E|X - X'|^p for X' an independent copy; throws when no closed form.
  double abs_diff_moment(double p) const;
  bool has_abs_diff_moment() const;
  // E|e - X|.
  double mean_abs_dev(double e) const;
  bool has_mean_abs_dev() const;

  // Monte Carlo fallback for E|X - X'|^p with standard error.
  struct McMoment {
    double value = 0.0;
    double se = 0.0;
  };
  McMoment abs_diff_moment_mc(double p, int samples, Stream& stream) const;
};

// Per-step parameter table: row i applies to step k = i + 2 and the last
// row extends to all later steps (constant tail).
template <typename T>
struct Schedule {
  std::vector<T> rows;

  Schedule() = default;
  explicit Schedule(T constant) : rows{std::move(constant)} {}
  explicit Schedule(std::vector<T> table) : rows(std::move(table)) {}

  bool empty() const { return rows.empty(); }
  std::size_t table_size() const { return rows.size(); }

  const T& at(long long k) const {
    const auto idx = static_cast<std::size_t>(k - 2);
    return rows[idx < rows.size() ? idx : rows.size() - 1];
  }
};

// pmf of X on {0, 1, ...} for discrete nonnegative laws; empty when the
// law is not such a law. Poisson support is truncated where the tail mass
// drops below 1e-15.
std::vector<double> discrete_pmf(const ScalarLaw& law);

// pmf of X_1 + ... + X_count for iid X_i ~ law (count >= 0). Binomial and
// Poisson sums use the closed-form pmf; small finite-support laws are
// convolved directly. Empty when unavailable or larger than max_support.
std::vector<double> pmf_of_sum(const ScalarLaw& law, long long count,
                               std::size_t max_support = 1 << 16);

// E|e - T| for T distributed by a pmf on {0, 1, ...}.
double mean_abs_dev_pmf(const std::vector<double>& pmf, double e);

// E[T^p] for T distributed by a pmf on {0, 1, ...}.
double raw_moment_pmf(const std::vector<double>& pmf, double p);

// p-th raw moment of a Poisson(t) count for integer p, via the Stirling
// number recursion E[N^p] = sum_j S(p, j) t^j.
double poisson_raw_moment(double t, int p);

// Monte Carlo estimate of E[N^p], N ~ Poisson(t), for non-integer p.
ScalarLaw::McMoment poisson_raw_moment_mc(double t, double p, int samples, Stream& stream);

}  // namespace chainbound
