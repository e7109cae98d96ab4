#include "chainbound/dominators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chainbound {

namespace {

// Simulate X_1 .. X_{k-1} for one replication under the given purpose tag.
std::vector<double> simulate_prefix(const ChainModel& model, long long upto, std::uint64_t rep,
                                    const RngPolicy& policy, StreamPurpose purpose) {
  const auto dim = static_cast<std::size_t>(model.state_dim());
  std::vector<double> x(dim);
  std::vector<double> y(dim);
  Stream init = policy.stream(purpose, rep, 1);
  draw_initial(model, init, x);
  for (long long k = 2; k <= upto; ++k) {
    Stream s = policy.stream(purpose, rep, static_cast<std::uint64_t>(k));
    step(model, k, x, s, y);
    std::swap(x, y);
  }
  return x;
}

SampleSet make_set(const RngPolicy& policy, StreamPurpose purpose, long long k, int m_outer,
                   int m_inner) {
  SampleSet s;
  s.step = k;
  s.m_inner = m_inner;
  s.m_outer = m_outer;
  s.master_seed = policy.master_seed;
  s.experiment = policy.experiment_id;
  s.purpose = purpose;
  return s;
}

}  // namespace

double estimate_H_at(const ChainModel& model, long long k, std::span<const double> x,
                     int m_inner, Stream& outer_stream, Stream& inner_stream) {
  if (m_inner < 1) {
    throw std::invalid_argument("estimate_H_at: m_inner must be >= 1");
  }
  if (has_closed_form_H(model, k)) {
    const StepDraw draw = sample_step_draw(model, k, x, outer_stream);
    return closed_form_H(model, k, x, draw);
  }
  const auto dim = static_cast<std::size_t>(model.state_dim());
  std::vector<double> y(dim);
  std::vector<double> y_copy(dim);
  step(model, k, x, outer_stream, y);
  double acc = 0.0;
  for (int j = 0; j < m_inner; ++j) {
    step(model, k, x, inner_stream, y_copy);
    acc += model.metric(y, y_copy);
  }
  return acc / m_inner;
}

double estimate_L_at(const ChainModel& model, long long k, std::span<const double> x,
                     int m_inner, Stream& outer_stream, Stream& inner_stream) {
  if (m_inner < 1) {
    throw std::invalid_argument("estimate_L_at: m_inner must be >= 1");
  }
  const bool exact = has_closed_form_H(model, k);
  const auto dim = static_cast<std::size_t>(model.state_dim());
  std::vector<double> y(dim);
  std::vector<double> y_copy(dim);
  double acc = 0.0;
  for (int i = 0; i < m_inner; ++i) {
    double h;
    if (exact) {
      const StepDraw draw = sample_step_draw(model, k, x, outer_stream);
      h = closed_form_H(model, k, x, draw);
    } else {
      step(model, k, x, outer_stream, y);
      double inner_acc = 0.0;
      for (int j = 0; j < m_inner; ++j) {
        step(model, k, x, inner_stream, y_copy);
        inner_acc += model.metric(y, y_copy);
      }
      h = inner_acc / m_inner;
    }
    acc += h * h;
  }
  return acc / m_inner;
}

SampleSet sample_H(const ChainModel& model, long long k, int m_outer, int m_inner,
                   const RngPolicy& policy) {
  if (k < 2) {
    throw std::invalid_argument("sample_H: k must be >= 2");
  }
  SampleSet out = make_set(policy, StreamPurpose::constants, k, m_outer, m_inner);
  out.values.resize(static_cast<std::size_t>(m_outer));
  for (int rep = 0; rep < m_outer; ++rep) {
    const auto x = simulate_prefix(model, k - 1, static_cast<std::uint64_t>(rep), policy,
                                   StreamPurpose::constants);
    Stream outer = policy.stream(StreamPurpose::constants, static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(k));
    Stream inner = policy.stream(StreamPurpose::inner_copy, static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(k));
    out.values[static_cast<std::size_t>(rep)] = estimate_H_at(model, k, x, m_inner, outer, inner);
  }
  return out;
}

SampleSet estimate_G_init(const ChainModel& model, int m_outer, int m_inner,
                          const RngPolicy& policy) {
  if (m_outer < 1) {
    throw std::invalid_argument("estimate_G_init: m must be >= 1");
  }
  SampleSet out = make_set(policy, StreamPurpose::initial_state, 1, m_outer, m_inner);
  out.values.resize(static_cast<std::size_t>(m_outer));
  const auto dim = static_cast<std::size_t>(model.state_dim());
  const bool exact = dim == 1 && model.metric.exponent() == 1.0 &&
                     model.metric.base_kind() == MetricKind::absolute &&
                     model.initial[0].has_mean_abs_dev();
  std::vector<double> x(dim);
  std::vector<double> x_copy(dim);
  for (int rep = 0; rep < m_outer; ++rep) {
    Stream init = policy.stream(StreamPurpose::initial_state, static_cast<std::uint64_t>(rep), 1);
    draw_initial(model, init, x);
    if (exact) {
      out.values[static_cast<std::size_t>(rep)] = model.initial[0].mean_abs_dev(x[0]);
      continue;
    }
    Stream inner = policy.stream(StreamPurpose::inner_copy, static_cast<std::uint64_t>(rep), 1);
    double acc = 0.0;
    for (int j = 0; j < m_inner; ++j) {
      draw_initial(model, inner, x_copy);
      acc += model.metric(x, x_copy);
    }
    out.values[static_cast<std::size_t>(rep)] = acc / m_inner;
  }
  return out;
}

SampleSet estimate_L(const ChainModel& model, long long k, int m_outer, int m_inner,
                     const RngPolicy& policy) {
  if (k < 2) {
    throw std::invalid_argument("estimate_L: k must be >= 2");
  }
  SampleSet out = make_set(policy, StreamPurpose::constants, k, m_outer, m_inner);
  out.values.resize(static_cast<std::size_t>(m_outer));
  for (int rep = 0; rep < m_outer; ++rep) {
    const auto x = simulate_prefix(model, k - 1, static_cast<std::uint64_t>(rep), policy,
                                   StreamPurpose::constants);
    Stream outer = policy.stream(StreamPurpose::constants, static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(k), 1);
    Stream inner = policy.stream(StreamPurpose::inner_copy, static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(k), 1);
    out.values[static_cast<std::size_t>(rep)] = estimate_L_at(model, k, x, m_inner, outer, inner);
  }
  return out;
}

double empirical_pnorm(const SampleSet& samples, double p) {
  if (samples.values.empty()) {
    throw std::invalid_argument("empirical_pnorm: empty sample set");
  }
  if (!(p >= 1.0)) {
    throw std::domain_error("empirical_pnorm: p must be >= 1");
  }
  double acc = 0.0;
  for (double v : samples.values) {
    acc += std::pow(v, p);
  }
  return std::pow(acc / static_cast<double>(samples.values.size()), 1.0 / p);
}

double empirical_weak_norm(const SampleSet& samples, double p) {
  if (samples.values.empty()) {
    throw std::invalid_argument("empirical_weak_norm: empty sample set");
  }
  if (!(p >= 1.0)) {
    throw std::domain_error("empirical_weak_norm: p must be >= 1");
  }
  std::vector<double> sorted = samples.values;
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double best = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double survivors = m - static_cast<double>(i);  // count of v_j >= v_(i)
    best = std::max(best, std::pow(sorted[i], p) * survivors / m);
  }
  return best;
}

ExpMomentEstimate exp_moment_estimate(const SampleSet& samples, double gamma, double kappa) {
  if (samples.values.empty()) {
    throw std::invalid_argument("exp_moment_estimate: empty sample set");
  }
  if (!(gamma > 0.0) || !(kappa > 0.0)) {
    throw std::domain_error("exp_moment_estimate: gamma and kappa must be positive");
  }
  ExpMomentEstimate out;
  double acc = 0.0;
  for (double v : samples.values) {
    double arg = kappa * std::pow(v, gamma);
    if (arg > 700.0) {
      out.overflow = true;
      arg = 700.0;
    }
    acc += std::exp(arg);
  }
  out.value = acc / static_cast<double>(samples.values.size());
  return out;
}

double bernstein_epsilon(const SampleSet& samples, int l_max) {
  if (samples.values.empty()) {
    throw std::invalid_argument("bernstein_epsilon: empty sample set");
  }
  if (l_max < 2) {
    throw std::invalid_argument("bernstein_epsilon: l_max must be >= 2");
  }
  const auto m = static_cast<double>(samples.values.size());
  double mu2 = 0.0;
  for (double v : samples.values) {
    mu2 += v * v;
  }
  mu2 /= m;
  if (mu2 == 0.0) {
    throw std::domain_error("bernstein_epsilon: degenerate all-zero sample");
  }
  double eps = 0.0;
  for (int l = 3; l <= l_max; ++l) {
    double mul = 0.0;
    for (double v : samples.values) {
      mul += std::pow(v, l);
    }
    mul /= m;
    const double lhs = 2.0 * mul * std::pow(static_cast<double>(l - 1), 0.5 * l) /
                       (std::tgamma(static_cast<double>(l) + 1.0) * mu2);
    eps = std::max(eps, std::pow(lhs, 1.0 / (l - 2)));
  }
  return eps;
}

DominatorSweep sweep_dominators(const ChainModel& model, long long n, int m_outer, int m_inner,
                                const RngPolicy& policy) {
  if (n < 2) {
    throw std::invalid_argument("sweep_dominators: n must be >= 2");
  }
  const double rho = certified_rho(model);
  const auto ks = k_rho_table(n, rho);
  const auto dim = static_cast<std::size_t>(model.state_dim());
  const auto steps = static_cast<std::size_t>(n - 1);

  DominatorSweep sweep;
  sweep.n = n;
  sweep.h_per_k.reserve(steps);
  sweep.l_per_k.reserve(steps);
  for (long long k = 2; k <= n; ++k) {
    auto hs = make_set(policy, StreamPurpose::constants, k, m_outer, m_inner);
    hs.values.resize(static_cast<std::size_t>(m_outer));
    sweep.h_per_k.push_back(std::move(hs));
    auto ls = make_set(policy, StreamPurpose::constants, k, m_outer, m_inner);
    ls.values.resize(static_cast<std::size_t>(m_outer));
    sweep.l_per_k.push_back(std::move(ls));
  }
  sweep.l_avg = make_set(policy, StreamPurpose::constants, 0, m_outer, m_inner);
  sweep.l_avg.values.resize(static_cast<std::size_t>(m_outer));
  sweep.bracket = make_set(policy, StreamPurpose::constants, 0, m_outer, m_inner);
  sweep.bracket.values.resize(static_cast<std::size_t>(m_outer));

  std::vector<double> x(dim);
  std::vector<double> y(dim);
  std::vector<double> y_copy(dim);
  for (int rep = 0; rep < m_outer; ++rep) {
    const auto urep = static_cast<std::uint64_t>(rep);
    Stream init = policy.stream(StreamPurpose::constants, urep, 1);
    draw_initial(model, init, x);
    double l_sum = 0.0;
    double bracket = 0.0;
    for (long long k = 2; k <= n; ++k) {
      const auto uk = static_cast<std::uint64_t>(k);
      Stream path = policy.stream(StreamPurpose::constants, urep, uk);
      Stream inner = policy.stream(StreamPurpose::inner_copy, urep, uk);
      double h;
      if (has_closed_form_H(model, k)) {
        const StepDraw draw = sample_step_draw(model, k, x, path);
        h = closed_form_H(model, k, x, draw);
        apply_step_draw(model, k, x, draw, y);
      } else {
        step(model, k, x, path, y);
        double acc = 0.0;
        for (int j = 0; j < m_inner; ++j) {
          step(model, k, x, inner, y_copy);
          acc += model.metric(y, y_copy);
        }
        h = acc / m_inner;
      }
      Stream l_outer = policy.stream(StreamPurpose::constants, urep, uk, 1);
      Stream l_inner = policy.stream(StreamPurpose::inner_copy, urep, uk, 1);
      const double l = estimate_L_at(model, k, x, m_inner, l_outer, l_inner);

      const auto idx = static_cast<std::size_t>(k - 2);
      sweep.h_per_k[idx].values[static_cast<std::size_t>(rep)] = h;
      sweep.l_per_k[idx].values[static_cast<std::size_t>(rep)] = l;
      l_sum += l;
      const double kk = ks[static_cast<std::size_t>(n - k)];
      bracket += kk * kk * l;
      std::swap(x, y);
    }
    sweep.l_avg.values[static_cast<std::size_t>(rep)] = l_sum / static_cast<double>(n);
    sweep.bracket.values[static_cast<std::size_t>(rep)] = bracket;
  }
  return sweep;
}

}  // namespace chainbound
