#include "chainbound/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chainbound/stats.hpp"

namespace chainbound {

namespace {

bool law_has_mean(const ScalarLaw& law) {
  return law.kind != LawKind::pareto || law.a > 1.0;
}

// Closed-form conditional expectations exist for plain sums of scalar
// affine chains with deterministic multipliers: g_k is linear in x_k with
// coefficient w_k, w_n = 1, w_k = 1 + a_{k+1} w_{k+1}.
struct AffineInfo {
  bool ok = false;
  std::vector<double> w;      // w[k], k = 1..n
  std::vector<double> drift;  // D[k] = sum_{i>k} mean(B_i) w_i, k = 1..n
  double g0 = 0.0;
};

AffineInfo affine_info(const ChainModel& model, const Functional& f, long long n) {
  AffineInfo info;
  if (f.kind != FunctionalKind::plain_sum) return info;
  if (model.family != Family::gar) return info;
  const auto& p = model.as<GarParams>();
  if (p.dim != 1 || model.metric.exponent() != 1.0) return info;
  for (const auto& law : p.multiplier.rows) {
    if (law.kind != LawKind::point_mass) return info;
  }
  for (const auto& law : p.offset.rows) {
    if (!law_has_mean(law)) return info;
  }
  if (!law_has_mean(model.initial[0])) return info;

  info.w.assign(static_cast<std::size_t>(n) + 1, 0.0);
  info.drift.assign(static_cast<std::size_t>(n) + 1, 0.0);
  info.w[static_cast<std::size_t>(n)] = 1.0;
  for (long long k = n - 1; k >= 1; --k) {
    const double a_next = p.multiplier.at(k + 1).a;
    info.w[static_cast<std::size_t>(k)] = 1.0 + a_next * info.w[static_cast<std::size_t>(k + 1)];
    info.drift[static_cast<std::size_t>(k)] =
        info.drift[static_cast<std::size_t>(k + 1)] +
        p.offset.at(k + 1).mean() * info.w[static_cast<std::size_t>(k + 1)];
  }
  info.g0 = info.w[1] * model.initial[0].mean() + info.drift[1];
  info.ok = true;
  return info;
}

double affine_gk(const AffineInfo& info, const PathMatrix& prefix, long long k) {
  if (k == 0) return info.g0;
  double acc = 0.0;
  for (long long i = 1; i < k; ++i) {
    acc += prefix.state(i)[0];
  }
  return acc + info.w[static_cast<std::size_t>(k)] * prefix.state(k)[0] +
         info.drift[static_cast<std::size_t>(k)];
}

// Average of f over m continuations of the first k states, with branch
// noise streams keyed by (replication, step, branch) so different k share
// draws. Returns per-branch values.
void continuation_values(const ChainModel& model, const Functional& f, long long n,
                         const PathMatrix& prefix, long long k, int m_future,
                         const RngPolicy& policy, std::uint64_t replication,
                         std::vector<double>& out) {
  const int dim = model.state_dim();
  PathMatrix scratch = PathMatrix::zeros(n, dim);
  out.resize(static_cast<std::size_t>(m_future));
  for (int j = 0; j < m_future; ++j) {
    for (long long i = 1; i <= k; ++i) {
      std::copy_n(prefix.state(i).data(), dim, scratch.state(i).data());
    }
    const auto branch = static_cast<std::uint64_t>(j) + 1;
    if (k == 0) {
      Stream init = policy.stream(StreamPurpose::future_branch, replication, 1, branch);
      draw_initial(model, init, scratch.state(1));
    }
    for (long long t = k == 0 ? 2 : k + 1; t <= n; ++t) {
      Stream s = policy.stream(StreamPurpose::future_branch, replication,
                               static_cast<std::uint64_t>(t), branch);
      step(model, t, scratch.state(t - 1), s, scratch.state(t));
    }
    out[static_cast<std::size_t>(j)] = f(scratch);
  }
}

}  // namespace

Functional Functional::plain_sum() {
  Functional f;
  f.kind = FunctionalKind::plain_sum;
  return f;
}

Functional Functional::coordinate_sum(std::vector<double> anchor, Metric metric) {
  Functional f;
  f.kind = FunctionalKind::coordinate_sum;
  f.anchor = std::move(anchor);
  f.metric = std::move(metric);
  return f;
}

Functional Functional::max_distance(std::vector<double> anchor, Metric metric) {
  Functional f;
  f.kind = FunctionalKind::max_distance;
  f.anchor = std::move(anchor);
  f.metric = std::move(metric);
  return f;
}

Functional Functional::custom_fn(std::function<double(const PathMatrix&)> fn) {
  Functional f;
  f.kind = FunctionalKind::custom;
  f.custom = std::move(fn);
  return f;
}

double Functional::operator()(const PathMatrix& path) const {
  switch (kind) {
    case FunctionalKind::plain_sum: {
      if (path.dim != 1) {
        throw std::invalid_argument("plain_sum functional expects scalar states");
      }
      double acc = 0.0;
      for (long long i = 1; i <= path.n; ++i) {
        acc += path.state(i)[0];
      }
      return acc;
    }
    case FunctionalKind::coordinate_sum: {
      double acc = 0.0;
      for (long long i = 1; i <= path.n; ++i) {
        acc += metric(path.state(i), anchor);
      }
      return acc;
    }
    case FunctionalKind::max_distance: {
      double best = 0.0;
      for (long long i = 1; i <= path.n; ++i) {
        best = std::max(best, metric(path.state(i), anchor));
      }
      return best;
    }
    case FunctionalKind::custom:
      return custom(path);
  }
  return 0.0;
}

bool audit_separately_lipschitz(const Functional& f, const ChainModel& model, long long n,
                                int trials, const RngPolicy& policy) {
  const int dim = model.state_dim();
  Stream s = policy.stream(StreamPurpose::diagnostic, 0, 0);
  PathMatrix path = PathMatrix::zeros(n, dim);
  for (int t = 0; t < trials; ++t) {
    for (long long i = 1; i <= n; ++i) {
      draw_initial(model, s, path.state(i));
    }
    PathMatrix perturbed = path;
    const auto coord = 1 + static_cast<long long>(s.uniform01() * static_cast<double>(n));
    const auto i = std::min(coord, n);
    draw_initial(model, s, perturbed.state(i));
    const double df = std::fabs(f(path) - f(perturbed));
    const double d = model.metric(path.state(i), perturbed.state(i));
    if (df > d * (1.0 + 1e-9) + 1e-12) {
      return false;
    }
  }
  return true;
}

double estimate_gk(const ChainModel& model, const Functional& f, long long n,
                   const PathMatrix& prefix, long long k, int m_future, const RngPolicy& policy,
                   std::uint64_t replication) {
  if (k < 0 || k > n) {
    throw std::invalid_argument("estimate_gk: k must lie in [0, n]");
  }
  const AffineInfo info = affine_info(model, f, n);
  if (info.ok) {
    return affine_gk(info, prefix, k);
  }
  if (k == n) {
    return f(prefix);
  }
  if (m_future < 1) {
    throw std::invalid_argument("estimate_gk: m_future must be >= 1");
  }
  std::vector<double> values;
  continuation_values(model, f, n, prefix, k, m_future, policy, replication, values);
  return mean_of(values);
}

DecompositionPath decompose_path(const ChainModel& model, const Functional& f, long long n,
                                 int m_future, const RngPolicy& policy,
                                 std::uint64_t replication) {
  if (n < 2) {
    throw std::invalid_argument("decompose_path: n must be >= 2");
  }
  if (m_future < 1) {
    throw std::invalid_argument("decompose_path: m_future must be >= 1");
  }
  const int dim = model.state_dim();
  const bool scalar_draws = dim == 1 && model.family != Family::generic;

  DecompositionPath out;
  out.path = PathMatrix::zeros(n, dim);
  out.g.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.m.assign(static_cast<std::size_t>(n), 0.0);
  out.m_se.assign(static_cast<std::size_t>(n), 0.0);
  out.h.assign(static_cast<std::size_t>(n) - 1, 0.0);
  out.h_se.assign(static_cast<std::size_t>(n) - 1, 0.0);

  // Simulate the path, keeping the scalar draws for dominator evaluation.
  std::vector<StepDraw> draws(static_cast<std::size_t>(n) + 1);
  {
    Stream init = policy.stream(StreamPurpose::path_noise, replication, 1);
    draw_initial(model, init, out.path.state(1));
    for (long long k = 2; k <= n; ++k) {
      Stream s = policy.stream(StreamPurpose::path_noise, replication,
                               static_cast<std::uint64_t>(k));
      if (scalar_draws) {
        draws[static_cast<std::size_t>(k)] =
            sample_step_draw(model, k, out.path.state(k - 1), s);
        apply_step_draw(model, k, out.path.state(k - 1), draws[static_cast<std::size_t>(k)],
                        out.path.state(k));
      } else {
        step(model, k, out.path.state(k - 1), s, out.path.state(k));
      }
    }
  }

  // Dominators H_k at (X_{k-1}, eps_k).
  for (long long k = 2; k <= n; ++k) {
    const auto idx = static_cast<std::size_t>(k - 2);
    if (scalar_draws && has_closed_form_H(model, k)) {
      out.h[idx] =
          closed_form_H(model, k, out.path.state(k - 1), draws[static_cast<std::size_t>(k)]);
      continue;
    }
    // F_k(X_{k-1}, eps_k) is the realized X_k; average distances to fresh
    // inner copies.
    Stream inner = policy.stream(StreamPurpose::inner_copy, replication,
                                 static_cast<std::uint64_t>(k));
    std::vector<double> y(static_cast<std::size_t>(dim));
    double acc = 0.0;
    double acc_sq = 0.0;
    for (int j = 0; j < m_future; ++j) {
      step(model, k, out.path.state(k - 1), inner, y);
      const double d = model.metric(out.path.state(k), y);
      acc += d;
      acc_sq += d * d;
    }
    const double h = acc / m_future;
    out.h[idx] = h;
    out.h_se[idx] = std::sqrt(std::max(0.0, acc_sq / m_future - h * h) / m_future);
  }

  const AffineInfo info = affine_info(model, f, n);
  if (info.ok) {
    out.exact = true;
    for (long long k = 0; k <= n; ++k) {
      out.g[static_cast<std::size_t>(k)] = affine_gk(info, out.path, k);
    }
    for (long long k = 1; k <= n; ++k) {
      out.m[static_cast<std::size_t>(k - 1)] =
          out.g[static_cast<std::size_t>(k)] - out.g[static_cast<std::size_t>(k - 1)];
    }
    return out;
  }

  // Nested Monte Carlo with common random numbers: per-branch values of
  // f share continuation streams across k, and M_k comes from the paired
  // differences.
  std::vector<std::vector<double>> fvals(static_cast<std::size_t>(n) + 1);
  for (long long k = 0; k < n; ++k) {
    continuation_values(model, f, n, out.path, k, m_future, policy, replication,
                        fvals[static_cast<std::size_t>(k)]);
  }
  fvals[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(m_future), f(out.path));

  for (long long k = 0; k <= n; ++k) {
    out.g[static_cast<std::size_t>(k)] = mean_of(fvals[static_cast<std::size_t>(k)]);
  }
  for (long long k = 1; k <= n; ++k) {
    double acc = 0.0;
    double acc_sq = 0.0;
    for (int j = 0; j < m_future; ++j) {
      const double d = fvals[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] -
                       fvals[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)];
      acc += d;
      acc_sq += d * d;
    }
    const double m = acc / m_future;
    out.m[static_cast<std::size_t>(k - 1)] = m;
    out.m_se[static_cast<std::size_t>(k - 1)] =
        std::sqrt(std::max(0.0, acc_sq / m_future - m * m) / m_future);
  }
  return out;
}

Prop21Report check_prop21(const ChainModel& model, const Functional& f, long long n,
                          int replications, int m_future, const RngPolicy& policy) {
  const double rho = certified_rho(model);
  const auto ks = k_rho_table(n, rho);
  Prop21Report report;
  report.n = n;
  report.replications = replications;
  report.mk_violations.assign(static_cast<std::size_t>(n) - 1, 0);

  const bool scalar_initial = model.state_dim() == 1 &&
                              model.metric.exponent() == 1.0 &&
                              model.metric.base_kind() == MetricKind::absolute &&
                              model.initial[0].has_mean_abs_dev();

  for (int rep = 0; rep < replications; ++rep) {
    const auto d =
        decompose_path(model, f, n, m_future, policy, static_cast<std::uint64_t>(rep));
    if (rep == 0) {
      report.exact = d.exact;
    }
    // |M_1| against K_{n-1} G_{X_1}(X_1).
    {
      double g_init;
      double g_se = 0.0;
      if (scalar_initial) {
        g_init = model.initial[0].mean_abs_dev(d.path.state(1)[0]);
      } else {
        Stream inner = policy.stream(StreamPurpose::inner_copy, static_cast<std::uint64_t>(rep),
                                     1, 1);
        std::vector<double> x(static_cast<std::size_t>(model.state_dim()));
        double acc = 0.0;
        double acc_sq = 0.0;
        for (int j = 0; j < m_future; ++j) {
          draw_initial(model, inner, x);
          const double dist = model.metric(d.path.state(1), x);
          acc += dist;
          acc_sq += dist * dist;
        }
        g_init = acc / m_future;
        g_se = std::sqrt(std::max(0.0, acc_sq / m_future - g_init * g_init) / m_future);
      }
      const double bound = ks[static_cast<std::size_t>(n - 1)] * g_init;
      const double tol = d.exact && g_se == 0.0
                             ? 1e-9 * (1.0 + bound)
                             : report.tolerance_ses *
                                   std::hypot(d.m_se[0], ks[static_cast<std::size_t>(n - 1)] * g_se);
      if (std::fabs(d.m[0]) > bound + tol) {
        ++report.m1_violations;
      }
    }
    for (long long k = 2; k <= n; ++k) {
      const double kk = ks[static_cast<std::size_t>(n - k)];
      const double bound = kk * d.h[static_cast<std::size_t>(k - 2)];
      const double se = std::hypot(d.m_se[static_cast<std::size_t>(k - 1)],
                                   kk * d.h_se[static_cast<std::size_t>(k - 2)]);
      const double tol =
          d.exact && se == 0.0 ? 1e-9 * (1.0 + bound) : report.tolerance_ses * se;
      if (std::fabs(d.m[static_cast<std::size_t>(k - 1)]) > bound + tol) {
        ++report.mk_violations[static_cast<std::size_t>(k - 2)];
      }
    }
  }
  return report;
}

BinCheckReport check_martingale_bins(const ChainModel& model, const Functional& f, long long n,
                                     int replications, int m_future, const RngPolicy& policy,
                                     int bins, double tolerance_ses) {
  if (bins < 1) {
    throw std::invalid_argument("check_martingale_bins: bins must be >= 1");
  }
  BinCheckReport report;
  report.n = n;
  report.replications = replications;
  report.bins = bins;

  // Gather (X_{k-1}, M_k) pairs per step.
  std::vector<std::vector<std::pair<double, double>>> pairs(static_cast<std::size_t>(n) - 1);
  for (auto& v : pairs) v.reserve(static_cast<std::size_t>(replications));
  for (int rep = 0; rep < replications; ++rep) {
    const auto d =
        decompose_path(model, f, n, m_future, policy, static_cast<std::uint64_t>(rep));
    for (long long k = 2; k <= n; ++k) {
      pairs[static_cast<std::size_t>(k - 2)].push_back(
          {d.path.state(k - 1)[0], d.m[static_cast<std::size_t>(k - 1)]});
    }
  }

  double worst = 0.0;
  for (auto& kv : pairs) {
    std::vector<double> ms(kv.size());
    for (std::size_t i = 0; i < kv.size(); ++i) ms[i] = kv[i].second;
    const double sd = stddev_of(ms);
    if (sd == 0.0) continue;
    std::sort(kv.begin(), kv.end());
    const std::size_t count = kv.size();
    for (int b = 0; b < bins; ++b) {
      const std::size_t lo = count * static_cast<std::size_t>(b) / static_cast<std::size_t>(bins);
      const std::size_t hi =
          count * (static_cast<std::size_t>(b) + 1) / static_cast<std::size_t>(bins);
      if (hi <= lo) continue;
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        acc += kv[i].second / sd;
      }
      worst = std::max(worst, std::fabs(acc) / std::sqrt(static_cast<double>(hi - lo)));
    }
  }
  report.worst_z = worst;
  report.pass = worst <= tolerance_ses;
  return report;
}

Leedm1Report check_leedm1(const std::vector<std::vector<double>>& increments,
                          const std::vector<double>& brackets, double x, double y, double v,
                          double confidence) {
  if (increments.empty() || increments.size() != brackets.size()) {
    throw std::invalid_argument("check_leedm1: need matching nonempty increments and brackets");
  }
  if (!(x > 0.0) || !(y > 0.0) || !(v > 0.0)) {
    throw std::domain_error("check_leedm1: x, y, v must be positive");
  }
  const auto paths = static_cast<long long>(increments.size());
  long long lhs_count = 0;
  long long max_count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  long long total = 0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    double z = 0.0;
    double max_xi = -std::numeric_limits<double>::infinity();
    for (double xi : increments[i]) {
      z += xi;
      max_xi = std::max(max_xi, xi);
      sum += xi;
      sum_sq += xi * xi;
      ++total;
    }
    if (z >= x && brackets[i] <= v * v) ++lhs_count;
    if (max_xi > y) ++max_count;
  }
  Leedm1Report report;
  report.lhs_estimate = static_cast<double>(lhs_count) / static_cast<double>(paths);
  report.lhs_upper_cl = clopper_pearson(lhs_count, paths, confidence).hi;
  report.exp_term = std::exp(-x * x / (2.0 * (v * v + x * y / 3.0)));
  report.max_term = static_cast<double>(max_count) / static_cast<double>(paths);
  report.bound = report.exp_term + report.max_term;
  const double m = sum / static_cast<double>(total);
  const double sd = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(total) - m * m));
  report.mean_zero_ok =
      std::fabs(m) <= 4.0 * sd / std::sqrt(static_cast<double>(total)) + 1e-12;
  report.pass = report.lhs_upper_cl <= report.bound;
  return report;
}

}  // namespace chainbound
