#pragma once

#include <functional>
#include <vector>

#include "chainbound/model.hpp"

namespace chainbound {

// Row-major storage for one trajectory X_1 .. X_n of a dim-dimensional
// chain. States are 1-indexed to match the chain notation.
struct PathMatrix {
  long long n = 0;
  int dim = 1;
  std::vector<double> data;

  static PathMatrix zeros(long long n, int dim) {
    PathMatrix p;
    p.n = n;
    p.dim = dim;
    p.data.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim), 0.0);
    return p;
  }

  std::span<const double> state(long long i) const {
    return {data.data() + (i - 1) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> state(long long i) {
    return {data.data() + (i - 1) * dim, static_cast<std::size_t>(dim)};
  }
};

enum class FunctionalKind { coordinate_sum, plain_sum, max_distance, custom };

// A separately Lipschitz functional of the whole path, Lipschitz constant
// 1 per coordinate with respect to the paired metric.
struct Functional {
  FunctionalKind kind = FunctionalKind::plain_sum;
  std::vector<double> anchor;
  Metric metric = Metric::absolute();
  std::function<double(const PathMatrix&)> custom;

  static Functional plain_sum();
  static Functional coordinate_sum(std::vector<double> anchor, Metric metric);
  static Functional max_distance(std::vector<double> anchor, Metric metric);
  static Functional custom_fn(std::function<double(const PathMatrix&)> fn);

  double operator()(const PathMatrix& path) const;
};

// Spot-check of the separately-Lipschitz contract on random coordinate
// perturbations: |f(..., x_i, ...) - f(..., x'_i, ...)| <= d(x_i, x'_i).
bool audit_separately_lipschitz(const Functional& f, const ChainModel& model, long long n,
                                int trials, const RngPolicy& policy);

// E[f(X_1..X_n) | X_1..X_k] estimated at an explicit prefix (the first k
// states of `prefix`). Uses the closed form for plain sums of affine
// scalar chains with deterministic multipliers (m_future ignored there);
// otherwise averages m_future simulated continuations. Branch noise
// streams are keyed by (replication, step, branch) and shared across k,
// so adjacent conditional expectations use common random numbers.
double estimate_gk(const ChainModel& model, const Functional& f, long long n,
                   const PathMatrix& prefix, long long k, int m_future, const RngPolicy& policy,
                   std::uint64_t replication = 0);

// One simulated trajectory with its reconstructed decomposition:
// g_k = E[f | F_k], M_k = g_k - g_{k-1}, and the dominator H_k evaluated
// at (X_{k-1}, eps_k) along the path.
struct DecompositionPath {
  PathMatrix path;
  std::vector<double> g;     // g[k] = g_k, k = 0..n
  std::vector<double> m;     // m[k-1] = M_k, k = 1..n
  std::vector<double> m_se;  // nested-MC standard errors (0 when exact)
  std::vector<double> h;     // h[k-2] = H_k, k = 2..n
  std::vector<double> h_se;
  bool exact = false;        // affine closed-form route
};

DecompositionPath decompose_path(const ChainModel& model, const Functional& f, long long n,
                                 int m_future, const RngPolicy& policy,
                                 std::uint64_t replication = 0);

// Checks |M_1| <= K_{n-1}(rho) G_{X_1}(X_1) and |M_k| <= K_{n-k}(rho) H_k
// over replicated decompositions. Closed-form paths are compared exactly
// (up to fp roundoff); nested-MC paths flag a violation only beyond
// 3 combined standard errors.
struct Prop21Report {
  long long n = 0;
  int replications = 0;
  bool exact = false;
  long long m1_violations = 0;
  std::vector<long long> mk_violations;  // index k - 2
  double tolerance_ses = 3.0;

  long long total_violations() const {
    long long t = m1_violations;
    for (long long v : mk_violations) t += v;
    return t;
  }
};

Prop21Report check_prop21(const ChainModel& model, const Functional& f, long long n,
                          int replications, int m_future, const RngPolicy& policy);

// Conditional-mean check: variance-normalized increments binned on
// X_{k-1} quantiles must have bin means within tolerance_ses standard
// errors of zero.
struct BinCheckReport {
  long long n = 0;
  int replications = 0;
  int bins = 0;
  double worst_z = 0.0;  // max over (k, bin) of |bin mean| * sqrt(count)
  bool pass = false;
};

BinCheckReport check_martingale_bins(const ChainModel& model, const Functional& f, long long n,
                                     int replications, int m_future, const RngPolicy& policy,
                                     int bins = 8, double tolerance_ses = 4.0);

// Empirical check of the martingale deviation lemma
//   P(Z_n >= x and <Z>_n <= v^2) <= exp(-x^2 / (2(v^2 + xy/3))) + P(max xi > y)
// on per-path increment arrays with caller-computed predictable brackets.
struct Leedm1Report {
  double lhs_estimate = 0.0;
  double lhs_upper_cl = 0.0;
  double exp_term = 0.0;
  double max_term = 0.0;  // empirical P(max xi > y)
  double bound = 0.0;
  bool mean_zero_ok = false;
  bool pass = false;
};

Leedm1Report check_leedm1(const std::vector<std::vector<double>>& increments,
                          const std::vector<double>& brackets, double x, double y, double v,
                          double confidence = 0.999);

}  // namespace chainbound
