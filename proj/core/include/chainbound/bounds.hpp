#pragma once

#include <map>
#include <optional>
#include <string>

#include "chainbound/dominators.hpp"

namespace chainbound {

// Which normalization the deviation threshold uses: P(+-S_n >= a_n x)
// with a_n = V_n, a_n = n, or a_n = 1. Comparisons against empirical
// tails refuse to mix conventions.
enum class ThresholdConvention { vn_x, n_x, raw_x };

const char* to_string(ThresholdConvention c);

// An evaluated probability bound with its initial-condition/martingale
// split. `value` is min(1, i1 + i2); `clipped` records whether the raw sum
// exceeded 1 (such rows are vacuous in domination sweeps).
struct BoundResult {
  std::string name;
  double value = 0.0;
  std::optional<double> i1;
  std::optional<double> i2;
  bool clipped = false;
  bool degenerate = false;  // e.g. sigma_n = 0
  ThresholdConvention convention = ThresholdConvention::n_x;
  std::map<std::string, double> inputs_echo;

  double raw() const { return i1.value_or(0.0) + i2.value_or(0.0); }
};

// Empirical P(G_{X_1}(X_1) >= a_n x / (2 K_{n-1}(rho))) from realized
// G samples; the initial-condition term of every deviation bound.
double i1_term(const SampleSet& g_samples, double a_n, double x, long long n, double rho);

// Markov bound on the initial-condition term under a weak moment of order
// p - 1 on G_{X_1}(X_1): (2 K_{n-1}(rho))^{p-1} C3 / (nx)^{p-1}, clipped at 1.
double i1_markov_bound(double c3, double p, long long n, double x, double rho);

// V_n^2 = sum_{k=2}^n K_{n-k}(rho)^2 E[H_k^2] and sigma_n^2 = V_n^2 / n.
// h2_moments must contain every k in [2, n].
std::pair<double, double> vn_sigma(const std::map<long long, double>& h2_moments, long long n,
                                   double rho);

enum class SubgaussianVariant { sharp, simple };

// Sub-Gaussian deviation bound for P(+-S_n >= x V_n) under the
// moment-growth condition with scale epsilon. sharp <= simple always.
BoundResult bound_subgaussian(long long n, double x, double rho, double epsilon,
                              std::pair<double, double> v, double i1,
                              SubgaussianVariant variant);

// C(alpha, x) = 2 + 35 C1 (K^{2a}/(x^{2a} 4^{2-3a})
//                          + (4K^2/x^2)(3(1-a)/(2a))^{(1-a)/a}), K = K_{n-2}(rho).
double semiexp_constant_C(double alpha, double x, double rho, long long n, double c1);

// Semi-exponential bound for P(+-S_n >= n x):
// i2 = C(alpha, x) exp{-(x / (8 K_{n-2}))^{2 alpha} n^alpha}.
BoundResult bound_semiexp(long long n, double x, double rho, double alpha, double c1, double i1);

// Conditional semi-exponential bound for P(+-S_n >= n x):
// i2 = exp{-((xK^{-1}/2)^{1+a} / (2(1 + xK^{-1}/6))) n^a}
//      + (C1 + n C2) exp{-(xK^{-1}/2)^a n^a}.
BoundResult bound_semiexp_cond(long long n, double x, double rho, double alpha, double c1,
                               double c2, double i1);

// Fuk-Nagaev bound for P(+-S_n >= n x) under weak moments of order p + delta:
// i2 = exp{-((K^{-1}/2)^2 / (2(n^{-1/(p+d)} x^{-1} + K^{-1}/6))) (nx)^{d/(p+d)}}
//      + (C1 + C2) / (n^{p-1} x^p).
BoundResult bound_fuk_nagaev(long long n, double x, double rho, double p, double delta,
                             double c1, double c2, double i1);

// Weak von Bahr-Esseen bound, p in (1, 2), two-sided threshold a_n = 1:
// P(|S_n| >= x) <= 2 I1(1, x) + 2^p C_p B_p(n, rho) / x^p,
// C_p = 4p/(p-1) + 8/(2-p), B_p = sum_{k=2}^n K_{n-k}^p A_k(p).
BoundResult bound_weak_vbe(long long n, double x, double rho, double p,
                           const std::map<long long, double>& a_weak, double i1);

double weak_vbe_cp(double p);
double weak_vbe_bp(long long n, double p, double rho, const std::map<long long, double>& a_weak);

// Marcinkiewicz-Zygmund moment bound, p >= 2:
// ||S_n||_p <= sqrt(K_{n-1}^2 A_1(p)^{2/p} + (p-1) sum_k K_{n-k}^2 A_k(p)^{2/p}).
// `a` must contain k = 1 (initial term; 0 for fixed starts) and k = 2..n.
double moment_bound_mz(long long n, double p, double rho, const std::map<long long, double>& a);

// Rosenthal moment bound on ||S_n||_p^p, p >= 2:
// C_p (l_bracket + sum_{k=1}^n K_{n-k}^p A_k(p)) where l_bracket estimates
// E[(K_{n-1}^2 A_1(2) + sum_k K_{n-k}^2 L_k(X_{k-1}))^{p/2}].
double moment_bound_rosenthal(long long n, double p, double rho,
                              const std::map<long long, double>& a, double l_bracket, double cp);

// Documented default for Rosenthal's unspecified constant.
double rosenthal_default_cp(double p);

// von Bahr-Esseen moment bound on ||S_n||_p^p, p in (1, 2]:
// K_{n-1}^p A_1(p) + 2^{2-p} sum_{k=2}^n K_{n-k}^p A_k(p).
double moment_bound_vbe(long long n, double p, double rho, const std::map<long long, double>& a);

// Explicit-constant bound on ||S_n||_p^p for the scalar autoregression
// X_n = A_n X_{n-1} + B_n started at X_1 = 0, built by feeding the
// closed-form dominator moments into the MZ (p >= 2) or vBE (p in (1,2))
// route with K_{n-k} <= 1/(1-rho). The derived constant is returned.
struct GarMomentInputs {
  std::map<long long, double> x_norm;  // k -> ||X_{k-1}||_p, k = 2..n (x_norm[2] = 0)
  std::map<long long, double> a_norm;  // k -> ||A_k||_p
  std::map<long long, double> b_norm;  // k -> ||B_k||_p
};

struct GarCorollaryResult {
  double bound = 0.0;     // on ||S_n||_p^p
  double constant = 0.0;  // the derived C(p, rho)
  double bracket = 0.0;
};

GarCorollaryResult gar_corollary_moment(long long n, double p, double rho,
                                        const GarMomentInputs& moments);

}  // namespace chainbound
