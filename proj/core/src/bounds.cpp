#include "chainbound/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "chainbound/metric.hpp"

namespace chainbound {

namespace {

double map_at(const std::map<long long, double>& m, long long k, const char* what) {
  const auto it = m.find(k);
  if (it == m.end()) {
    throw std::invalid_argument(std::string("missing step moment ") + what + " at k=" +
                                std::to_string(k));
  }
  if (!(it->second >= 0.0)) {
    throw std::invalid_argument(std::string("negative moment ") + what + " at k=" +
                                std::to_string(k));
  }
  return it->second;
}

BoundResult finish_probability(BoundResult r, double i1, double i2) {
  r.i1 = i1;
  r.i2 = i2;
  const double raw = i1 + i2;
  r.clipped = raw > 1.0;
  r.value = std::min(1.0, raw);
  return r;
}

}  // namespace

const char* to_string(ThresholdConvention c) {
  switch (c) {
    case ThresholdConvention::vn_x:
      return "vn_x";
    case ThresholdConvention::n_x:
      return "n_x";
    case ThresholdConvention::raw_x:
      return "raw_x";
  }
  return "?";
}

double i1_term(const SampleSet& g_samples, double a_n, double x, long long n, double rho) {
  if (!(x > 0.0) || !(a_n > 0.0)) {
    throw std::domain_error("i1_term: a_n and x must be positive");
  }
  if (g_samples.values.empty()) {
    throw std::invalid_argument("i1_term: empty G sample set");
  }
  const double threshold = a_n * x / (2.0 * k_rho(n - 1, rho));
  std::size_t count = 0;
  for (double g : g_samples.values) {
    if (g >= threshold) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(g_samples.values.size());
}

double i1_markov_bound(double c3, double p, long long n, double x, double rho) {
  if (!(c3 >= 0.0)) {
    throw std::domain_error("i1_markov_bound: C3 must be nonnegative");
  }
  if (!(x > 0.0)) {
    throw std::domain_error("i1_markov_bound: x must be positive");
  }
  const double value = std::pow(2.0 * k_rho(n - 1, rho), p - 1.0) * c3 /
                       std::pow(static_cast<double>(n) * x, p - 1.0);
  return std::min(1.0, value);
}

std::pair<double, double> vn_sigma(const std::map<long long, double>& h2_moments, long long n,
                                   double rho) {
  if (n < 2) {
    throw std::invalid_argument("vn_sigma: n must be >= 2");
  }
  const auto ks = k_rho_table(n, rho);
  double v2 = 0.0;
  for (long long k = 2; k <= n; ++k) {
    const double kk = ks[static_cast<std::size_t>(n - k)];
    v2 += kk * kk * map_at(h2_moments, k, "E[H_k^2]");
  }
  return {v2, v2 / static_cast<double>(n)};
}

BoundResult bound_subgaussian(long long n, double x, double rho, double epsilon,
                              std::pair<double, double> v, double i1,
                              SubgaussianVariant variant) {
  if (!(x > 0.0) || !(epsilon > 0.0)) {
    throw std::domain_error("bound_subgaussian: x and epsilon must be positive");
  }
  BoundResult r;
  r.name = variant == SubgaussianVariant::sharp ? "subgaussian_sharp" : "subgaussian_simple";
  r.convention = ThresholdConvention::vn_x;
  const double kn2 = k_rho(n - 2, rho);
  const double sigma = std::sqrt(v.second);
  r.inputs_echo = {{"n", static_cast<double>(n)}, {"x", x},           {"rho", rho},
                   {"epsilon", epsilon},          {"V2", v.first},    {"sigma2", v.second},
                   {"K_n_minus_2", kn2},          {"i1", i1}};
  if (sigma == 0.0) {
    r.degenerate = true;
    r.i1 = i1;
    r.clipped = i1 > 1.0;
    r.value = std::min(1.0, i1);
    return r;
  }
  const double drift = x * epsilon * kn2 / sigma;
  const double quarter_x2 = 0.25 * x * x;
  double i2;
  if (variant == SubgaussianVariant::sharp) {
    i2 = std::exp(-quarter_x2 / (1.0 + std::sqrt(1.0 + drift) + 0.5 * drift));
  } else {
    i2 = std::exp(-quarter_x2 / (2.0 * (1.0 + 0.5 * drift)));
  }
  return finish_probability(std::move(r), i1, i2);
}

double semiexp_constant_C(double alpha, double x, double rho, long long n, double c1) {
  if (!(alpha > 0.0) || alpha >= 1.0) {
    throw std::domain_error("semiexp_constant_C: alpha must lie in (0, 1)");
  }
  if (!(x > 0.0)) {
    throw std::domain_error("semiexp_constant_C: x must be positive");
  }
  const double k = k_rho(n - 2, rho);
  const double term1 = std::pow(k, 2.0 * alpha) /
                       (std::pow(x, 2.0 * alpha) * std::pow(4.0, 2.0 - 3.0 * alpha));
  const double term2 = 4.0 * k * k / (x * x) *
                       std::pow(3.0 * (1.0 - alpha) / (2.0 * alpha), (1.0 - alpha) / alpha);
  return 2.0 + 35.0 * c1 * (term1 + term2);
}

BoundResult bound_semiexp(long long n, double x, double rho, double alpha, double c1,
                          double i1) {
  BoundResult r;
  r.name = "semi_exponential";
  r.convention = ThresholdConvention::n_x;
  const double k = k_rho(n - 2, rho);
  const double c = semiexp_constant_C(alpha, x, rho, n, c1);
  const double i2 =
      c * std::exp(-std::pow(x / (8.0 * k), 2.0 * alpha) * std::pow(static_cast<double>(n), alpha));
  r.inputs_echo = {{"n", static_cast<double>(n)}, {"x", x},     {"rho", rho},
                   {"alpha", alpha},              {"C1", c1},   {"C_alpha_x", c},
                   {"K_n_minus_2", k},            {"i1", i1}};
  return finish_probability(std::move(r), i1, i2);
}

BoundResult bound_semiexp_cond(long long n, double x, double rho, double alpha, double c1,
                               double c2, double i1) {
  if (!(alpha > 0.0) || alpha >= 1.0) {
    throw std::domain_error("bound_semiexp_cond: alpha must lie in (0, 1)");
  }
  if (!(x > 0.0)) {
    throw std::domain_error("bound_semiexp_cond: x must be positive");
  }
  BoundResult r;
  r.name = "semi_exponential_conditional";
  r.convention = ThresholdConvention::n_x;
  const double kinv = 1.0 / k_rho(n - 2, rho);
  const double na = std::pow(static_cast<double>(n), alpha);
  const double half = 0.5 * x * kinv;
  const double term1 = std::exp(-std::pow(half, 1.0 + alpha) / (2.0 * (1.0 + x * kinv / 6.0)) * na);
  const double term2 = (c1 + static_cast<double>(n) * c2) * std::exp(-std::pow(half, alpha) * na);
  r.inputs_echo = {{"n", static_cast<double>(n)}, {"x", x},   {"rho", rho}, {"alpha", alpha},
                   {"C1", c1},                    {"C2", c2}, {"i1", i1}};
  return finish_probability(std::move(r), i1, term1 + term2);
}

BoundResult bound_fuk_nagaev(long long n, double x, double rho, double p, double delta,
                             double c1, double c2, double i1) {
  if (!(p >= 2.0)) {
    throw std::domain_error("bound_fuk_nagaev: p must be >= 2");
  }
  if (!(delta > 0.0) || !(x > 0.0)) {
    throw std::domain_error("bound_fuk_nagaev: delta and x must be positive");
  }
  BoundResult r;
  r.name = "fuk_nagaev";
  r.convention = ThresholdConvention::n_x;
  const double kinv = 1.0 / k_rho(n - 2, rho);
  const double nd = static_cast<double>(n);
  const double exp_term =
      std::exp(-0.25 * kinv * kinv /
               (2.0 * (std::pow(nd, -1.0 / (p + delta)) / x + kinv / 6.0)) *
               std::pow(nd * x, delta / (p + delta)));
  const double poly_term = (c1 + c2) / (std::pow(nd, p - 1.0) * std::pow(x, p));
  r.inputs_echo = {{"n", nd},  {"x", x},   {"rho", rho}, {"p", p},
                   {"delta", delta}, {"C1", c1}, {"C2", c2},   {"i1", i1},
                   {"exp_term", exp_term}, {"poly_term", poly_term}};
  return finish_probability(std::move(r), i1, exp_term + poly_term);
}

double weak_vbe_cp(double p) {
  if (!(p > 1.0) || !(p < 2.0)) {
    throw std::domain_error("weak_vbe_cp: p must lie strictly in (1, 2)");
  }
  return 4.0 * p / (p - 1.0) + 8.0 / (2.0 - p);
}

double weak_vbe_bp(long long n, double p, double rho,
                   const std::map<long long, double>& a_weak) {
  const auto ks = k_rho_table(n, rho);
  double bp = 0.0;
  for (long long k = 2; k <= n; ++k) {
    bp += std::pow(ks[static_cast<std::size_t>(n - k)], p) * map_at(a_weak, k, "A_k(p)");
  }
  return bp;
}

BoundResult bound_weak_vbe(long long n, double x, double rho, double p,
                           const std::map<long long, double>& a_weak, double i1) {
  if (!(p > 1.0) || !(p < 2.0)) {
    throw std::domain_error("bound_weak_vbe: p must lie strictly in (1, 2)");
  }
  if (!(x > 0.0)) {
    throw std::domain_error("bound_weak_vbe: x must be positive");
  }
  BoundResult r;
  r.name = "weak_von_bahr_esseen";
  r.convention = ThresholdConvention::raw_x;
  const auto ks = k_rho_table(n, rho);
  double bp = 0.0;
  for (long long k = 2; k <= n; ++k) {
    bp += std::pow(ks[static_cast<std::size_t>(n - k)], p) * map_at(a_weak, k, "A_k(p)");
  }
  const double cp = weak_vbe_cp(p);
  const double i2 = std::pow(2.0, p) * cp * bp / std::pow(x, p);
  r.inputs_echo = {{"n", static_cast<double>(n)}, {"x", x},   {"rho", rho}, {"p", p},
                   {"C_p", cp},                   {"B_p", bp}, {"i1", i1}};
  return finish_probability(std::move(r), 2.0 * i1, i2);
}

double moment_bound_mz(long long n, double p, double rho, const std::map<long long, double>& a) {
  if (!(p >= 2.0)) {
    throw std::domain_error("moment_bound_mz: p must be >= 2");
  }
  const auto ks = k_rho_table(n, rho);
  const double kn1 = ks[static_cast<std::size_t>(n - 1)];
  double ap = kn1 * kn1 * std::pow(map_at(a, 1, "A_1(p)"), 2.0 / p);
  for (long long k = 2; k <= n; ++k) {
    const double kk = ks[static_cast<std::size_t>(n - k)];
    ap += (p - 1.0) * kk * kk * std::pow(map_at(a, k, "A_k(p)"), 2.0 / p);
  }
  return std::sqrt(ap);
}

double moment_bound_rosenthal(long long n, double p, double rho,
                              const std::map<long long, double>& a, double l_bracket,
                              double cp) {
  if (!(p >= 2.0)) {
    throw std::domain_error("moment_bound_rosenthal: p must be >= 2");
  }
  if (!(l_bracket >= 0.0) || !(cp > 0.0)) {
    throw std::domain_error("moment_bound_rosenthal: bracket must be >= 0 and C_p > 0");
  }
  const auto ks = k_rho_table(n, rho);
  double tail = 0.0;
  for (long long k = 1; k <= n; ++k) {
    tail += std::pow(ks[static_cast<std::size_t>(n - k)], p) * map_at(a, k, "A_k(p)");
  }
  return cp * (l_bracket + tail);
}

double rosenthal_default_cp(double p) {
  return std::pow(2.0, p) * std::pow(p, p);
}

double moment_bound_vbe(long long n, double p, double rho, const std::map<long long, double>& a) {
  if (!(p > 1.0) || p > 2.0) {
    throw std::domain_error("moment_bound_vbe: p must lie in (1, 2]");
  }
  const auto ks = k_rho_table(n, rho);
  double ap = std::pow(ks[static_cast<std::size_t>(n - 1)], p) * map_at(a, 1, "A_1(p)");
  const double c = std::pow(2.0, 2.0 - p);
  for (long long k = 2; k <= n; ++k) {
    ap += c * std::pow(ks[static_cast<std::size_t>(n - k)], p) * map_at(a, k, "A_k(p)");
  }
  return ap;
}

GarCorollaryResult gar_corollary_moment(long long n, double p, double rho,
                                        const GarMomentInputs& moments) {
  if (!(p > 1.0)) {
    throw std::domain_error("gar_corollary_moment: p must be > 1");
  }
  if (n < 2) {
    throw std::invalid_argument("gar_corollary_moment: n must be >= 2");
  }
  if (map_at(moments.x_norm, 2, "||X_1||_p") != 0.0) {
    throw std::invalid_argument("gar_corollary_moment: requires a fixed start X_1 = 0");
  }
  const double contraction_factor = 1.0 / (1.0 - rho);
  GarCorollaryResult out;
  if (p >= 2.0) {
    double bracket = 0.0;
    for (long long k = 3; k <= n; ++k) {
      const double xa = map_at(moments.x_norm, k, "||X_{k-1}||_p") *
                        map_at(moments.a_norm, k, "||A_k||_p");
      bracket += xa * xa;
    }
    for (long long k = 2; k <= n; ++k) {
      const double b = map_at(moments.b_norm, k, "||B_k||_p");
      bracket += b * b;
    }
    const double c = std::pow((p - 1.0) * std::pow(4.0, 2.0 * (p - 1.0) / p) *
                                  contraction_factor * contraction_factor,
                              0.5 * p);
    out.bound = c * std::pow(bracket, 0.5 * p);
    out.constant = c;
    out.bracket = bracket;
    return out;
  }
  double bracket = 0.0;
  for (long long k = 3; k <= n; ++k) {
    bracket += std::pow(map_at(moments.x_norm, k, "||X_{k-1}||_p"), p) *
               std::pow(map_at(moments.a_norm, k, "||A_k||_p"), p);
  }
  for (long long k = 2; k <= n; ++k) {
    bracket += std::pow(map_at(moments.b_norm, k, "||B_k||_p"), p);
  }
  const double c = std::pow(2.0, p) * std::pow(contraction_factor, p);
  out.bound = c * bracket;
  out.constant = c;
  out.bracket = bracket;
  return out;
}

}  // namespace chainbound
