#pragma once

#include <span>
#include <utility>
#include <vector>

namespace chainbound {

enum class MetricKind { absolute, norm_p, alpha_power };

// State-space metric. Three kinds:
//   absolute:    |x - x'| on scalar states,
//   norm_p:      l_q norm on vectors (q >= 1), optionally with positive
//                per-coordinate weights (q = 1 + weights covers the
//                lambda/count metric |l - l'| + a|z - z'| of the
//                GLM-GARCH family),
//   alpha_power: d^alpha for a base metric d and alpha in (0, 1].
//
// alpha_power is stored flattened (base kind + total exponent), so
// applying alpha then beta is exactly the same object as applying
// alpha*beta, and exponent 1 is literally the base metric.
class Metric {
 public:
  static Metric absolute();
  static Metric norm(double q);
  static Metric norm(double q, std::vector<double> weights);
  static Metric power(const Metric& base, double alpha);

  MetricKind kind() const {
    return exponent_ != 1.0 ? MetricKind::alpha_power : base_;
  }
  MetricKind base_kind() const { return base_; }
  double exponent() const { return exponent_; }
  double q() const { return q_; }
  const std::vector<double>& weights() const { return weights_; }

  double operator()(std::span<const double> a, std::span<const double> b) const;
  double operator()(double a, double b) const;

 private:
  MetricKind base_ = MetricKind::absolute;
  double q_ = 1.0;
  double exponent_ = 1.0;
  std::vector<double> weights_;
};

// Mean-contraction coefficient rho in [0, 1) together with where it came
// from. Construction rejects rho outside [0, 1).
struct ContractionCertificate {
  enum class Derivation { user_supplied, model_formula };

  double rho = 0.0;
  Derivation derivation = Derivation::user_supplied;
};

ContractionCertificate make_certificate(double rho,
                                        ContractionCertificate::Derivation derivation);

// K_k(rho) = 1 + rho + ... + rho^k, evaluated by the forward recurrence
// K_{m+1} = 1 + rho*K_m so that the recurrence holds bit-exactly.
// Monotone in k and bounded by 1/(1 - rho). Throws for rho outside [0, 1).
double k_rho(long long k, double rho);

// K_0(rho) ... K_n(rho) in one pass.
std::vector<double> k_rho_table(long long n, double rho);

// If d contracts at rho, d^alpha contracts at rho^alpha. Returns the
// transformed metric and its certificate. alpha must lie in (0, 1].
std::pair<Metric, ContractionCertificate> alpha_transform(const Metric& d, double alpha,
                                                          double rho);

}  // namespace chainbound
