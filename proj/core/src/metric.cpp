#include "chainbound/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace chainbound {

Metric Metric::absolute() {
  return Metric{};
}

Metric Metric::norm(double q) {
  return norm(q, {});
}

Metric Metric::norm(double q, std::vector<double> weights) {
  if (q < 1.0) {
    throw std::domain_error("Metric::norm: q must be >= 1");
  }
  for (double w : weights) {
    if (w <= 0.0) {
      throw std::domain_error("Metric::norm: weights must be positive");
    }
  }
  Metric m;
  m.base_ = MetricKind::norm_p;
  m.q_ = q;
  m.weights_ = std::move(weights);
  return m;
}

Metric Metric::power(const Metric& base, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::domain_error("Metric::power: alpha must lie in (0, 1]");
  }
  Metric m = base;
  m.exponent_ = base.exponent_ * alpha;
  return m;
}

double Metric::operator()(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) {
    throw std::invalid_argument("Metric: dimension mismatch");
  }
  double d = 0.0;
  switch (base_) {
    case MetricKind::absolute:
      if (a.size() != 1) {
        throw std::invalid_argument("Metric::absolute expects scalar states");
      }
      d = std::fabs(a[0] - b[0]);
      break;
    case MetricKind::norm_p: {
      if (!weights_.empty() && weights_.size() != a.size()) {
        throw std::invalid_argument("Metric: weight count does not match dimension");
      }
      if (q_ == 1.0) {
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double w = weights_.empty() ? 1.0 : weights_[i];
          d += w * std::fabs(a[i] - b[i]);
        }
      } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double w = weights_.empty() ? 1.0 : weights_[i];
          acc += std::pow(w * std::fabs(a[i] - b[i]), q_);
        }
        d = std::pow(acc, 1.0 / q_);
      }
      break;
    }
    case MetricKind::alpha_power:
      break;  // unreachable: exponent is carried separately
  }
  return exponent_ == 1.0 ? d : std::pow(d, exponent_);
}

double Metric::operator()(double a, double b) const {
  const double xa[1] = {a};
  const double xb[1] = {b};
  return (*this)(std::span<const double>(xa, 1), std::span<const double>(xb, 1));
}

ContractionCertificate make_certificate(double rho,
                                        ContractionCertificate::Derivation derivation) {
  if (!(rho >= 0.0) || rho >= 1.0) {
    throw std::domain_error("ContractionCertificate: rho must lie in [0, 1)");
  }
  return ContractionCertificate{rho, derivation};
}

double k_rho(long long k, double rho) {
  if (!(rho >= 0.0) || rho >= 1.0) {
    throw std::domain_error("k_rho: rho must lie in [0, 1)");
  }
  if (k < 0) {
    throw std::domain_error("k_rho: k must be nonnegative");
  }
  double value = 1.0;
  for (long long i = 0; i < k; ++i) {
    value = 1.0 + rho * value;
  }
  return value;
}

std::vector<double> k_rho_table(long long n, double rho) {
  if (!(rho >= 0.0) || rho >= 1.0) {
    throw std::domain_error("k_rho_table: rho must lie in [0, 1)");
  }
  if (n < 0) {
    throw std::domain_error("k_rho_table: n must be nonnegative");
  }
  std::vector<double> table(static_cast<std::size_t>(n) + 1);
  table[0] = 1.0;
  for (long long i = 1; i <= n; ++i) {
    table[static_cast<std::size_t>(i)] = 1.0 + rho * table[static_cast<std::size_t>(i - 1)];
  }
  return table;
}

std::pair<Metric, ContractionCertificate> alpha_transform(const Metric& d, double alpha,
                                                          double rho) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::domain_error("alpha_transform: alpha must lie in (0, 1]");
  }
  if (!(rho >= 0.0) || rho >= 1.0) {
    throw std::domain_error("alpha_transform: rho must lie in [0, 1)");
  }
  return {Metric::power(d, alpha),
          make_certificate(std::pow(rho, alpha),
                           ContractionCertificate::Derivation::model_formula)};
}

}  // namespace chainbound
