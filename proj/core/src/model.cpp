#include "chainbound/model.hpp"

#include <algorithm>
#include <cmath>

namespace chainbound {

namespace {

bool nonneg_integer_law(const ScalarLaw& law) {
  switch (law.kind) {
    case LawKind::bernoulli:
    case LawKind::poisson:
      return true;
    case LawKind::point_mass:
      return law.a >= 0.0 && law.a == std::floor(law.a);
    case LawKind::choice:
      return std::all_of(law.support.begin(), law.support.end(),
                         [](double v) { return v >= 0.0 && v == std::floor(v); });
    default:
      return false;
  }
}

void require_nonempty(const Schedule<double>& s, const char* what) {
  if (s.empty()) throw std::invalid_argument(std::string("empty schedule: ") + what);
}

void require_nonempty(const Schedule<ScalarLaw>& s, const char* what) {
  if (s.empty()) throw std::invalid_argument(std::string("empty schedule: ") + what);
}

template <typename... S>
std::size_t rows_needed(const S&... scheds) {
  return std::max({scheds.table_size()...});
}

long long as_count_state(double x) {
  if (!(x >= 0.0) || x != std::floor(x)) {
    throw ModelError("count state must be a nonnegative integer");
  }
  return static_cast<long long>(x);
}

double offspring_sum(const ScalarLaw& law, long long count, Stream& stream) {
  if (count == 0) return 0.0;
  if (count > (1LL << 24)) {
    throw ModelError("INAR state exploded; offspring sum too large");
  }
  if (law.kind == LawKind::poisson) {
    return static_cast<double>(stream.poisson(law.a * static_cast<double>(count)));
  }
  if (law.kind == LawKind::point_mass) {
    return law.a * static_cast<double>(count);
  }
  double sum = 0.0;
  for (long long i = 0; i < count; ++i) {
    sum += law.sample(stream);
  }
  return sum;
}

double glm_intensity(const GlmPoissonParams& p, long long k, double x) {
  const double t = p.intercept.at(k) + p.slope.at(k) * x;
  if (!(t >= 0.0)) {
    throw ModelError("GLM-Poisson intensity is negative");
  }
  return t;
}

double glm_garch_intensity(const GlmGarchParams& p, long long k, double lambda, double z) {
  const double t = p.intercept.at(k) + p.lambda_coef.at(k) * lambda + p.count_coef.at(k) * z;
  if (!(t >= 0.0)) {
    throw ModelError("GLM-GARCH intensity is negative");
  }
  return t;
}

double arch_scale(double a, double b, double x) { return std::sqrt(a * a * x * x + b * b); }

// E|c - s*Y| for Y ~ law and s >= 0.
double scaled_mad(const ScalarLaw& law, double s, double c) {
  if (s == 0.0) return std::fabs(c);
  return s * law.mean_abs_dev(c / s);
}

std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g) {
  std::vector<double> out(f.size() + g.size() - 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    for (std::size_t j = 0; j < g.size(); ++j) {
      out[i + j] += f[i] * g[j];
    }
  }
  return out;
}

}  // namespace

int ChainModel::state_dim() const {
  switch (family) {
    case Family::arch:
    case Family::switching_arch:
    case Family::inar1:
    case Family::glm_poisson:
      return 1;
    case Family::gar:
      return as<GarParams>().dim;
    case Family::glm_garch_poisson:
      return 2;
    case Family::generic:
      return as<GenericParams>().dim;
  }
  return 1;
}

ChainModel make_arch(Schedule<double> a, Schedule<double> b, Schedule<ScalarLaw> noise,
                     ScalarLaw initial) {
  require_nonempty(a, "arch a");
  require_nonempty(b, "arch b");
  require_nonempty(noise, "arch noise");
  ChainModel m;
  m.family = Family::arch;
  m.params = ArchParams{std::move(a), std::move(b), std::move(noise)};
  m.metric = Metric::absolute();
  m.initial = {std::move(initial)};
  return m;
}

ChainModel make_switching(Schedule<double> a, Schedule<double> b, Schedule<double> a2,
                          Schedule<double> b2, Schedule<ScalarLaw> noise1,
                          Schedule<double> switch_q, ScalarLaw initial) {
  require_nonempty(a, "switching a");
  require_nonempty(b, "switching b");
  require_nonempty(a2, "switching a'");
  require_nonempty(b2, "switching b'");
  require_nonempty(noise1, "switching noise");
  require_nonempty(switch_q, "switching q");
  for (double q : switch_q.rows) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("switching q outside [0, 1]");
    }
  }
  ChainModel m;
  m.family = Family::switching_arch;
  m.params = SwitchingParams{std::move(a),      std::move(b),        std::move(a2),
                             std::move(b2),     std::move(noise1),   std::move(switch_q)};
  m.metric = Metric::absolute();
  m.initial = {std::move(initial)};
  return m;
}

ChainModel make_gar(Schedule<ScalarLaw> multiplier, Schedule<ScalarLaw> offset,
                    ScalarLaw initial) {
  require_nonempty(multiplier, "gar multiplier");
  require_nonempty(offset, "gar offset");
  ChainModel m;
  m.family = Family::gar;
  m.params = GarParams{1, std::move(multiplier), std::move(offset)};
  m.metric = Metric::absolute();
  m.initial = {std::move(initial)};
  return m;
}

ChainModel make_gar_vector(int dim, Schedule<ScalarLaw> multiplier, Schedule<ScalarLaw> offset,
                           std::vector<ScalarLaw> initial, double norm_q) {
  if (dim < 1) throw std::invalid_argument("gar dim must be >= 1");
  if (static_cast<int>(initial.size()) != dim) {
    throw std::invalid_argument("gar initial law count must match dim");
  }
  require_nonempty(multiplier, "gar multiplier");
  require_nonempty(offset, "gar offset");
  ChainModel m;
  m.family = Family::gar;
  m.params = GarParams{dim, std::move(multiplier), std::move(offset)};
  m.metric = dim == 1 ? Metric::absolute() : Metric::norm(norm_q);
  m.initial = std::move(initial);
  return m;
}

ChainModel make_inar1(Schedule<ScalarLaw> immigration, Schedule<ScalarLaw> offspring,
                      ScalarLaw initial) {
  require_nonempty(immigration, "inar immigration");
  require_nonempty(offspring, "inar offspring");
  for (const auto& law : immigration.rows) {
    if (!nonneg_integer_law(law)) {
      throw std::invalid_argument("INAR immigration law must be nonnegative integer valued");
    }
  }
  for (const auto& law : offspring.rows) {
    if (!nonneg_integer_law(law)) {
      throw std::invalid_argument("INAR offspring law must be nonnegative integer valued");
    }
  }
  if (!nonneg_integer_law(initial)) {
    throw std::invalid_argument("INAR initial law must be nonnegative integer valued");
  }
  ChainModel m;
  m.family = Family::inar1;
  m.params = Inar1Params{std::move(immigration), std::move(offspring)};
  m.metric = Metric::absolute();
  m.initial = {std::move(initial)};
  return m;
}

ChainModel make_glm_poisson(Schedule<double> intercept, Schedule<double> slope,
                            ScalarLaw initial) {
  require_nonempty(intercept, "glm intercept");
  require_nonempty(slope, "glm slope");
  for (double c : intercept.rows) {
    if (!(c >= 0.0)) throw std::invalid_argument("GLM intercept must be nonnegative");
  }
  for (double r : slope.rows) {
    if (!(r >= 0.0)) throw std::invalid_argument("GLM slope must be nonnegative");
  }
  if (!nonneg_integer_law(initial)) {
    throw std::invalid_argument("GLM-Poisson initial law must be nonnegative integer valued");
  }
  ChainModel m;
  m.family = Family::glm_poisson;
  m.params = GlmPoissonParams{std::move(intercept), std::move(slope)};
  m.metric = Metric::absolute();
  m.initial = {std::move(initial)};
  return m;
}

ChainModel make_glm_garch(Schedule<double> intercept, Schedule<double> lambda_coef,
                          Schedule<double> count_coef, double weight,
                          std::vector<ScalarLaw> initial) {
  require_nonempty(intercept, "glm-garch intercept");
  require_nonempty(lambda_coef, "glm-garch lambda coef");
  require_nonempty(count_coef, "glm-garch count coef");
  if (!(weight > 0.0)) throw std::invalid_argument("glm-garch weight must be positive");
  if (initial.size() != 2) {
    throw std::invalid_argument("glm-garch initial needs (lambda, count) laws");
  }
  for (double c : intercept.rows) {
    if (!(c >= 0.0)) throw std::invalid_argument("GLM-GARCH intercept must be nonnegative");
  }
  for (double c : lambda_coef.rows) {
    if (!(c >= 0.0)) throw std::invalid_argument("GLM-GARCH lambda coef must be nonnegative");
  }
  for (double c : count_coef.rows) {
    if (!(c >= 0.0)) throw std::invalid_argument("GLM-GARCH count coef must be nonnegative");
  }
  ChainModel m;
  m.family = Family::glm_garch_poisson;
  m.params = GlmGarchParams{std::move(intercept), std::move(lambda_coef),
                            std::move(count_coef), weight};
  m.metric = Metric::norm(1.0, {1.0, weight});
  m.initial = std::move(initial);
  return m;
}

ChainModel make_generic(GenericParams params, Metric metric, std::vector<ScalarLaw> initial) {
  if (!params.step) throw std::invalid_argument("generic family needs a step function");
  if (static_cast<int>(initial.size()) != params.dim) {
    throw std::invalid_argument("generic initial law count must match dim");
  }
  if (!(params.rho >= 0.0) || params.rho >= 1.0) {
    throw NonContractiveError("generic family certificate must lie in [0, 1)");
  }
  ChainModel m;
  m.family = Family::generic;
  m.metric = std::move(metric);
  m.initial = std::move(initial);
  m.user_rho = params.rho;
  m.params = std::move(params);
  return m;
}

ChainModel with_alpha_metric(const ChainModel& model, double alpha) {
  ChainModel out = model;
  out.metric = Metric::power(model.metric, alpha);
  return out;
}

void draw_initial(const ChainModel& model, Stream& stream, std::span<double> out) {
  const auto dim = static_cast<std::size_t>(model.state_dim());
  if (out.size() != dim) throw std::invalid_argument("draw_initial: bad output span");
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = model.initial[i].sample(stream);
  }
}

StepDraw sample_step_draw(const ChainModel& model, long long k, std::span<const double> x,
                          Stream& stream) {
  switch (model.family) {
    case Family::arch: {
      const auto& p = model.as<ArchParams>();
      return {p.noise.at(k).sample(stream), 0.0};
    }
    case Family::switching_arch: {
      const auto& p = model.as<SwitchingParams>();
      const double e1 = p.noise1.at(k).sample(stream);
      const double e2 = stream.bernoulli(p.switch_q.at(k)) ? 1.0 : 0.0;
      return {e1, e2};
    }
    case Family::gar: {
      const auto& p = model.as<GarParams>();
      if (p.dim != 1) {
        throw std::invalid_argument("sample_step_draw: vector GAR has no scalar draw");
      }
      const double a = p.multiplier.at(k).sample(stream);
      const double b = p.offset.at(k).sample(stream);
      return {a, b};
    }
    case Family::inar1: {
      const auto& p = model.as<Inar1Params>();
      const long long count = as_count_state(x[0]);
      const double imm = p.immigration.at(k).sample(stream);
      const double off = offspring_sum(p.offspring.at(k), count, stream);
      return {imm, off};
    }
    case Family::glm_poisson: {
      const auto& p = model.as<GlmPoissonParams>();
      const double t = glm_intensity(p, k, x[0]);
      return {static_cast<double>(stream.poisson(t)), 0.0};
    }
    case Family::glm_garch_poisson: {
      const auto& p = model.as<GlmGarchParams>();
      const double t = glm_garch_intensity(p, k, x[0], x[1]);
      return {static_cast<double>(stream.poisson(t)), 0.0};
    }
    case Family::generic:
      throw std::invalid_argument("sample_step_draw: generic family has no scalar draw");
  }
  return {};
}

void apply_step_draw(const ChainModel& model, long long k, std::span<const double> x,
                     const StepDraw& draw, std::span<double> out) {
  switch (model.family) {
    case Family::arch: {
      const auto& p = model.as<ArchParams>();
      out[0] = arch_scale(p.a.at(k), p.b.at(k), x[0]) * draw.u;
      return;
    }
    case Family::switching_arch: {
      const auto& p = model.as<SwitchingParams>();
      const double s = draw.v != 0.0 ? arch_scale(p.a.at(k), p.b.at(k), x[0])
                                     : arch_scale(p.a2.at(k), p.b2.at(k), x[0]);
      out[0] = s * draw.u;
      return;
    }
    case Family::gar: {
      out[0] = draw.u * x[0] + draw.v;
      return;
    }
    case Family::inar1: {
      as_count_state(x[0]);
      out[0] = draw.u + draw.v;
      return;
    }
    case Family::glm_poisson: {
      const auto& p = model.as<GlmPoissonParams>();
      glm_intensity(p, k, x[0]);  // validates
      out[0] = draw.u;
      return;
    }
    case Family::glm_garch_poisson: {
      const auto& p = model.as<GlmGarchParams>();
      out[0] = glm_garch_intensity(p, k, x[0], x[1]);
      out[1] = draw.u;
      return;
    }
    case Family::generic:
      throw std::invalid_argument("apply_step_draw: generic family has no scalar draw");
  }
}

void step(const ChainModel& model, long long k, std::span<const double> x, Stream& stream,
          std::span<double> out) {
  if (model.family == Family::gar && model.as<GarParams>().dim > 1) {
    const auto& p = model.as<GarParams>();
    const double a = p.multiplier.at(k).sample(stream);
    const auto& off = p.offset.at(k);
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] = a * x[i] + off.sample(stream);
    }
    return;
  }
  if (model.family == Family::generic) {
    model.as<GenericParams>().step(k, x, stream, out);
    return;
  }
  const StepDraw draw = sample_step_draw(model, k, x, stream);
  apply_step_draw(model, k, x, draw, out);
}

void step_pair(const ChainModel& model, long long k, std::span<const double> x,
               std::span<const double> x2, Stream& stream, std::span<double> out,
               std::span<double> out2) {
  switch (model.family) {
    case Family::arch:
    case Family::switching_arch: {
      const StepDraw draw = sample_step_draw(model, k, x, stream);
      apply_step_draw(model, k, x, draw, out);
      apply_step_draw(model, k, x2, draw, out2);
      return;
    }
    case Family::gar: {
      const auto& p = model.as<GarParams>();
      if (p.dim == 1) {
        const StepDraw draw = sample_step_draw(model, k, x, stream);
        apply_step_draw(model, k, x, draw, out);
        apply_step_draw(model, k, x2, draw, out2);
        return;
      }
      const double a = p.multiplier.at(k).sample(stream);
      const auto& off = p.offset.at(k);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double b = off.sample(stream);
        out[i] = a * x[i] + b;
        out2[i] = a * x2[i] + b;
      }
      return;
    }
    case Family::inar1: {
      // The shared noise is the whole offspring sequence: both states sum
      // a prefix of the same draws.
      const auto& p = model.as<Inar1Params>();
      const long long c1 = as_count_state(x[0]);
      const long long c2 = as_count_state(x2[0]);
      const double imm = p.immigration.at(k).sample(stream);
      const auto& off = p.offspring.at(k);
      double s1 = 0.0;
      double s2 = 0.0;
      const long long hi = std::max(c1, c2);
      if (hi > (1LL << 24)) {
        throw ModelError("INAR state exploded; offspring sum too large");
      }
      for (long long i = 1; i <= hi; ++i) {
        const double e = off.sample(stream);
        if (i <= c1) s1 += e;
        if (i <= c2) s2 += e;
      }
      out[0] = imm + s1;
      out2[0] = imm + s2;
      return;
    }
    case Family::glm_poisson: {
      // Shared unit Poisson process evaluated at two intensities: the count
      // at the smaller intensity plus an independent increment.
      const auto& p = model.as<GlmPoissonParams>();
      const double t1 = glm_intensity(p, k, x[0]);
      const double t2 = glm_intensity(p, k, x2[0]);
      const double lo = std::min(t1, t2);
      const long long n_lo = stream.poisson(lo);
      const long long n_hi = n_lo + stream.poisson(std::max(t1, t2) - lo);
      out[0] = static_cast<double>(t1 <= t2 ? n_lo : n_hi);
      out2[0] = static_cast<double>(t1 <= t2 ? n_hi : n_lo);
      return;
    }
    case Family::glm_garch_poisson: {
      const auto& p = model.as<GlmGarchParams>();
      const double t1 = glm_garch_intensity(p, k, x[0], x[1]);
      const double t2 = glm_garch_intensity(p, k, x2[0], x2[1]);
      const double lo = std::min(t1, t2);
      const long long n_lo = stream.poisson(lo);
      const long long n_hi = n_lo + stream.poisson(std::max(t1, t2) - lo);
      out[0] = t1;
      out[1] = static_cast<double>(t1 <= t2 ? n_lo : n_hi);
      out2[0] = t2;
      out2[1] = static_cast<double>(t1 <= t2 ? n_hi : n_lo);
      return;
    }
    case Family::generic: {
      // Replay the same stream state for both branches.
      Stream replay = stream;
      model.as<GenericParams>().step(k, x, stream, out);
      model.as<GenericParams>().step(k, x2, replay, out2);
      return;
    }
  }
}

ContractionCertificate contraction_certificate(const ChainModel& model) {
  double rho = 0.0;
  switch (model.family) {
    case Family::arch: {
      const auto& p = model.as<ArchParams>();
      const auto span = rows_needed(p.a, p.noise);
      for (std::size_t i = 0; i < span; ++i) {
        const long long k = static_cast<long long>(i) + 2;
        rho = std::max(rho, std::fabs(p.a.at(k)) * p.noise.at(k).abs_moment(1.0));
      }
      break;
    }
    case Family::switching_arch: {
      const auto& p = model.as<SwitchingParams>();
      const auto span = rows_needed(p.a, p.a2, p.noise1, p.switch_q);
      for (std::size_t i = 0; i < span; ++i) {
        const long long k = static_cast<long long>(i) + 2;
        const double q = p.switch_q.at(k);
        const double mix = q * std::fabs(p.a.at(k)) + (1.0 - q) * std::fabs(p.a2.at(k));
        rho = std::max(rho, mix * p.noise1.at(k).abs_moment(1.0));
      }
      break;
    }
    case Family::gar: {
      const auto& p = model.as<GarParams>();
      for (std::size_t i = 0; i < p.multiplier.table_size(); ++i) {
        const long long k = static_cast<long long>(i) + 2;
        rho = std::max(rho, p.multiplier.at(k).abs_moment(1.0));
      }
      break;
    }
    case Family::inar1: {
      const auto& p = model.as<Inar1Params>();
      for (std::size_t i = 0; i < p.offspring.table_size(); ++i) {
        const long long k = static_cast<long long>(i) + 2;
        rho = std::max(rho, p.offspring.at(k).mean());
      }
      break;
    }
    case Family::glm_poisson: {
      const auto& p = model.as<GlmPoissonParams>();
      for (double r : p.slope.rows) {
        rho = std::max(rho, r);
      }
      break;
    }
    case Family::glm_garch_poisson: {
      const auto& p = model.as<GlmGarchParams>();
      const auto span = rows_needed(p.lambda_coef, p.count_coef);
      for (std::size_t i = 0; i < span; ++i) {
        const long long k = static_cast<long long>(i) + 2;
        const double lips = std::max(p.lambda_coef.at(k), p.count_coef.at(k) / p.weight);
        rho = std::max(rho, lips * (1.0 + p.weight));
      }
      break;
    }
    case Family::generic: {
      if (!model.user_rho) {
        throw std::invalid_argument("generic model carries no certificate");
      }
      rho = *model.user_rho;
      break;
    }
  }
  rho = std::pow(rho, model.metric.exponent());
  if (rho >= 1.0) {
    throw NonContractiveError("family formula gives rho >= 1");
  }
  return make_certificate(rho, ContractionCertificate::Derivation::model_formula);
}

double certified_rho(const ChainModel& model) {
  if (model.user_rho) {
    return std::pow(*model.user_rho, model.metric.exponent());
  }
  return contraction_certificate(model).rho;
}

bool has_closed_form_H(const ChainModel& model, long long k) {
  if (model.metric.exponent() != 1.0) {
    return false;
  }
  switch (model.family) {
    case Family::arch:
      return model.as<ArchParams>().noise.at(k).has_mean_abs_dev();
    case Family::switching_arch:
      return model.as<SwitchingParams>().noise1.at(k).has_mean_abs_dev();
    case Family::gar: {
      const auto& p = model.as<GarParams>();
      if (p.dim != 1) return false;
      const auto& a = p.multiplier.at(k);
      const auto& b = p.offset.at(k);
      const bool a_point = a.kind == LawKind::point_mass;
      const bool b_point = b.kind == LawKind::point_mass;
      if (a_point && b_point) return true;
      if (a_point) return b.has_mean_abs_dev();
      if (b_point) return a.has_mean_abs_dev();
      return false;
    }
    case Family::inar1: {
      const auto& p = model.as<Inar1Params>();
      return !discrete_pmf(p.immigration.at(k)).empty() &&
             !discrete_pmf(p.offspring.at(k)).empty();
    }
    case Family::glm_poisson:
    case Family::glm_garch_poisson:
      return true;
    case Family::generic:
      return false;
  }
  return false;
}

double closed_form_H(const ChainModel& model, long long k, std::span<const double> x,
                     const StepDraw& draw) {
  switch (model.family) {
    case Family::arch: {
      const auto& p = model.as<ArchParams>();
      return arch_scale(p.a.at(k), p.b.at(k), x[0]) * p.noise.at(k).mean_abs_dev(draw.u);
    }
    case Family::switching_arch: {
      const auto& p = model.as<SwitchingParams>();
      const double s1 = arch_scale(p.a.at(k), p.b.at(k), x[0]);
      const double s0 = arch_scale(p.a2.at(k), p.b2.at(k), x[0]);
      const double c = (draw.v != 0.0 ? s1 : s0) * draw.u;
      const double q = p.switch_q.at(k);
      const auto& law = p.noise1.at(k);
      return q * scaled_mad(law, s1, c) + (1.0 - q) * scaled_mad(law, s0, c);
    }
    case Family::gar: {
      const auto& p = model.as<GarParams>();
      const auto& a = p.multiplier.at(k);
      const auto& b = p.offset.at(k);
      const bool a_point = a.kind == LawKind::point_mass;
      const bool b_point = b.kind == LawKind::point_mass;
      if (a_point && b_point) return 0.0;
      if (a_point) return b.mean_abs_dev(draw.v);
      if (b_point) return std::fabs(x[0]) * a.mean_abs_dev(draw.u);
      throw std::invalid_argument("closed_form_H: GAR needs a point-mass component");
    }
    case Family::inar1: {
      const auto& p = model.as<Inar1Params>();
      const long long count = as_count_state(x[0]);
      auto pmf = discrete_pmf(p.immigration.at(k));
      if (count > 0) {
        const auto off = pmf_of_sum(p.offspring.at(k), count);
        if (off.empty()) {
          throw std::invalid_argument("closed_form_H: INAR offspring sum pmf unavailable");
        }
        pmf = convolve(pmf, off);
      }
      return mean_abs_dev_pmf(pmf, draw.u + draw.v);
    }
    case Family::glm_poisson: {
      const auto& p = model.as<GlmPoissonParams>();
      const double t = glm_intensity(p, k, x[0]);
      return ScalarLaw::poisson(t).mean_abs_dev(draw.u);
    }
    case Family::glm_garch_poisson: {
      const auto& p = model.as<GlmGarchParams>();
      const double t = glm_garch_intensity(p, k, x[0], x[1]);
      return p.weight * ScalarLaw::poisson(t).mean_abs_dev(draw.u);
    }
    case Family::generic:
      throw std::invalid_argument("closed_form_H: generic family has no closed form");
  }
  return 0.0;
}

double hk_moment_upper(const ChainModel& model, long long k, double p,
                       const StateMoments& moments) {
  if (!(p >= 1.0)) {
    throw std::domain_error("hk_moment_upper: p must be >= 1");
  }
  const auto need = [](const std::optional<double>& v, const char* what) {
    if (!v) {
      throw std::invalid_argument(std::string("hk_moment_upper: missing state moment ") + what);
    }
    return *v;
  };
  switch (model.family) {
    case Family::arch: {
      const auto& prm = model.as<ArchParams>();
      return std::pow(2.0, p - 1.0) * need(moments.scale_p, "scale_p") *
             prm.noise.at(k).abs_moment(p);
    }
    case Family::switching_arch: {
      const auto& prm = model.as<SwitchingParams>();
      const double q = prm.switch_q.at(k);
      const double m1 = prm.noise1.at(k).abs_moment(p);
      return std::pow(4.0, p - 1.0) * (need(moments.scale_p, "scale_p") * q * m1 +
                                       need(moments.scale2_p, "scale2_p") * (1.0 - q) * m1);
    }
    case Family::gar: {
      const auto& prm = model.as<GarParams>();
      if (prm.dim != 1) {
        throw std::invalid_argument("hk_moment_upper: vector GAR not supported, sample instead");
      }
      const auto& a = prm.multiplier.at(k);
      const auto& b = prm.offset.at(k);
      const bool a_point = a.kind == LawKind::point_mass;
      const bool b_point = b.kind == LawKind::point_mass;
      // A point mass kills the multiplier integral, so no splitting is
      // needed and the exact pairwise moment of the other component is a
      // valid (and much sharper) bound; symmetrically for B.
      if (a_point && b_point) return 0.0;
      if (a_point) {
        if (b.has_abs_diff_moment()) return b.abs_diff_moment(p);
        return std::pow(4.0, p - 1.0) * b.abs_moment(p);
      }
      if (b_point) {
        const double xp = need(moments.abs_p, "abs_p");
        if (a.has_abs_diff_moment()) return xp * a.abs_diff_moment(p);
        return std::pow(4.0, p - 1.0) * xp * a.abs_moment(p);
      }
      return std::pow(4.0, p - 1.0) *
             (need(moments.abs_p, "abs_p") * a.abs_moment(p) + b.abs_moment(p));
    }
    case Family::inar1: {
      const auto& prm = model.as<Inar1Params>();
      const double d0 = prm.immigration.at(k).abs_diff_moment(p);
      const double d1 = prm.offspring.at(k).abs_diff_moment(p);
      if (p >= 2.0) {
        const double c = std::pow(2.0, 0.5 * (p - 2.0));
        return c * d0 + std::pow(p - 1.0, 0.5 * p) * c * need(moments.half_p, "half_p") * d1;
      }
      return d0 + std::pow(2.0, 2.0 - p) * need(moments.mean, "mean") * d1;
    }
    case Family::glm_poisson:
      return std::pow(2.0, p - 1.0) * need(moments.mean_qp, "mean_qp");
    case Family::glm_garch_poisson: {
      const auto& prm = model.as<GlmGarchParams>();
      return std::pow(prm.weight, p) * std::pow(2.0, p - 1.0) * need(moments.mean_qp, "mean_qp");
    }
    case Family::generic:
      throw std::invalid_argument("hk_moment_upper: unsupported for generic models");
  }
  return 0.0;
}

std::vector<ContractionPairReport> verify_contraction(
    const ChainModel& model, long long k,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs, int m,
    const RngPolicy& policy) {
  if (pairs.empty()) {
    throw std::invalid_argument("verify_contraction: pairs must be nonempty");
  }
  if (m < 2) {
    throw std::invalid_argument("verify_contraction: need m >= 2 samples");
  }
  const double rho = certified_rho(model);
  const auto dim = static_cast<std::size_t>(model.state_dim());

  std::vector<ContractionPairReport> reports;
  reports.reserve(pairs.size());
  std::vector<double> y(dim);
  std::vector<double> y2(dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, x2] = pairs[i];
    if (x.size() != dim || x2.size() != dim) {
      throw std::invalid_argument("verify_contraction: state dimension mismatch");
    }
    Stream stream = policy.stream(StreamPurpose::diagnostic, i, static_cast<std::uint64_t>(k));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int j = 0; j < m; ++j) {
      step_pair(model, k, x, x2, stream, y, y2);
      const double d = model.metric(y, y2);
      sum += d;
      sum_sq += d * d;
    }
    const double mean = sum / m;
    const double var = std::max(0.0, sum_sq / m - mean * mean);
    const double se = std::sqrt(var / m);
    const double bound = rho * model.metric(x, x2);
    reports.push_back({x, x2, mean, se, bound, mean <= bound + 3.0 * se});
  }
  return reports;
}

}  // namespace chainbound
