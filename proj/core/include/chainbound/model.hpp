#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "chainbound/metric.hpp"
#include "chainbound/noise.hpp"
#include "chainbound/rng.hpp"

namespace chainbound {

enum class Family {
  arch,
  switching_arch,
  gar,
  inar1,
  glm_poisson,
  glm_garch_poisson,
  generic,
};

// Raised when a step produces an invalid state or a family formula is
// violated (negative intensity, negative count state, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the family's contraction formula gives rho >= 1.
class NonContractiveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// X_n = sqrt(a_n^2 X_{n-1}^2 + b_n^2) * eps_n.
struct ArchParams {
  Schedule<double> a;
  Schedule<double> b;
  Schedule<ScalarLaw> noise;
};

// Two ARCH branches selected by an independent Bernoulli mark:
// X_n = [e2 * sqrt(a^2 x^2 + b^2) + (1 - e2) * sqrt(a'^2 x^2 + b'^2)] * e1.
struct SwitchingParams {
  Schedule<double> a;
  Schedule<double> b;
  Schedule<double> a2;
  Schedule<double> b2;
  Schedule<ScalarLaw> noise1;   // real-valued factor e1
  Schedule<double> switch_q;    // P(e2 = 1), weight of the (a, b) branch
};

// X_n = A_n X_{n-1} + B_n. dim == 1: A_n, B_n scalar laws. dim > 1:
// A_n acts as (scalar multiplier law) * identity and B_n has iid
// coordinates, so E|A_n| stays in closed form.
struct GarParams {
  int dim = 1;
  Schedule<ScalarLaw> multiplier;
  Schedule<ScalarLaw> offset;
};

// X_n = eps_n^{(0)} + 1_{X_{n-1} != 0} sum_{i=1}^{X_{n-1}} eps_n^{(i)}.
struct Inar1Params {
  Schedule<ScalarLaw> immigration;  // eps^{(0)}, may vary with the step
  Schedule<ScalarLaw> offspring;    // eps^{(i)}, i >= 1
};

// X_n = N(f_n(X_{n-1})) for a unit Poisson process N, with affine
// intensity f_k(x) = intercept_k + slope_k * x.
struct GlmPoissonParams {
  Schedule<double> intercept;
  Schedule<double> slope;
};

// State (lambda, z); F_n(x) = (f_n(x), N(f_n(x))) with
// f_k(lambda, z) = intercept_k + lambda_coef_k * lambda + count_coef_k * z
// and metric |x| = |lambda| + weight * |z|.
struct GlmGarchParams {
  Schedule<double> intercept;
  Schedule<double> lambda_coef;
  Schedule<double> count_coef;
  double weight = 1.0;
};

// User-composed family: an arbitrary measurable step plus a caller-certified
// contraction coefficient. Only constructible in-process.
struct GenericParams {
  int dim = 1;
  std::function<void(long long k, std::span<const double> x, Stream& stream,
                     std::span<double> out)>
      step;
  double rho = 0.0;
};

// A non-homogeneous chain: per-step random function family, noise laws,
// initial law (one per coordinate) and state metric. Immutable after
// construction; every operation on it is pure given the streams.
struct ChainModel {
  Family family = Family::gar;
  std::variant<ArchParams, SwitchingParams, GarParams, Inar1Params, GlmPoissonParams,
               GlmGarchParams, GenericParams>
      params;
  Metric metric = Metric::absolute();
  std::vector<ScalarLaw> initial;        // one law per coordinate
  std::optional<double> user_rho;        // overrides the family formula

  int state_dim() const;

  template <typename T>
  const T& as() const {
    return std::get<T>(params);
  }
};

ChainModel make_arch(Schedule<double> a, Schedule<double> b, Schedule<ScalarLaw> noise,
                     ScalarLaw initial);
ChainModel make_switching(Schedule<double> a, Schedule<double> b, Schedule<double> a2,
                          Schedule<double> b2, Schedule<ScalarLaw> noise1,
                          Schedule<double> switch_q, ScalarLaw initial);
ChainModel make_gar(Schedule<ScalarLaw> multiplier, Schedule<ScalarLaw> offset,
                    ScalarLaw initial);
ChainModel make_gar_vector(int dim, Schedule<ScalarLaw> multiplier, Schedule<ScalarLaw> offset,
                           std::vector<ScalarLaw> initial, double norm_q);
ChainModel make_inar1(Schedule<ScalarLaw> immigration, Schedule<ScalarLaw> offspring,
                      ScalarLaw initial);
ChainModel make_glm_poisson(Schedule<double> intercept, Schedule<double> slope,
                            ScalarLaw initial);
ChainModel make_glm_garch(Schedule<double> intercept, Schedule<double> lambda_coef,
                          Schedule<double> count_coef, double weight,
                          std::vector<ScalarLaw> initial);
ChainModel make_generic(GenericParams params, Metric metric, std::vector<ScalarLaw> initial);

// Replace the model metric by d^alpha; the certificate becomes rho^alpha.
ChainModel with_alpha_metric(const ChainModel& model, double alpha);

void draw_initial(const ChainModel& model, Stream& stream, std::span<double> out);

// One chain step X_k = F_k(X_{k-1}, eps_k), k >= 2, drawing eps_k from the
// stream. Throws ModelError for invalid states.
void step(const ChainModel& model, long long k, std::span<const double> x, Stream& stream,
          std::span<double> out);

// One step applied to two states with the *same* noise realization, the
// coupling under which the mean-contraction condition is stated.
void step_pair(const ChainModel& model, long long k, std::span<const double> x,
               std::span<const double> x2, Stream& stream, std::span<double> out,
               std::span<double> out2);

// Realized per-step noise for the scalar families, so tests can inject
// specific draws and the closed-form dominator evaluations can hold the
// outer draw fixed. Meaning by family:
//   arch:         u = eps
//   switching:    u = e1, v = e2 (0/1)
//   gar (dim 1):  u = A, v = B
//   inar1:        u = immigration, v = offspring sum given x
//   glm_*:        u = realized count at intensity f_k(x)
struct StepDraw {
  double u = 0.0;
  double v = 0.0;
};

StepDraw sample_step_draw(const ChainModel& model, long long k, std::span<const double> x,
                          Stream& stream);
void apply_step_draw(const ChainModel& model, long long k, std::span<const double> x,
                     const StepDraw& draw, std::span<double> out);

// The family-formula contraction coefficient (sup over the schedule).
// Throws NonContractiveError when the formula gives rho >= 1.
ContractionCertificate contraction_certificate(const ChainModel& model);

// User-supplied rho when present, else the family formula.
double certified_rho(const ChainModel& model);

// True when H_k(x, eps_k) = int d(F_k(x,eps_k), F_k(x,y')) P(dy') has a
// closed form for this model (base metric, no alpha transform).
bool has_closed_form_H(const ChainModel& model, long long k);

// H_k(x, draw) evaluated exactly; only valid when has_closed_form_H.
double closed_form_H(const ChainModel& model, long long k, std::span<const double> x,
                     const StepDraw& draw);

// State moments feeding the closed-form H_k moment bounds. Callers supply
// whichever entries the family needs (estimated or exact).
struct StateMoments {
  std::optional<double> abs_p;     // E|X_{k-1}|^p
  std::optional<double> scale_p;   // E[(a_k^2 X^2 + b_k^2)^{p/2}]
  std::optional<double> scale2_p;  // primed-branch analogue (switching)
  std::optional<double> half_p;    // E[X_{k-1}^{p/2}]
  std::optional<double> mean;      // E[X_{k-1}]
  std::optional<double> mean_qp;   // E[Q_p(f_k(X_{k-1}))]
};

// Closed-form upper bound on E[H_k(X_{k-1}, eps_k)^p] for the named
// families. Throws std::invalid_argument for generic models and when a
// required state moment is missing.
double hk_moment_upper(const ChainModel& model, long long k, double p,
                       const StateMoments& moments);

// Mean-contraction check on explicit state pairs: for each pair, the
// empirical mean of d(F_k(x, eps), F_k(x', eps)) over m common-noise draws
// against the certified bound rho * d(x, x'), with a 3-standard-error
// statistical slack.
struct ContractionPairReport {
  std::vector<double> x;
  std::vector<double> x2;
  double empirical_mean = 0.0;
  double standard_error = 0.0;
  double certified_bound = 0.0;
  bool pass = false;
};

std::vector<ContractionPairReport> verify_contraction(
    const ChainModel& model, long long k,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs, int m,
    const RngPolicy& policy);

}  // namespace chainbound
