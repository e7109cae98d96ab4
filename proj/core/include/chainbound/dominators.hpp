#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "chainbound/model.hpp"
#include "chainbound/rng.hpp"

namespace chainbound {

// Realized nonnegative dominator samples (H_k, G_{X_1}, L_k, ...) together
// with the seed record needed to reproduce them.
struct SampleSet {
  std::vector<double> values;
  long long step = 0;  // k for step-indexed sets, 0 otherwise
  int m_inner = 0;
  int m_outer = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t experiment = 0;
  StreamPurpose purpose = StreamPurpose::constants;

  std::size_t size() const { return values.size(); }
};

// The constants feeding the deviation/moment bounds. Entries are only
// meaningful for the bounds that consume them; estimation provenance is
// tracked by the report layer.
struct MomentProfile {
  double p = 2.0;
  double delta = 0.0;              // weak-moment surplus
  double alpha = 0.5;              // semi-exponential exponent
  double epsilon_bernstein = 0.0;  // sub-Gaussian moment-growth scale
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double kappa = 1.0;              // exponential-moment scale
  std::map<long long, double> A;   // k -> A_k(p), including A_1(p)
};

// H_k(x, eps_k) for one outer draw eps_k taken from outer_stream: exact via
// the family closed form when available, otherwise the inner average
// (1/m) sum_j d(F_k(x, eps_k), F_k(x, eps'_j)) over fresh inner copies.
double estimate_H_at(const ChainModel& model, long long k, std::span<const double> x,
                     int m_inner, Stream& outer_stream, Stream& inner_stream);

// L_k(x) = E[H_k(x, eps_k)^2 | X_{k-1} = x], estimated by averaging the
// squared H over m_inner fresh outer draws. When H itself needs inner
// Monte Carlo the square is biased upward, which is the conservative
// direction for every bound that consumes L.
double estimate_L_at(const ChainModel& model, long long k, std::span<const double> x,
                     int m_inner, Stream& outer_stream, Stream& inner_stream);

// m_outer samples of H_k(X_{k-1}, eps_k), each at an independently
// simulated X_{k-1}.
SampleSet sample_H(const ChainModel& model, long long k, int m_outer, int m_inner,
                   const RngPolicy& policy);

// m samples of G_{X_1}(X_1) = int d(X_1, x') P_{X_1}(dx').
SampleSet estimate_G_init(const ChainModel& model, int m_outer, int m_inner,
                          const RngPolicy& policy);

// m_outer samples of L_k(X_{k-1}).
SampleSet estimate_L(const ChainModel& model, long long k, int m_outer, int m_inner,
                     const RngPolicy& policy);

// ((1/m) sum v_i^p)^{1/p}.
double empirical_pnorm(const SampleSet& samples, double p);

// Plug-in for ||Z||_{w,p}^p = sup_x x^p P(|Z| > x): the maximum over order
// statistics of v^p times the fraction of samples >= v (the survivor count
// includes the point itself, so constant samples return c^p). Always
// dominated by empirical_pnorm^p.
double empirical_weak_norm(const SampleSet& samples, double p);

// (1/m) sum exp(kappa * v_i^gamma). Terms whose exponent argument exceeds
// 700 are capped there and flag the estimate as overflowed (the moment
// condition is then presumed violated).
struct ExpMomentEstimate {
  double value = 0.0;
  bool overflow = false;
};
ExpMomentEstimate exp_moment_estimate(const SampleSet& samples, double gamma, double kappa);

// Smallest epsilon such that the empirical moments satisfy
//   E[H^l] <= (1/2) l! eps^{l-2} (l-1)^{-l/2} E[H^2]   for l = 2..l_max.
// l = 2 holds structurally; the answer is the max over l >= 3 of
//   (2 E[H^l] (l-1)^{l/2} / (l! E[H^2]))^{1/(l-2)}.
double bernstein_epsilon(const SampleSet& samples, int l_max);

// One pass over m_outer simulated trajectories of horizon n collecting
// everything the bound conditions consume: per-step H and L samples, the
// per-trajectory average (1/n) sum_{k=2}^n L_k(X_{k-1}), and the
// per-trajectory Rosenthal bracket sum_{k=2}^n K_{n-k}(rho)^2 L_k(X_{k-1}).
struct DominatorSweep {
  long long n = 0;
  std::vector<SampleSet> h_per_k;  // index k - 2
  std::vector<SampleSet> l_per_k;  // index k - 2
  SampleSet l_avg;
  SampleSet bracket;
};

DominatorSweep sweep_dominators(const ChainModel& model, long long n, int m_outer, int m_inner,
                                const RngPolicy& policy);

}  // namespace chainbound
