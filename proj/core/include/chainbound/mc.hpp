#pragma once

#include <vector>

#include "chainbound/bounds.hpp"
#include "chainbound/martingale.hpp"
#include "chainbound/stats.hpp"

namespace chainbound {

enum class TailSide { plus, minus, abs };

const char* to_string(TailSide side);

// Empirical P(side(S_n) >= threshold) with an exact binomial confidence
// interval. The interval is widened by evaluating its endpoints at
// thresholds shifted by the centering error allowance (see TailOptions).
struct TailEstimate {
  double threshold = 0.0;  // in S units: a_n * x
  double x = 0.0;
  double a_n = 1.0;
  TailSide side = TailSide::plus;
  ThresholdConvention convention = ThresholdConvention::n_x;
  long long count = 0;
  long long replications = 0;
  double point = 0.0;
  Interval ci;
  long long n = 0;
};

// Simulate X_1..X_n for one replication under the purpose tag; the same
// (policy, purpose, replication) always reproduces the same path.
PathMatrix simulate_chain(const ChainModel& model, long long n, std::uint64_t replication,
                          const RngPolicy& policy,
                          StreamPurpose purpose = StreamPurpose::tail_batch);

double eval_functional(const Functional& f, const PathMatrix& path);

// Centered functional values from the two-batch scheme: E[f] is estimated
// on an independent batch (stream-disjoint by purpose tag) and subtracted
// from the tail batch values.
struct CenteredSample {
  std::vector<double> values;  // S_n per tail-batch replication
  double mean_estimate = 0.0;
  double mean_se = 0.0;
  long long replications = 0;
  long long n = 0;
};

CenteredSample collect_centered(const ChainModel& model, const Functional& f, long long n,
                                long long replications, const RngPolicy& policy,
                                int threads = 0);

struct TailRequest {
  double x = 1.0;
  double a_n = 1.0;
  TailSide side = TailSide::plus;
  ThresholdConvention convention = ThresholdConvention::n_x;
};

struct TailOptions {
  long long replications = 100000;
  double level = 0.999;
  double mean_inflation_ses = 4.0;  // centering-error allowance in SEs
  int threads = 0;                  // 0 = hardware concurrency
};

TailEstimate tail_from_sample(const CenteredSample& sample, const TailRequest& request,
                              double level, double mean_inflation_ses);

std::vector<TailEstimate> estimate_tail(const ChainModel& model, const Functional& f,
                                        long long n, const std::vector<TailRequest>& requests,
                                        const TailOptions& options, const RngPolicy& policy);

// Plug-in ||S_n||_p with a bootstrap percentile interval.
struct MomentEstimate {
  double p = 2.0;
  double value = 0.0;
  Interval ci;
  long long replications = 0;
  long long n = 0;
};

MomentEstimate moment_from_sample(const CenteredSample& sample, double p,
                                  const RngPolicy& policy, int bootstrap = 200,
                                  double level = 0.99);

MomentEstimate estimate_moment(const ChainModel& model, const Functional& f, long long n,
                               double p, long long replications, const RngPolicy& policy,
                               int threads = 0, int bootstrap = 200, double level = 0.99);

// Domination verdict: the empirical upper confidence limit against the
// bound value. Refuses to compare mismatched threshold conventions or
// thresholds (hard error), so a V_n-normalized bound can never be scored
// against an n-normalized estimate.
struct Comparison {
  bool dominated = false;
  double margin = 0.0;  // bound - upper CL
};

Comparison compare_bound_vs_empirical(const BoundResult& bound, const TailEstimate& estimate);

}  // namespace chainbound
