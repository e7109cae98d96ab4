#include "chainbound/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace chainbound {

namespace {

// Fixed block partition of [0, total) over worker threads; results land in
// preallocated index slots, so the outcome is identical for any worker
// count.
template <typename Fn>
void parallel_blocks(long long total, int threads, Fn fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long long>(workers, std::max<long long>(total, 1)));
  if (workers == 1) {
    fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const long long chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long long begin = static_cast<long long>(w) * chunk;
    const long long end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

long long count_exceed(const std::vector<double>& values, TailSide side, double threshold) {
  long long count = 0;
  switch (side) {
    case TailSide::plus:
      for (double v : values) {
        if (v >= threshold) ++count;
      }
      break;
    case TailSide::minus:
      for (double v : values) {
        if (-v >= threshold) ++count;
      }
      break;
    case TailSide::abs:
      for (double v : values) {
        if (std::fabs(v) >= threshold) ++count;
      }
      break;
  }
  return count;
}

}  // namespace

const char* to_string(TailSide side) {
  switch (side) {
    case TailSide::plus:
      return "plus";
    case TailSide::minus:
      return "minus";
    case TailSide::abs:
      return "abs";
  }
  return "?";
}

PathMatrix simulate_chain(const ChainModel& model, long long n, std::uint64_t replication,
                          const RngPolicy& policy, StreamPurpose purpose) {
  if (n < 1) {
    throw std::invalid_argument("simulate_chain: n must be >= 1");
  }
  PathMatrix path = PathMatrix::zeros(n, model.state_dim());
  Stream init = policy.stream(purpose, replication, 1);
  draw_initial(model, init, path.state(1));
  for (long long k = 2; k <= n; ++k) {
    Stream s = policy.stream(purpose, replication, static_cast<std::uint64_t>(k));
    try {
      step(model, k, path.state(k - 1), s, path.state(k));
    } catch (const ModelError& e) {
      throw ModelError(std::string(e.what()) + " (step k=" + std::to_string(k) +
                       ", replication=" + std::to_string(replication) + ")");
    }
  }
  return path;
}

double eval_functional(const Functional& f, const PathMatrix& path) {
  return f(path);
}

CenteredSample collect_centered(const ChainModel& model, const Functional& f, long long n,
                                long long replications, const RngPolicy& policy, int threads) {
  if (replications < 2) {
    throw std::invalid_argument("collect_centered: need at least 2 replications");
  }
  std::vector<double> mean_batch(static_cast<std::size_t>(replications));
  std::vector<double> tail_batch(static_cast<std::size_t>(replications));
  parallel_blocks(replications, threads, [&](long long begin, long long end) {
    for (long long r = begin; r < end; ++r) {
      const auto rep = static_cast<std::uint64_t>(r);
      mean_batch[static_cast<std::size_t>(r)] =
          f(simulate_chain(model, n, rep, policy, StreamPurpose::mean_batch));
      tail_batch[static_cast<std::size_t>(r)] =
          f(simulate_chain(model, n, rep, policy, StreamPurpose::tail_batch));
    }
  });
  CenteredSample out;
  out.n = n;
  out.replications = replications;
  out.mean_estimate = mean_of(mean_batch);
  out.mean_se = stddev_of(mean_batch) / std::sqrt(static_cast<double>(replications));
  out.values = std::move(tail_batch);
  for (double& v : out.values) {
    v -= out.mean_estimate;
  }
  return out;
}

TailEstimate tail_from_sample(const CenteredSample& sample, const TailRequest& request,
                              double level, double mean_inflation_ses) {
  if (!(request.x > 0.0) || !(request.a_n > 0.0)) {
    throw std::domain_error("tail_from_sample: x and a_n must be positive");
  }
  TailEstimate est;
  est.x = request.x;
  est.a_n = request.a_n;
  est.side = request.side;
  est.convention = request.convention;
  est.threshold = request.a_n * request.x;
  est.replications = sample.replications;
  est.n = sample.n;
  est.count = count_exceed(sample.values, request.side, est.threshold);
  est.point = static_cast<double>(est.count) / static_cast<double>(sample.replications);

  // The centering error shifts every S value by the same unknown amount;
  // widening the interval endpoints by a threshold slack of a few SEs of
  // the mean keeps the interval conservative.
  const double slack = mean_inflation_ses * sample.mean_se;
  const long long hi_count = count_exceed(sample.values, request.side, est.threshold - slack);
  const long long lo_count = count_exceed(sample.values, request.side, est.threshold + slack);
  est.ci.hi = clopper_pearson(hi_count, sample.replications, level).hi;
  est.ci.lo = clopper_pearson(lo_count, sample.replications, level).lo;
  return est;
}

std::vector<TailEstimate> estimate_tail(const ChainModel& model, const Functional& f,
                                        long long n, const std::vector<TailRequest>& requests,
                                        const TailOptions& options, const RngPolicy& policy) {
  if (options.replications < 100) {
    throw std::invalid_argument("estimate_tail: need at least 100 replications");
  }
  const CenteredSample sample =
      collect_centered(model, f, n, options.replications, policy, options.threads);
  std::vector<TailEstimate> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    out.push_back(tail_from_sample(sample, req, options.level, options.mean_inflation_ses));
  }
  return out;
}

MomentEstimate moment_from_sample(const CenteredSample& sample, double p,
                                  const RngPolicy& policy, int bootstrap, double level) {
  if (!(p > 1.0)) {
    throw std::domain_error("moment_from_sample: p must be > 1");
  }
  const auto r = sample.values.size();
  const auto lp_norm = [&](const std::vector<double>& vals) {
    double acc = 0.0;
    for (double v : vals) {
      acc += std::pow(std::fabs(v), p);
    }
    return std::pow(acc / static_cast<double>(vals.size()), 1.0 / p);
  };
  MomentEstimate est;
  est.p = p;
  est.n = sample.n;
  est.replications = sample.replications;
  est.value = lp_norm(sample.values);

  std::vector<double> stats(static_cast<std::size_t>(bootstrap));
  std::vector<double> resample(r);
  for (int b = 0; b < bootstrap; ++b) {
    Stream s = policy.stream(StreamPurpose::bootstrap, static_cast<std::uint64_t>(b),
                             static_cast<std::uint64_t>(sample.n));
    for (std::size_t i = 0; i < r; ++i) {
      const auto idx = static_cast<std::size_t>(s.uniform01() * static_cast<double>(r));
      resample[i] = sample.values[std::min(idx, r - 1)];
    }
    stats[static_cast<std::size_t>(b)] = lp_norm(resample);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = 1.0 - level;
  const auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(bootstrap - 1));
    return stats[std::min(idx, stats.size() - 1)];
  };
  est.ci.lo = pick(0.5 * alpha);
  est.ci.hi = pick(1.0 - 0.5 * alpha);
  return est;
}

MomentEstimate estimate_moment(const ChainModel& model, const Functional& f, long long n,
                               double p, long long replications, const RngPolicy& policy,
                               int threads, int bootstrap, double level) {
  if (replications < 100) {
    throw std::invalid_argument("estimate_moment: need at least 100 replications");
  }
  const CenteredSample sample = collect_centered(model, f, n, replications, policy, threads);
  return moment_from_sample(sample, p, policy, bootstrap, level);
}

Comparison compare_bound_vs_empirical(const BoundResult& bound, const TailEstimate& estimate) {
  if (bound.convention != estimate.convention) {
    throw std::invalid_argument(
        std::string("compare_bound_vs_empirical: threshold convention mismatch (") +
        to_string(bound.convention) + " vs " + to_string(estimate.convention) + ")");
  }
  const auto it = bound.inputs_echo.find("x");
  if (it != bound.inputs_echo.end() &&
      std::fabs(it->second - estimate.x) > 1e-9 * (1.0 + std::fabs(it->second))) {
    throw std::invalid_argument("compare_bound_vs_empirical: threshold x mismatch");
  }
  Comparison cmp;
  cmp.margin = bound.value - estimate.ci.hi;
  cmp.dominated = estimate.ci.hi <= bound.value;
  return cmp;
}

}  // namespace chainbound
