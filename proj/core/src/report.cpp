#include "chainbound/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace chainbound {

namespace {

struct Estimated {
  double value = 0.0;  // inflated, ready for the bound
  double raw = 0.0;
  double se = 0.0;
};

Estimated moment_up(const SampleSet& s, double p, double ses) {
  const auto m = static_cast<double>(s.values.size());
  double acc = 0.0;
  double acc_sq = 0.0;
  for (double v : s.values) {
    const double t = std::pow(v, p);
    acc += t;
    acc_sq += t * t;
  }
  const double mean = acc / m;
  const double se = std::sqrt(std::max(0.0, acc_sq / m - mean * mean) / m);
  return {mean + ses * se, mean, se};
}

Estimated moment_down(const SampleSet& s, double p, double ses) {
  Estimated e = moment_up(s, p, ses);
  e.value = std::max(0.0, e.raw - ses * e.se);
  return e;
}

Estimated weak_norm_up(const SampleSet& s, double p, double ses) {
  const double raw = empirical_weak_norm(s, p);
  const double rel = ses / std::sqrt(static_cast<double>(s.values.size()));
  return {raw * (1.0 + rel), raw, raw * rel / ses};
}

Estimated exp_moment_up(const SampleSet& s, double gamma, double ses, bool& overflow) {
  const auto m = static_cast<double>(s.values.size());
  double acc = 0.0;
  double acc_sq = 0.0;
  for (double v : s.values) {
    double arg = std::pow(v, gamma);
    if (arg > 700.0) {
      overflow = true;
      arg = 700.0;
    }
    const double t = std::exp(arg);
    acc += t;
    acc_sq += t * t;
  }
  const double mean = acc / m;
  const double se = std::sqrt(std::max(0.0, acc_sq / m - mean * mean) / m);
  return {mean + ses * se, mean, se};
}

// Conservative variant of the sub-Gaussian scale: each l-th constraint is
// evaluated with the numerator moment inflated and E[H^2] deflated.
double bernstein_epsilon_up(const SampleSet& s, int l_max, double ses) {
  const Estimated mu2 = moment_down(s, 2.0, ses);
  if (mu2.value <= 0.0) {
    throw std::domain_error("bernstein_epsilon_up: degenerate second moment");
  }
  double eps = 0.0;
  for (int l = 3; l <= l_max; ++l) {
    const Estimated mul = moment_up(s, static_cast<double>(l), ses);
    const double lhs = 2.0 * mul.value * std::pow(static_cast<double>(l - 1), 0.5 * l) /
                       (std::tgamma(static_cast<double>(l) + 1.0) * mu2.value);
    eps = std::max(eps, std::pow(lhs, 1.0 / (l - 2)));
  }
  return eps;
}

// E|X_{k-1}|^p along the same trajectories the dominator sweep walks.
std::vector<Estimated> state_abs_moments(const ChainModel& model, long long n, double p,
                                         int m_outer, const RngPolicy& policy, double ses) {
  const auto dim = static_cast<std::size_t>(model.state_dim());
  const auto steps = static_cast<std::size_t>(n - 1);
  std::vector<double> acc(steps, 0.0);
  std::vector<double> acc_sq(steps, 0.0);
  std::vector<double> x(dim);
  std::vector<double> y(dim);
  std::vector<double> anchor(dim, 0.0);
  for (int rep = 0; rep < m_outer; ++rep) {
    const auto urep = static_cast<std::uint64_t>(rep);
    Stream init = policy.stream(StreamPurpose::constants, urep, 1);
    draw_initial(model, init, x);
    for (long long k = 2; k <= n; ++k) {
      const double t = std::pow(model.metric(x, anchor), p);
      acc[static_cast<std::size_t>(k - 2)] += t;
      acc_sq[static_cast<std::size_t>(k - 2)] += t * t;
      Stream s = policy.stream(StreamPurpose::constants, urep, static_cast<std::uint64_t>(k));
      step(model, k, x, s, y);
      std::swap(x, y);
    }
  }
  std::vector<Estimated> out(steps);
  const auto m = static_cast<double>(m_outer);
  for (std::size_t i = 0; i < steps; ++i) {
    const double mean = acc[i] / m;
    const double se = std::sqrt(std::max(0.0, acc_sq[i] / m - mean * mean) / m);
    out[i] = {mean + ses * se, mean, se};
  }
  return out;
}

class ExperimentRunner {
 public:
  explicit ExperimentRunner(const ExperimentConfig& config) : cfg_(config) {
    bundle_.experiment_id = cfg_.experiment_id;
    bundle_.model_family = family_name(cfg_.model.family);
    bundle_.raw_config = cfg_.raw_json;
    bundle_.master_seed = cfg_.master_seed;
  }

  ReportBundle run(bool simulate) {
    try {
      rho_ = certified_rho(cfg_.model);
    } catch (const std::exception& e) {
      bundle_.annotations.push_back(std::string("certificate: ") + e.what());
      return std::move(bundle_);
    }
    for (const long long n : cfg_.horizons) {
      run_horizon(n, simulate);
    }
    return std::move(bundle_);
  }

 private:
  RngPolicy cell_policy(long long n) const {
    const std::uint64_t exp_id =
        absorb(stable_hash(cfg_.experiment_id), static_cast<std::uint64_t>(n));
    return RngPolicy{cfg_.master_seed, exp_id};
  }

  std::vector<double> grid_for(const BoundSpec& spec) const {
    return spec.thresholds.empty() ? cfg_.thresholds : spec.thresholds;
  }

  void record(const BoundSpec& spec, long long n, long long k, const std::string& name,
              const Estimated& est, long long samples) {
    constants_cache_.push_back(
        {spec.name, name, n, k, est.value, est.se, est.se == 0.0 ? "supplied" : "estimated",
         samples});
  }

  double constant(const BoundSpec& spec, const std::string& key, double fallback_estimate,
                  bool have_estimate) {
    const auto it = spec.supplied.find(key);
    if (it != spec.supplied.end()) {
      constants_cache_.push_back({spec.name, key, current_n_, 0, it->second, 0.0, "supplied", 0});
      return it->second;
    }
    if (!have_estimate) {
      throw std::invalid_argument("bound '" + spec.name + "' needs constant '" + key +
                                  "' supplied or estimable");
    }
    return fallback_estimate;
  }

  void flush_constants() {
    for (auto& c : constants_cache_) {
      bundle_.constants.push_back(std::move(c));
    }
    constants_cache_.clear();
  }

  void drop_constants() { constants_cache_.clear(); }

  void push_tail_rows(const BoundSpec& spec, long long n, const BoundResult& bound,
                      const CenteredSample* sample, double a_n,
                      std::initializer_list<TailSide> sides) {
    for (const TailSide side : sides) {
      ComparisonRow row;
      row.experiment_id = cfg_.experiment_id;
      row.model_family = bundle_.model_family;
      row.n = n;
      row.x = bound.inputs_echo.at("x");
      row.side = to_string(side);
      row.convention = to_string(bound.convention);
      row.bound_name = bound.name;
      row.bound_value = bound.value;
      row.i1 = bound.i1.value_or(0.0);
      row.i2 = bound.i2.value_or(0.0);
      row.clipped = bound.clipped;
      row.seed = cfg_.master_seed;
      if (sample != nullptr) {
        TailRequest req{row.x, a_n, side, bound.convention};
        const TailEstimate est = tail_from_sample(*sample, req, 0.999, 4.0);
        const Comparison cmp = compare_bound_vs_empirical(bound, est);
        row.empirical = est.point;
        row.ci_lo = est.ci.lo;
        row.ci_hi = est.ci.hi;
        row.dominated = cmp.dominated;
        row.margin = cmp.margin;
        if (!row.clipped && !row.dominated) {
          ++bundle_.domination_failures;
        }
      } else {
        row.has_empirical = false;
      }
      bundle_.rows.push_back(std::move(row));
    }
  }

  void push_moment_row(const BoundSpec& spec, long long n, double p, double bound_norm_units,
                       const MomentEstimate* est) {
    ComparisonRow row;
    row.experiment_id = cfg_.experiment_id;
    row.model_family = bundle_.model_family;
    row.n = n;
    row.x = p;
    row.side = "moment";
    row.convention = "lp_norm";
    row.bound_name = spec.name;
    row.bound_value = bound_norm_units;
    row.seed = cfg_.master_seed;
    if (est != nullptr) {
      row.empirical = est->value;
      row.ci_lo = est->ci.lo;
      row.ci_hi = est->ci.hi;
      row.dominated = est->ci.hi <= bound_norm_units;
      row.margin = bound_norm_units - est->ci.hi;
      if (!row.dominated) {
        ++bundle_.domination_failures;
      }
    } else {
      row.has_empirical = false;
    }
    bundle_.rows.push_back(std::move(row));
  }

  void run_horizon(long long n, bool simulate) {
    current_n_ = n;
    const RngPolicy policy = cell_policy(n);
    std::optional<DominatorSweep> sweep;
    std::optional<SampleSet> g_samples;
    std::optional<CenteredSample> centered;

    const auto need_sweep = [&]() -> const DominatorSweep& {
      if (!sweep) {
        sweep = sweep_dominators(cfg_.model, n, cfg_.m_outer, cfg_.m_inner, policy);
      }
      return *sweep;
    };
    const auto need_g = [&]() -> const SampleSet& {
      if (!g_samples) {
        g_samples = estimate_G_init(cfg_.model, cfg_.m_outer, cfg_.m_inner, policy);
      }
      return *g_samples;
    };
    const auto need_centered = [&]() -> const CenteredSample& {
      if (!centered) {
        centered = collect_centered(cfg_.model, cfg_.functional, n, cfg_.replications, policy,
                                    cfg_.threads);
      }
      return *centered;
    };

    if (simulate && cfg_.contraction_pairs > 0) {
      contraction_check(n, policy);
    }

    for (const BoundSpec& spec : cfg_.bounds) {
      try {
        evaluate_bound(spec, n, policy, simulate, need_sweep, need_g, need_centered);
        flush_constants();
      } catch (const std::exception& e) {
        drop_constants();
        bundle_.annotations.push_back("bound '" + spec.name + "' at n=" + std::to_string(n) +
                                      ": " + e.what());
      }
    }
  }

  void contraction_check(long long n, const RngPolicy& policy) {
    // Random state pairs harvested from short simulated trajectories.
    const auto dim = static_cast<std::size_t>(cfg_.model.state_dim());
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    pairs.reserve(static_cast<std::size_t>(cfg_.contraction_pairs));
    for (int i = 0; i < cfg_.contraction_pairs; ++i) {
      const auto a = simulate_chain(cfg_.model, 4, static_cast<std::uint64_t>(2 * i), policy,
                                    StreamPurpose::diagnostic);
      const auto b = simulate_chain(cfg_.model, 4, static_cast<std::uint64_t>(2 * i + 1), policy,
                                    StreamPurpose::diagnostic);
      pairs.push_back({std::vector<double>(a.state(4).begin(), a.state(4).end()),
                       std::vector<double>(b.state(4).begin(), b.state(4).end())});
      (void)dim;
    }
    const auto reports = verify_contraction(cfg_.model, 2, pairs, 512, policy);
    long long flagged = 0;
    for (const auto& r : reports) {
      if (!r.pass) ++flagged;
    }
    if (flagged > 0) {
      bundle_.annotations.push_back("contraction check at n=" + std::to_string(n) + ": " +
                                    std::to_string(flagged) + "/" +
                                    std::to_string(reports.size()) + " pairs flagged");
    }
  }

  template <typename SweepFn, typename GFn, typename CenteredFn>
  void evaluate_bound(const BoundSpec& spec, long long n, const RngPolicy& policy, bool simulate,
                      SweepFn&& need_sweep, GFn&& need_g, CenteredFn&& need_centered) {
    const double ses = cfg_.inflation_ses;
    const auto grid = grid_for(spec);

    const auto i1_at = [&](double a_n, double x) {
      if (!simulate) return 0.0;
      return i1_term(need_g(), a_n, x, n, rho_);
    };

    if (spec.name == "subgaussian") {
      const auto& sweep = need_sweep();
      std::map<long long, double> h2_up;
      std::map<long long, double> h2_dn;
      for (long long k = 2; k <= n; ++k) {
        const auto& hs = sweep.h_per_k[static_cast<std::size_t>(k - 2)];
        const Estimated up = moment_up(hs, 2.0, ses);
        h2_up[k] = up.value;
        h2_dn[k] = moment_down(hs, 2.0, ses).value;
        record(spec, n, k, "E_H2", up, static_cast<long long>(hs.size()));
      }
      const auto [v2_up, sig2_up] = vn_sigma(h2_up, n, rho_);
      const auto [v2_dn, sig2_dn] = vn_sigma(h2_dn, n, rho_);
      (void)sig2_up;
      (void)v2_dn;
      double eps_est = 0.0;
      if (!spec.supplied.count("epsilon")) {
        for (long long k = 2; k <= n; ++k) {
          eps_est = std::max(
              eps_est,
              bernstein_epsilon_up(sweep.h_per_k[static_cast<std::size_t>(k - 2)], spec.l_max,
                                   ses));
        }
        record(spec, n, 0, "epsilon", {eps_est, eps_est, eps_est * 1e-3}, cfg_.m_outer);
      }
      const double eps = constant(spec, "epsilon", eps_est, true);
      record(spec, n, 0, "V2_threshold", {v2_up, v2_up, 0.0}, cfg_.m_outer);
      record(spec, n, 0, "sigma2_exponent", {sig2_dn, sig2_dn, 0.0}, cfg_.m_outer);
      const double a_n = std::sqrt(v2_up);
      const SubgaussianVariant variant = spec.variant == "simple"
                                             ? SubgaussianVariant::simple
                                             : SubgaussianVariant::sharp;
      for (const double x : grid) {
        const auto bound = bound_subgaussian(n, x, rho_, eps, {v2_up, sig2_dn}, i1_at(a_n, x),
                                             variant);
        push_tail_rows(spec, n, bound, simulate ? &need_centered() : nullptr, a_n,
                       {TailSide::plus, TailSide::minus});
      }
      return;
    }

    if (spec.name == "semi_exponential") {
      const double gamma = 2.0 * spec.alpha / (1.0 - spec.alpha);
      double c1_est = 0.0;
      bool have = false;
      if (!spec.supplied.count("C1")) {
        const auto& sweep = need_sweep();
        bool overflow = false;
        for (long long k = 2; k <= n; ++k) {
          const Estimated e =
              exp_moment_up(sweep.h_per_k[static_cast<std::size_t>(k - 2)], gamma, ses, overflow);
          c1_est = std::max(c1_est, e.value);
        }
        if (overflow) {
          throw std::runtime_error("exponential moment overflow; condition presumed violated");
        }
        record(spec, n, 0, "C1", {c1_est, c1_est, 0.0}, cfg_.m_outer);
        have = true;
      }
      const double c1 = constant(spec, "C1", c1_est, have);
      for (const double x : grid) {
        const auto bound =
            bound_semiexp(n, x, rho_, spec.alpha, c1, i1_at(static_cast<double>(n), x));
        push_tail_rows(spec, n, bound, simulate ? &need_centered() : nullptr,
                       static_cast<double>(n), {TailSide::plus, TailSide::minus});
      }
      return;
    }

    if (spec.name == "semi_exponential_conditional") {
      const double gamma = spec.alpha / (1.0 - spec.alpha);
      double c1_est = 0.0;
      double c2_est = 0.0;
      bool have = false;
      if (!spec.supplied.count("C1") || !spec.supplied.count("C2")) {
        const auto& sweep = need_sweep();
        bool overflow = false;
        c1_est = exp_moment_up(sweep.l_avg, gamma, ses, overflow).value;
        for (long long k = 2; k <= n; ++k) {
          const Estimated e =
              exp_moment_up(sweep.h_per_k[static_cast<std::size_t>(k - 2)], gamma, ses, overflow);
          c2_est = std::max(c2_est, e.value);
        }
        if (overflow) {
          throw std::runtime_error("exponential moment overflow; condition presumed violated");
        }
        record(spec, n, 0, "C1", {c1_est, c1_est, 0.0}, cfg_.m_outer);
        record(spec, n, 0, "C2", {c2_est, c2_est, 0.0}, cfg_.m_outer);
        have = true;
      }
      const double c1 = constant(spec, "C1", c1_est, have);
      const double c2 = constant(spec, "C2", c2_est, have);
      for (const double x : grid) {
        const auto bound = bound_semiexp_cond(n, x, rho_, spec.alpha, c1, c2,
                                              i1_at(static_cast<double>(n), x));
        push_tail_rows(spec, n, bound, simulate ? &need_centered() : nullptr,
                       static_cast<double>(n), {TailSide::plus, TailSide::minus});
      }
      return;
    }

    if (spec.name == "fuk_nagaev") {
      const double order = spec.p + spec.delta;
      double c1_est = 0.0;
      double c2_est = 0.0;
      bool have = false;
      if (!spec.supplied.count("C1") || !spec.supplied.count("C2")) {
        const auto& sweep = need_sweep();
        const Estimated c1e = weak_norm_up(sweep.l_avg, order, ses);
        c1_est = c1e.value;
        record(spec, n, 0, "C1", c1e, cfg_.m_outer);
        Estimated worst;
        for (long long k = 2; k <= n; ++k) {
          const Estimated e =
              weak_norm_up(sweep.h_per_k[static_cast<std::size_t>(k - 2)], order, ses);
          if (e.value > worst.value) worst = e;
        }
        c2_est = worst.value;
        record(spec, n, 0, "C2", worst, cfg_.m_outer);
        have = true;
      }
      const double c1 = constant(spec, "C1", c1_est, have);
      const double c2 = constant(spec, "C2", c2_est, have);
      for (const double x : grid) {
        const auto bound = bound_fuk_nagaev(n, x, rho_, spec.p, spec.delta, c1, c2,
                                            i1_at(static_cast<double>(n), x));
        push_tail_rows(spec, n, bound, simulate ? &need_centered() : nullptr,
                       static_cast<double>(n), {TailSide::plus, TailSide::minus});
      }
      return;
    }

    if (spec.name == "weak_von_bahr_esseen") {
      const auto& sweep = need_sweep();
      std::map<long long, double> a_weak;
      for (long long k = 2; k <= n; ++k) {
        const auto& hs = sweep.h_per_k[static_cast<std::size_t>(k - 2)];
        const Estimated e = weak_norm_up(hs, spec.p, ses);
        a_weak[k] = e.value;
        record(spec, n, k, "A_k", e, static_cast<long long>(hs.size()));
      }
      for (const double x : grid) {
        const auto bound = bound_weak_vbe(n, x, rho_, spec.p, a_weak, i1_at(1.0, x));
        push_tail_rows(spec, n, bound, simulate ? &need_centered() : nullptr, 1.0,
                       {TailSide::abs});
      }
      return;
    }

    if (spec.name == "mz_moment" || spec.name == "vbe_moment" ||
        spec.name == "rosenthal_moment") {
      const auto& sweep = need_sweep();
      std::map<long long, double> a;
      const bool fixed_start = cfg_.model.initial[0].kind == LawKind::point_mass;
      if (fixed_start) {
        a[1] = 0.0;
      } else {
        const Estimated e = moment_up(need_g(), spec.p, ses);
        a[1] = e.value;
        record(spec, n, 1, "A_k", e, cfg_.m_outer);
      }
      for (long long k = 2; k <= n; ++k) {
        const auto& hs = sweep.h_per_k[static_cast<std::size_t>(k - 2)];
        const Estimated e = moment_up(hs, spec.p, ses);
        a[k] = e.value;
        record(spec, n, k, "A_k", e, static_cast<long long>(hs.size()));
      }
      double bound_norm = 0.0;
      if (spec.name == "mz_moment") {
        bound_norm = moment_bound_mz(n, spec.p, rho_, a);
      } else if (spec.name == "vbe_moment") {
        bound_norm = std::pow(moment_bound_vbe(n, spec.p, rho_, a), 1.0 / spec.p);
      } else {
        // Rosenthal bracket: A_1(2) enters the predictable part.
        double a1_2 = 0.0;
        if (!fixed_start) {
          a1_2 = moment_up(need_g(), 2.0, ses).value;
        }
        const double kn1 = k_rho(n - 1, rho_);
        SampleSet bracket = sweep.bracket;
        for (double& v : bracket.values) {
          v += kn1 * kn1 * a1_2;
        }
        const Estimated br = moment_up(bracket, 0.5 * spec.p, ses);
        record(spec, n, 0, "L_bracket", br, cfg_.m_outer);
        const double cp = constant(spec, "Cp", rosenthal_default_cp(spec.p), true);
        bound_norm =
            std::pow(moment_bound_rosenthal(n, spec.p, rho_, a, br.value, cp), 1.0 / spec.p);
      }
      if (simulate) {
        const MomentEstimate est =
            moment_from_sample(need_centered(), spec.p, cell_policy(n));
        push_moment_row(spec, n, spec.p, bound_norm, &est);
      } else {
        push_moment_row(spec, n, spec.p, bound_norm, nullptr);
      }
      return;
    }

    if (spec.name == "gar_corollary") {
      if (cfg_.model.family != Family::gar || cfg_.model.state_dim() != 1) {
        throw std::invalid_argument("gar_corollary applies to scalar gar models only");
      }
      if (cfg_.model.initial[0].kind != LawKind::point_mass ||
          cfg_.model.initial[0].a != 0.0) {
        throw std::invalid_argument("gar_corollary requires the fixed start X_1 = 0");
      }
      const auto& prm = cfg_.model.as<GarParams>();
      GarMomentInputs inputs;
      const auto xs = state_abs_moments(cfg_.model, n, spec.p, cfg_.m_outer, policy, ses);
      for (long long k = 2; k <= n; ++k) {
        const Estimated& e = xs[static_cast<std::size_t>(k - 2)];
        inputs.x_norm[k] = std::pow(e.value, 1.0 / spec.p);
        inputs.a_norm[k] = std::pow(prm.multiplier.at(k).abs_moment(spec.p), 1.0 / spec.p);
        inputs.b_norm[k] = std::pow(prm.offset.at(k).abs_moment(spec.p), 1.0 / spec.p);
        record(spec, n, k, "X_norm_p", e, cfg_.m_outer);
      }
      const GarCorollaryResult res = gar_corollary_moment(n, spec.p, rho_, inputs);
      record(spec, n, 0, "C_p_rho", {res.constant, res.constant, 0.0}, 0);
      const double bound_norm = std::pow(res.bound, 1.0 / spec.p);
      if (simulate) {
        const MomentEstimate est =
            moment_from_sample(need_centered(), spec.p, cell_policy(n));
        push_moment_row(spec, n, spec.p, bound_norm, &est);
      } else {
        push_moment_row(spec, n, spec.p, bound_norm, nullptr);
      }
      return;
    }

    throw std::invalid_argument("unknown bound '" + spec.name + "'");
  }

  const ExperimentConfig& cfg_;
  ReportBundle bundle_;
  std::vector<ConstantRecord> constants_cache_;
  double rho_ = 0.0;
  long long current_n_ = 0;
};

void csv_field(std::string& line, const std::string& value, bool first) {
  if (!first) line.push_back(',');
  if (value.find_first_of(",\"\n\r") != std::string::npos) {
    line.push_back('"');
    for (char c : value) {
      if (c == '"') line.push_back('"');
      line.push_back(c);
    }
    line.push_back('"');
  } else {
    line += value;
  }
}

}  // namespace

const char* family_name(Family family) {
  switch (family) {
    case Family::arch:
      return "arch";
    case Family::switching_arch:
      return "switching_arch";
    case Family::gar:
      return "gar";
    case Family::inar1:
      return "inar1";
    case Family::glm_poisson:
      return "glm_poisson";
    case Family::glm_garch_poisson:
      return "glm_garch_poisson";
    case Family::generic:
      return "generic";
  }
  return "?";
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001B3ULL;
  }
  return h;
}

ReportBundle run_experiment(const ExperimentConfig& config) {
  return ExperimentRunner(config).run(true);
}

ReportBundle evaluate_bounds_only(const ExperimentConfig& config) {
  return ExperimentRunner(config).run(false);
}

void emit_reports(const ReportBundle& bundle, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir + "': " +
                             ec.message());
  }

  {
    std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
    if (!csv) {
      throw std::runtime_error("cannot write results.csv under '" + out_dir + "'");
    }
    csv << "experiment_id,model_family,n,x,side,convention,empirical_tail,ci_low,ci_high,"
           "bound_name,bound_value,i1,i2,clipped,dominated,margin,seed\n";
    for (const auto& row : bundle.rows) {
      std::string line;
      csv_field(line, row.experiment_id, true);
      csv_field(line, row.model_family, false);
      csv_field(line, std::to_string(row.n), false);
      csv_field(line, format_double(row.x), false);
      csv_field(line, row.side, false);
      csv_field(line, row.convention, false);
      csv_field(line, row.has_empirical ? format_double(row.empirical) : "", false);
      csv_field(line, row.has_empirical ? format_double(row.ci_lo) : "", false);
      csv_field(line, row.has_empirical ? format_double(row.ci_hi) : "", false);
      csv_field(line, row.bound_name, false);
      csv_field(line, format_double(row.bound_value), false);
      csv_field(line, format_double(row.i1), false);
      csv_field(line, format_double(row.i2), false);
      csv_field(line, row.clipped ? "true" : "false", false);
      csv_field(line, row.has_empirical ? (row.dominated ? "true" : "false") : "", false);
      csv_field(line, row.has_empirical ? format_double(row.margin) : "", false);
      csv_field(line, std::to_string(row.seed), false);
      csv << line << "\n";
    }
  }

  {
    nlohmann::json constants = nlohmann::json::array();
    for (const auto& c : bundle.constants) {
      nlohmann::json entry{{"bound", c.bound},       {"name", c.name},
                           {"n", c.n},               {"value", c.value},
                           {"se", c.se},             {"provenance", c.provenance},
                           {"samples", c.samples}};
      if (c.k != 0) entry["k"] = c.k;
      constants.push_back(std::move(entry));
    }
    nlohmann::json doc{{"experiment_id", bundle.experiment_id},
                       {"constants", std::move(constants)},
                       {"annotations", bundle.annotations}};
    std::ofstream out(fs::path(out_dir) / "constants.json", std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write constants.json under '" + out_dir + "'");
    }
    out << doc.dump(2) << "\n";
  }

  {
    nlohmann::json manifest{{"tool", "chainbound"},
                            {"version", "0.1.0"},
                            {"experiment_id", bundle.experiment_id},
                            {"master_seed", bundle.master_seed},
                            {"domination_failures", bundle.domination_failures}};
    manifest["config"] =
        bundle.raw_config.empty() ? nlohmann::json() : nlohmann::json::parse(bundle.raw_config);
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write manifest.json under '" + out_dir + "'");
    }
    out << manifest.dump(2) << "\n";
  }
}

}  // namespace chainbound
