// chainbound command line: validate experiment configs, run bound
// certification experiments, and spot-check the martingale decomposition.
//
// Exit codes: 0 ok, 1 config error, 2 runtime error, 3 domination failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chainbound/martingale.hpp"
#include "chainbound/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;
constexpr int kExitDominationFailure = 3;

std::optional<chainbound::ExperimentConfig> load_config(const std::string& path) {
  auto parsed = chainbound::parse_config_file(path);
  if (!parsed.ok()) {
    std::cerr << "config '" << path << "' is invalid:\n";
    for (const auto& e : parsed.errors) {
      std::cerr << "  - " << e << "\n";
    }
    return std::nullopt;
  }
  return std::move(parsed.config);
}

int cmd_validate(const std::string& path) {
  auto cfg = load_config(path);
  if (!cfg) {
    return kExitConfigError;
  }
  std::cout << "config ok: experiment '" << cfg->experiment_id << "', family "
            << chainbound::family_name(cfg->model.family) << ", rho = "
            << chainbound::certified_rho(cfg->model) << "\n";
  return kExitOk;
}

int emit_and_report(const chainbound::ReportBundle& bundle, const std::string& out_dir) {
  chainbound::emit_reports(bundle, out_dir);
  for (const auto& note : bundle.annotations) {
    std::cerr << "note: " << note << "\n";
  }
  std::cout << "wrote " << out_dir << "/results.csv (" << bundle.rows.size() << " rows), "
            << out_dir << "/constants.json, " << out_dir << "/manifest.json\n";
  if (bundle.domination_failures > 0) {
    std::cerr << bundle.domination_failures << " unclipped comparisons not dominated\n";
    return kExitDominationFailure;
  }
  return kExitOk;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out, std::optional<long long> replications,
            std::optional<int> threads) {
  auto cfg = load_config(path);
  if (!cfg) {
    return kExitConfigError;
  }
  if (seed) cfg->master_seed = *seed;
  if (out) cfg->output_dir = *out;
  if (replications) cfg->replications = *replications;
  if (threads) cfg->threads = *threads;
  const auto bundle = chainbound::run_experiment(*cfg);
  return emit_and_report(bundle, cfg->output_dir);
}

int cmd_bounds_only(const std::string& path, std::optional<std::string> out) {
  auto cfg = load_config(path);
  if (!cfg) {
    return kExitConfigError;
  }
  if (out) cfg->output_dir = *out;
  const auto bundle = chainbound::evaluate_bounds_only(*cfg);
  chainbound::emit_reports(bundle, cfg->output_dir);
  for (const auto& note : bundle.annotations) {
    std::cerr << "note: " << note << "\n";
  }
  std::cout << "wrote " << cfg->output_dir << "/results.csv (" << bundle.rows.size()
            << " rows, bounds only)\n";
  return kExitOk;
}

int cmd_martingale_check(const std::string& path, long long n_override, int replications,
                         int m_future) {
  auto cfg = load_config(path);
  if (!cfg) {
    return kExitConfigError;
  }
  long long n = n_override;
  if (n == 0) {
    n = cfg->horizons.front();
    for (const long long h : cfg->horizons) {
      n = std::min(n, h);
    }
  }
  if (n > 12) {
    std::cerr << "martingale-check: capping n at 12 (nested Monte Carlo cost)\n";
    n = 12;
  }
  const chainbound::RngPolicy policy{cfg->master_seed,
                                     chainbound::stable_hash(cfg->experiment_id)};
  const auto prop21 = chainbound::check_prop21(cfg->model, cfg->functional, n, replications,
                                               m_future, policy);
  const auto bins = chainbound::check_martingale_bins(cfg->model, cfg->functional, n,
                                                      replications, m_future, policy);
  std::cout << "decomposition check at n = " << n << " over " << replications
            << " paths (" << (prop21.exact ? "closed-form" : "nested Monte Carlo") << ")\n";
  std::cout << "  |M_1| <= K_{n-1} G(X_1): " << prop21.m1_violations << " violations\n";
  for (long long k = 2; k <= n; ++k) {
    std::cout << "  |M_" << k << "| <= K_{n-" << k << "} H_" << k << ": "
              << prop21.mk_violations[static_cast<std::size_t>(k - 2)] << " violations\n";
  }
  std::cout << "  conditional-mean bins: worst |z| = " << bins.worst_z
            << (bins.pass ? " (pass)" : " (FAIL)") << "\n";
  if (prop21.total_violations() > 0 || !bins.pass) {
    return kExitDominationFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deviation/moment bound certification for composition-of-random-function chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<long long> replications;
  std::optional<int> threads;

  auto* validate = app.add_subcommand("validate", "validate an experiment config");
  validate->add_option("config", config_path, "JSON config path")->required();

  auto* run = app.add_subcommand("run", "run an experiment and emit reports");
  run->add_option("config", config_path, "JSON config path")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out_dir, "override the output directory");
  run->add_option("--replications", replications, "override the replication count");
  run->add_option("--threads", threads, "worker thread count (0 = hardware)");

  auto* bounds_only = app.add_subcommand("bounds-only", "evaluate bounds without simulation");
  bounds_only->add_option("config", config_path, "JSON config path")->required();
  bounds_only->add_option("--out", out_dir, "override the output directory");

  long long mc_n = 0;
  int mc_replications = 200;
  int mc_future = 400;
  auto* mcheck = app.add_subcommand("martingale-check",
                                    "verify the martingale decomposition at small n");
  mcheck->add_option("config", config_path, "JSON config path")->required();
  mcheck->add_option("--n", mc_n, "horizon (default: smallest configured, capped at 12)");
  mcheck->add_option("--replications", mc_replications, "decomposition replications");
  mcheck->add_option("--m-future", mc_future, "nested continuations per conditional mean");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return cmd_validate(config_path);
    }
    if (run->parsed()) {
      return cmd_run(config_path, seed, out_dir, replications, threads);
    }
    if (bounds_only->parsed()) {
      return cmd_bounds_only(config_path, out_dir);
    }
    if (mcheck->parsed()) {
      return cmd_martingale_check(config_path, mc_n, mc_replications, mc_future);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}
