#pragma once

#include <string>
#include <vector>

#include "chainbound/config.hpp"
#include "chainbound/mc.hpp"

namespace chainbound {

// Every constant a bound consumed, with its provenance. Estimated entries
// carry the standard error used for inflation; supplied entries carry
// se = 0.
struct ConstantRecord {
  std::string bound;
  std::string name;
  long long n = 0;
  long long k = 0;  // 0 when not step-indexed
  double value = 0.0;
  double se = 0.0;
  std::string provenance;  // "supplied" | "estimated"
  long long samples = 0;
};

// One results.csv row: a bound value at (n, x, side) next to its
// empirical counterpart.
struct ComparisonRow {
  std::string experiment_id;
  std::string model_family;
  long long n = 0;
  double x = 0.0;
  std::string side;
  std::string convention;
  double empirical = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string bound_name;
  double bound_value = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  bool clipped = false;
  bool dominated = false;
  double margin = 0.0;
  std::uint64_t seed = 0;
  bool has_empirical = true;
};

struct ReportBundle {
  std::string experiment_id;
  std::string model_family;
  std::string raw_config;
  std::uint64_t master_seed = 0;
  std::vector<ComparisonRow> rows;
  std::vector<ConstantRecord> constants;
  std::vector<std::string> annotations;
  long long domination_failures = 0;  // unclipped rows with dominated=false
};

// Full pipeline: certificate check, dominator estimation, constant
// estimation, bound grid, Monte Carlo grid, domination comparisons.
// Partial failures annotate the bundle instead of aborting it.
ReportBundle run_experiment(const ExperimentConfig& config);

// Bound grid only, every constant supplied; no simulation.
ReportBundle evaluate_bounds_only(const ExperimentConfig& config);

// Writes results.csv, constants.json and manifest.json under out_dir.
void emit_reports(const ReportBundle& bundle, const std::string& out_dir);

const char* family_name(Family family);

// 17-significant-digit decimal rendering (round-trip exact).
std::string format_double(double value);

// Stable 64-bit FNV-1a string hash used to derive experiment stream ids.
std::uint64_t stable_hash(std::string_view text);

}  // namespace chainbound
