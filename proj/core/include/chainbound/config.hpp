#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chainbound/martingale.hpp"
#include "chainbound/model.hpp"

namespace chainbound {

// One requested bound with its constants: each required constant is either
// supplied as a number or listed for estimation from dominator samples.
struct BoundSpec {
  std::string name;     // subgaussian | semi_exponential |
                        // semi_exponential_conditional | fuk_nagaev |
                        // weak_von_bahr_esseen | mz_moment | vbe_moment |
                        // rosenthal_moment | gar_corollary
  std::string variant;  // subgaussian: sharp | simple
  double p = 2.0;
  double delta = 1.0;
  double alpha = 0.5;
  int l_max = 8;
  std::map<std::string, double> supplied;  // constant name -> value
  std::set<std::string> estimate;          // constants to estimate
  std::vector<double> thresholds;          // per-bound x grid (else global)
};

struct ExperimentConfig {
  std::string experiment_id;
  ChainModel model;
  double metric_alpha = 1.0;
  Functional functional;
  std::vector<long long> horizons;
  std::vector<double> thresholds;
  std::vector<BoundSpec> bounds;
  long long replications = 10000;
  int m_inner = 256;
  int m_outer = 4096;
  std::uint64_t master_seed = 0;
  int threads = 0;
  double inflation_ses = 3.0;
  int contraction_pairs = 0;  // 0 disables the certificate spot check
  std::string output_dir = "out";
  std::string raw_json;  // canonical echo for the manifest
};

// Parses and validates a JSON experiment config. On failure `config` is
// empty and `errors` lists every violation found, not just the first.
struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value(); }
};

ParseResult parse_config(const std::string& text);

ParseResult parse_config_file(const std::string& path);

}  // namespace chainbound
