#include "chainbound/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chainbound {

namespace {

using nlohmann::json;

class Validator {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& where, const std::string& what) {
    errors.push_back(where + ": " + what);
  }

  // Strict-mode key check: anything outside `allowed` is an error.
  void check_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.count(key)) {
        fail(where, "unknown key '" + key + "'");
      }
    }
  }

  bool require(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) {
      fail(where, "missing required key '" + key + "'");
      return false;
    }
    return true;
  }

  std::optional<double> number(const json& obj, const std::string& where,
                               const std::string& key) {
    if (!require(obj, where, key)) return std::nullopt;
    if (!obj[key].is_number()) {
      fail(where + "." + key, "expected a number");
      return std::nullopt;
    }
    return obj[key].get<double>();
  }
};

std::optional<ScalarLaw> parse_law(const json& j, const std::string& where, Validator& v) {
  if (!j.is_object()) {
    v.fail(where, "law must be an object");
    return std::nullopt;
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    v.fail(where, "law needs a string 'kind'");
    return std::nullopt;
  }
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "point_mass") {
      v.check_keys(j, where, {"kind", "value"});
      const auto val = v.number(j, where, "value");
      if (!val) return std::nullopt;
      return ScalarLaw::point(*val);
    }
    if (kind == "rademacher") {
      v.check_keys(j, where, {"kind"});
      return ScalarLaw::rademacher();
    }
    if (kind == "gaussian") {
      v.check_keys(j, where, {"kind", "mean", "stddev"});
      const auto mean = v.number(j, where, "mean");
      const auto sd = v.number(j, where, "stddev");
      if (!mean || !sd) return std::nullopt;
      return ScalarLaw::gaussian(*mean, *sd);
    }
    if (kind == "uniform") {
      v.check_keys(j, where, {"kind", "lo", "hi"});
      const auto lo = v.number(j, where, "lo");
      const auto hi = v.number(j, where, "hi");
      if (!lo || !hi) return std::nullopt;
      return ScalarLaw::uniform(*lo, *hi);
    }
    if (kind == "bernoulli") {
      v.check_keys(j, where, {"kind", "q"});
      const auto q = v.number(j, where, "q");
      if (!q) return std::nullopt;
      return ScalarLaw::bernoulli(*q);
    }
    if (kind == "poisson") {
      v.check_keys(j, where, {"kind", "mean"});
      const auto mean = v.number(j, where, "mean");
      if (!mean) return std::nullopt;
      return ScalarLaw::poisson(*mean);
    }
    if (kind == "choice") {
      v.check_keys(j, where, {"kind", "support"});
      if (!v.require(j, where, "support")) return std::nullopt;
      if (!j["support"].is_array() || j["support"].empty()) {
        v.fail(where + ".support", "expected a nonempty array");
        return std::nullopt;
      }
      std::vector<double> support;
      for (const auto& e : j["support"]) {
        if (!e.is_number()) {
          v.fail(where + ".support", "entries must be numbers");
          return std::nullopt;
        }
        support.push_back(e.get<double>());
      }
      return ScalarLaw::choice(std::move(support));
    }
    if (kind == "pareto") {
      v.check_keys(j, where, {"kind", "index", "scale", "symmetric"});
      const auto index = v.number(j, where, "index");
      const auto scale = v.number(j, where, "scale");
      if (!index || !scale) return std::nullopt;
      bool symmetric = false;
      if (j.contains("symmetric")) {
        if (!j["symmetric"].is_boolean()) {
          v.fail(where + ".symmetric", "expected a boolean");
          return std::nullopt;
        }
        symmetric = j["symmetric"].get<bool>();
      }
      return ScalarLaw::pareto(*index, *scale, symmetric);
    }
  } catch (const std::exception& e) {
    v.fail(where, e.what());
    return std::nullopt;
  }
  v.fail(where, "unknown law kind '" + kind + "'");
  return std::nullopt;
}

// A schedule entry is either one law object (constant) or an array of them.
std::optional<Schedule<ScalarLaw>> parse_law_schedule(const json& j, const std::string& where,
                                                      Validator& v) {
  std::vector<ScalarLaw> rows;
  if (j.is_array()) {
    if (j.empty()) {
      v.fail(where, "schedule must be nonempty");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto law = parse_law(j[i], where + "[" + std::to_string(i) + "]", v);
      if (!law) return std::nullopt;
      rows.push_back(std::move(*law));
    }
  } else {
    auto law = parse_law(j, where, v);
    if (!law) return std::nullopt;
    rows.push_back(std::move(*law));
  }
  return Schedule<ScalarLaw>(std::move(rows));
}

std::optional<Schedule<double>> parse_number_schedule(const json& j, const std::string& where,
                                                      Validator& v) {
  std::vector<double> rows;
  if (j.is_array()) {
    if (j.empty()) {
      v.fail(where, "schedule must be nonempty");
      return std::nullopt;
    }
    for (const auto& e : j) {
      if (!e.is_number()) {
        v.fail(where, "entries must be numbers");
        return std::nullopt;
      }
      rows.push_back(e.get<double>());
    }
  } else if (j.is_number()) {
    rows.push_back(j.get<double>());
  } else {
    v.fail(where, "expected a number or array of numbers");
    return std::nullopt;
  }
  return Schedule<double>(std::move(rows));
}

std::optional<std::vector<ScalarLaw>> parse_initial(const json& j, const std::string& where,
                                                    Validator& v, int dim) {
  std::vector<ScalarLaw> laws;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto law = parse_law(j[i], where + "[" + std::to_string(i) + "]", v);
      if (!law) return std::nullopt;
      laws.push_back(std::move(*law));
    }
  } else {
    auto law = parse_law(j, where, v);
    if (!law) return std::nullopt;
    laws.push_back(std::move(*law));
  }
  if (static_cast<int>(laws.size()) != dim) {
    v.fail(where, "initial law count " + std::to_string(laws.size()) +
                      " does not match state dimension " + std::to_string(dim));
    return std::nullopt;
  }
  return laws;
}

std::optional<ChainModel> parse_model(const json& j, Validator& v) {
  const std::string where = "model";
  if (!j.is_object()) {
    v.fail(where, "expected an object");
    return std::nullopt;
  }
  v.check_keys(j, where, {"family", "state_dim", "metric_q", "initial", "schedule", "rho",
                          "weight"});
  if (!v.require(j, where, "family") || !j["family"].is_string()) {
    v.fail(where + ".family", "expected a string");
    return std::nullopt;
  }
  const std::string family = j["family"].get<std::string>();
  if (!v.require(j, where, "schedule") || !j["schedule"].is_object()) {
    v.fail(where + ".schedule", "expected an object");
    return std::nullopt;
  }
  if (!v.require(j, where, "initial")) return std::nullopt;
  const json& sched = j["schedule"];
  const std::string sw = where + ".schedule";

  try {
    std::optional<ChainModel> model;
    if (family == "arch") {
      v.check_keys(sched, sw, {"a", "b", "noise"});
      if (!v.require(sched, sw, "a") || !v.require(sched, sw, "b") ||
          !v.require(sched, sw, "noise")) {
        return std::nullopt;
      }
      auto a = parse_number_schedule(sched["a"], sw + ".a", v);
      auto b = parse_number_schedule(sched["b"], sw + ".b", v);
      auto noise = parse_law_schedule(sched["noise"], sw + ".noise", v);
      auto initial = parse_initial(j["initial"], where + ".initial", v, 1);
      if (!a || !b || !noise || !initial) return std::nullopt;
      model = make_arch(std::move(*a), std::move(*b), std::move(*noise), (*initial)[0]);
    } else if (family == "switching_arch") {
      v.check_keys(sched, sw, {"a", "b", "a2", "b2", "noise", "switch_q"});
      for (const char* key : {"a", "b", "a2", "b2", "noise", "switch_q"}) {
        if (!v.require(sched, sw, key)) return std::nullopt;
      }
      auto a = parse_number_schedule(sched["a"], sw + ".a", v);
      auto b = parse_number_schedule(sched["b"], sw + ".b", v);
      auto a2 = parse_number_schedule(sched["a2"], sw + ".a2", v);
      auto b2 = parse_number_schedule(sched["b2"], sw + ".b2", v);
      auto noise = parse_law_schedule(sched["noise"], sw + ".noise", v);
      auto q = parse_number_schedule(sched["switch_q"], sw + ".switch_q", v);
      auto initial = parse_initial(j["initial"], where + ".initial", v, 1);
      if (!a || !b || !a2 || !b2 || !noise || !q || !initial) return std::nullopt;
      model = make_switching(std::move(*a), std::move(*b), std::move(*a2), std::move(*b2),
                             std::move(*noise), std::move(*q), (*initial)[0]);
    } else if (family == "gar") {
      v.check_keys(sched, sw, {"multiplier", "offset"});
      if (!v.require(sched, sw, "multiplier") || !v.require(sched, sw, "offset")) {
        return std::nullopt;
      }
      auto mult = parse_law_schedule(sched["multiplier"], sw + ".multiplier", v);
      auto off = parse_law_schedule(sched["offset"], sw + ".offset", v);
      int dim = 1;
      if (j.contains("state_dim")) {
        if (!j["state_dim"].is_number_integer() || j["state_dim"].get<int>() < 1) {
          v.fail(where + ".state_dim", "expected a positive integer");
          return std::nullopt;
        }
        dim = j["state_dim"].get<int>();
      }
      auto initial = parse_initial(j["initial"], where + ".initial", v, dim);
      if (!mult || !off || !initial) return std::nullopt;
      if (dim == 1) {
        model = make_gar(std::move(*mult), std::move(*off), (*initial)[0]);
      } else {
        double q = 1.0;
        if (j.contains("metric_q")) {
          q = j["metric_q"].get<double>();
        }
        model = make_gar_vector(dim, std::move(*mult), std::move(*off), std::move(*initial), q);
      }
    } else if (family == "inar1") {
      v.check_keys(sched, sw, {"immigration", "offspring"});
      if (!v.require(sched, sw, "immigration") || !v.require(sched, sw, "offspring")) {
        return std::nullopt;
      }
      auto imm = parse_law_schedule(sched["immigration"], sw + ".immigration", v);
      auto off = parse_law_schedule(sched["offspring"], sw + ".offspring", v);
      auto initial = parse_initial(j["initial"], where + ".initial", v, 1);
      if (!imm || !off || !initial) return std::nullopt;
      model = make_inar1(std::move(*imm), std::move(*off), (*initial)[0]);
    } else if (family == "glm_poisson") {
      v.check_keys(sched, sw, {"intercept", "slope"});
      if (!v.require(sched, sw, "intercept") || !v.require(sched, sw, "slope")) {
        return std::nullopt;
      }
      auto c = parse_number_schedule(sched["intercept"], sw + ".intercept", v);
      auto r = parse_number_schedule(sched["slope"], sw + ".slope", v);
      auto initial = parse_initial(j["initial"], where + ".initial", v, 1);
      if (!c || !r || !initial) return std::nullopt;
      model = make_glm_poisson(std::move(*c), std::move(*r), (*initial)[0]);
    } else if (family == "glm_garch_poisson") {
      v.check_keys(sched, sw, {"intercept", "lambda_coef", "count_coef"});
      for (const char* key : {"intercept", "lambda_coef", "count_coef"}) {
        if (!v.require(sched, sw, key)) return std::nullopt;
      }
      auto c = parse_number_schedule(sched["intercept"], sw + ".intercept", v);
      auto u = parse_number_schedule(sched["lambda_coef"], sw + ".lambda_coef", v);
      auto w = parse_number_schedule(sched["count_coef"], sw + ".count_coef", v);
      double weight = 1.0;
      if (j.contains("weight")) {
        weight = j["weight"].get<double>();
      }
      auto initial = parse_initial(j["initial"], where + ".initial", v, 2);
      if (!c || !u || !w || !initial) return std::nullopt;
      model = make_glm_garch(std::move(*c), std::move(*u), std::move(*w), weight,
                             std::move(*initial));
    } else {
      v.fail(where + ".family", "unknown family '" + family + "'");
      return std::nullopt;
    }

    if (j.contains("rho")) {
      if (!j["rho"].is_number()) {
        v.fail(where + ".rho", "expected a number");
        return std::nullopt;
      }
      const double rho = j["rho"].get<double>();
      if (!(rho >= 0.0) || rho >= 1.0) {
        v.fail(where + ".rho", "non-contractive: rho must lie in [0, 1)");
        return std::nullopt;
      }
      model->user_rho = rho;
    }
    return model;
  } catch (const NonContractiveError& e) {
    v.fail(where, std::string("non-contractive: ") + e.what());
    return std::nullopt;
  } catch (const std::exception& e) {
    v.fail(where, e.what());
    return std::nullopt;
  }
}

std::optional<Functional> parse_functional(const json& j, const ChainModel& model,
                                           Validator& v) {
  const std::string where = "functional";
  if (!j.is_object()) {
    v.fail(where, "expected an object");
    return std::nullopt;
  }
  v.check_keys(j, where, {"kind", "anchor"});
  if (!j.contains("kind") || !j["kind"].is_string()) {
    v.fail(where + ".kind", "expected a string");
    return std::nullopt;
  }
  const std::string kind = j["kind"].get<std::string>();
  std::vector<double> anchor(static_cast<std::size_t>(model.state_dim()), 0.0);
  if (j.contains("anchor")) {
    if (!j["anchor"].is_array() ||
        j["anchor"].size() != static_cast<std::size_t>(model.state_dim())) {
      v.fail(where + ".anchor", "expected an array matching the state dimension");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < anchor.size(); ++i) {
      anchor[i] = j["anchor"][i].get<double>();
    }
  }
  if (kind == "plain_sum") {
    if (model.state_dim() != 1) {
      v.fail(where, "plain_sum needs a scalar state");
      return std::nullopt;
    }
    return Functional::plain_sum();
  }
  if (kind == "coordinate_sum") {
    return Functional::coordinate_sum(std::move(anchor), model.metric);
  }
  if (kind == "max_distance") {
    return Functional::max_distance(std::move(anchor), model.metric);
  }
  v.fail(where + ".kind", "unknown functional kind '" + kind + "'");
  return std::nullopt;
}

const std::set<std::string>& known_bounds() {
  static const std::set<std::string> names{
      "subgaussian",     "semi_exponential", "semi_exponential_conditional",
      "fuk_nagaev",      "weak_von_bahr_esseen", "mz_moment",
      "vbe_moment",      "rosenthal_moment", "gar_corollary"};
  return names;
}

std::optional<BoundSpec> parse_bound(const json& j, const std::string& where, Validator& v) {
  if (!j.is_object()) {
    v.fail(where, "expected an object");
    return std::nullopt;
  }
  v.check_keys(j, where, {"name", "variant", "p", "delta", "alpha", "l_max", "thresholds",
                          "epsilon", "C1", "C2", "C3", "Cp", "A"});
  if (!j.contains("name") || !j["name"].is_string()) {
    v.fail(where + ".name", "expected a string");
    return std::nullopt;
  }
  BoundSpec spec;
  spec.name = j["name"].get<std::string>();
  if (!known_bounds().count(spec.name)) {
    v.fail(where + ".name", "unknown bound '" + spec.name + "'");
    return std::nullopt;
  }
  if (j.contains("variant")) {
    spec.variant = j["variant"].get<std::string>();
    if (spec.variant != "sharp" && spec.variant != "simple") {
      v.fail(where + ".variant", "expected 'sharp' or 'simple'");
      return std::nullopt;
    }
  }
  for (const char* key : {"p", "delta", "alpha"}) {
    if (j.contains(key)) {
      if (!j[key].is_number()) {
        v.fail(where + "." + key, "expected a number");
        return std::nullopt;
      }
      const double value = j[key].get<double>();
      if (std::string(key) == "p") spec.p = value;
      if (std::string(key) == "delta") spec.delta = value;
      if (std::string(key) == "alpha") spec.alpha = value;
    }
  }
  if (j.contains("l_max")) {
    spec.l_max = j["l_max"].get<int>();
  }
  if (j.contains("thresholds")) {
    if (!j["thresholds"].is_array()) {
      v.fail(where + ".thresholds", "expected an array");
      return std::nullopt;
    }
    for (const auto& e : j["thresholds"]) {
      spec.thresholds.push_back(e.get<double>());
    }
  }
  for (const char* key : {"epsilon", "C1", "C2", "C3", "Cp"}) {
    if (!j.contains(key)) continue;
    if (j[key].is_number()) {
      spec.supplied[key] = j[key].get<double>();
    } else if (j[key].is_string() && j[key].get<std::string>() == "estimate") {
      spec.estimate.insert(key);
    } else {
      v.fail(where + "." + key, "expected a number or \"estimate\"");
      return std::nullopt;
    }
  }
  if (j.contains("A")) {
    if (j["A"].is_string() && j["A"].get<std::string>() == "estimate") {
      spec.estimate.insert("A");
    } else {
      v.fail(where + ".A", "per-step moments can only be \"estimate\" in configs");
      return std::nullopt;
    }
  }
  return spec;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    result.errors.push_back(std::string("invalid JSON: ") + e.what());
    return result;
  }
  if (!root.is_object()) {
    result.errors.push_back("config: expected a JSON object");
    return result;
  }

  Validator v;
  v.check_keys(root, "config",
               {"experiment_id", "model", "metric_alpha", "functional", "horizons",
                "thresholds", "bounds", "replications", "m_inner", "m_outer", "master_seed",
                "threads", "inflation_ses", "contraction_pairs", "output_dir"});

  ExperimentConfig cfg;
  if (v.require(root, "config", "experiment_id") && root["experiment_id"].is_string()) {
    cfg.experiment_id = root["experiment_id"].get<std::string>();
  } else if (root.contains("experiment_id")) {
    v.fail("config.experiment_id", "expected a string");
  }

  std::optional<ChainModel> model;
  if (v.require(root, "config", "model")) {
    model = parse_model(root["model"], v);
  }

  if (model && root.contains("metric_alpha")) {
    const double alpha = root["metric_alpha"].get<double>();
    if (!(alpha > 0.0) || alpha > 1.0) {
      v.fail("config.metric_alpha", "must lie in (0, 1]");
    } else {
      cfg.metric_alpha = alpha;
      *model = with_alpha_metric(*model, alpha);
    }
  }

  std::optional<Functional> functional;
  if (model && v.require(root, "config", "functional")) {
    functional = parse_functional(root["functional"], *model, v);
  }

  if (v.require(root, "config", "horizons")) {
    if (!root["horizons"].is_array() || root["horizons"].empty()) {
      v.fail("config.horizons", "expected a nonempty array");
    } else {
      for (const auto& e : root["horizons"]) {
        if (!e.is_number_integer() || e.get<long long>() < 2) {
          v.fail("config.horizons", "entries must be integers >= 2");
          break;
        }
        cfg.horizons.push_back(e.get<long long>());
      }
    }
  }
  if (root.contains("thresholds")) {
    if (!root["thresholds"].is_array()) {
      v.fail("config.thresholds", "expected an array");
    } else {
      for (const auto& e : root["thresholds"]) {
        if (!e.is_number() || !(e.get<double>() > 0.0)) {
          v.fail("config.thresholds", "entries must be positive numbers");
          break;
        }
        cfg.thresholds.push_back(e.get<double>());
      }
    }
  }
  if (root.contains("bounds")) {
    if (!root["bounds"].is_array()) {
      v.fail("config.bounds", "expected an array");
    } else {
      for (std::size_t i = 0; i < root["bounds"].size(); ++i) {
        auto spec =
            parse_bound(root["bounds"][i], "config.bounds[" + std::to_string(i) + "]", v);
        if (spec) {
          if (spec->thresholds.empty() && cfg.thresholds.empty() &&
              spec->name != "mz_moment" && spec->name != "vbe_moment" &&
              spec->name != "rosenthal_moment" && spec->name != "gar_corollary") {
            v.fail("config.bounds[" + std::to_string(i) + "]",
                   "no thresholds given (neither per-bound nor global)");
          } else {
            cfg.bounds.push_back(std::move(*spec));
          }
        }
      }
    }
  }

  const auto integer_field = [&](const char* key, auto& target, long long lo) {
    if (!root.contains(key)) return;
    if (!root[key].is_number_integer() || root[key].get<long long>() < lo) {
      v.fail(std::string("config.") + key,
             "expected an integer >= " + std::to_string(lo));
      return;
    }
    target = static_cast<std::remove_reference_t<decltype(target)>>(root[key].get<long long>());
  };
  integer_field("replications", cfg.replications, 100);
  integer_field("m_inner", cfg.m_inner, 1);
  integer_field("m_outer", cfg.m_outer, 2);
  integer_field("threads", cfg.threads, 0);
  integer_field("contraction_pairs", cfg.contraction_pairs, 0);
  if (root.contains("master_seed")) {
    if (!root["master_seed"].is_number_integer()) {
      v.fail("config.master_seed", "expected an integer");
    } else {
      cfg.master_seed = root["master_seed"].get<std::uint64_t>();
    }
  }
  if (root.contains("inflation_ses")) {
    if (!root["inflation_ses"].is_number() || !(root["inflation_ses"].get<double>() >= 0.0)) {
      v.fail("config.inflation_ses", "expected a nonnegative number");
    } else {
      cfg.inflation_ses = root["inflation_ses"].get<double>();
    }
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) {
      v.fail("config.output_dir", "expected a string");
    } else {
      cfg.output_dir = root["output_dir"].get<std::string>();
    }
  }

  if (!v.errors.empty()) {
    result.errors = std::move(v.errors);
    return result;
  }
  cfg.model = std::move(*model);
  cfg.functional = std::move(*functional);
  cfg.raw_json = root.dump(2);
  result.config = std::move(cfg);
  return result;
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult result;
    result.errors.push_back("cannot open config file: " + path);
    return result;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace chainbound
