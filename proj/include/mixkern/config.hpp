#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mixkern/csv.hpp"
#include "mixkern/errors.hpp"
#include "mixkern/experiments.hpp"
#include "mixkern/kernels.hpp"
#include "mixkern/processes.hpp"
#include "mixkern/theory.hpp"

namespace mixkern {

/// Everything a run can be told through a config file.  Parsing is
/// fail-closed: unknown sections or keys and out-of-range values raise
/// immediately; absent keys take the defaults below, so a parsed config is
/// always fully materialized.  serialize_config emits the canonical form
/// (every key, fixed order); parse -> serialize -> parse is the identity.
struct run_config {
  model_spec model{};
  process_spec process{};

  estimator_kind estimator{estimator_kind::density};
  bandwidth_rule rule{bandwidth_rule::theory_optimal};
  kernel_family kfamily{kernel_family::epanechnikov};
  int order{2};
  int t{1024};
  std::vector<int> t_grid{512, 1024, 2048, 4096};
  int reps{200};
  std::vector<double> z_points{-0.5, 0.0, 0.5};
  double c{0.0};
  double fixed_b{0.3};
  double denom_floor{1e-12};
  int n{8};  ///< panel width for simulate / bandwidth
  int n_fixed{8};
  double alpha{1.0};
  bool panel_growth{false};
  int max_lag{20};
  int path_length{512};
  std::vector<double> envelope_z{0.0};
  double grid_min{-2.0};
  double grid_max{2.0};
  int grid_points{81};
  std::string sample{};

  std::string prefix{};
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] inline void bad_key_value(const std::string& key, const std::string& why) {
  raise("bad-range", "config key '" + key + "': " + why);
}

inline double cfg_double(const std::string& key, const std::string& val) {
  try {
    return parse_double(val);
  } catch (const error&) {
    bad_key_value(key, "cannot parse '" + val + "' as a number");
  }
}

/// Sizes admit "inf"; any infinity maps onto the finite sentinel so the
/// canonical form is stable.
inline double cfg_size(const std::string& key, const std::string& val) {
  const double x = cfg_double(key, val);
  if (std::isnan(x)) bad_key_value(key, "size cannot be nan");
  if (std::isinf(x) || x >= size_infinity) {
    if (x < 0) bad_key_value(key, "size must be >= 0");
    return size_infinity;
  }
  return x;
}

inline std::string fmt_size(double v) {
  return v >= size_infinity ? "inf" : fmt_double(v);
}

inline int cfg_int(const std::string& key, const std::string& val) {
  long long x = 0;
  try {
    x = parse_int(val);
  } catch (const error&) {
    bad_key_value(key, "cannot parse '" + val + "' as an integer");
  }
  if (x < -2147483648LL || x > 2147483647LL) bad_key_value(key, "integer out of range");
  return static_cast<int>(x);
}

inline bool cfg_bool(const std::string& key, const std::string& val) {
  if (val == "true") return true;
  if (val == "false") return false;
  bad_key_value(key, "expected 'true' or 'false'");
}

inline std::vector<double> cfg_double_list(const std::string& key, const std::string& val) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&]() {
    const std::string tok = trim(cur);
    if (tok.empty()) bad_key_value(key, "empty list element");
    out.push_back(cfg_double(key, tok));
    cur.clear();
  };
  for (char ch : val) {
    if (ch == ',') flush();
    else cur.push_back(ch);
  }
  flush();
  return out;
}

inline std::vector<int> cfg_int_list(const std::string& key, const std::string& val) {
  std::vector<int> out;
  std::string cur;
  auto flush = [&]() {
    const std::string tok = trim(cur);
    if (tok.empty()) bad_key_value(key, "empty list element");
    out.push_back(cfg_int(key, tok));
    cur.clear();
  };
  for (char ch : val) {
    if (ch == ',') flush();
    else cur.push_back(ch);
  }
  flush();
  return out;
}

inline void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) bad_key_value(key, why);
}

inline process_kind cfg_process_kind(const std::string& key, const std::string& val) {
  if (val == "iid") return process_kind::iid;
  if (val == "linear_gaussian") return process_kind::linear_gaussian;
  if (val == "arch_inf") return process_kind::arch_inf;
  if (val == "stoch_vol") return process_kind::stoch_vol;
  if (val == "panel_fixed_design") return process_kind::panel_fixed_design;
  if (val == "panel_shared_factor") return process_kind::panel_shared_factor;
  bad_key_value(key, "unknown process kind '" + val +
                         "' (allowed: iid, linear_gaussian, arch_inf, stoch_vol, "
                         "panel_fixed_design, panel_shared_factor)");
}

inline estimator_kind cfg_estimator(const std::string& key, const std::string& val) {
  if (val == "density") return estimator_kind::density;
  if (val == "regression_model1") return estimator_kind::regression_model1;
  if (val == "regression_model2") return estimator_kind::regression_model2;
  if (val == "panel_mean") return estimator_kind::panel_mean;
  bad_key_value(key, "unknown estimator '" + val +
                         "' (allowed: density, regression_model1, regression_model2, "
                         "panel_mean)");
}

inline bandwidth_rule cfg_rule(const std::string& key, const std::string& val) {
  if (val == "theory_optimal") return bandwidth_rule::theory_optimal;
  if (val == "misspecified_iid") return bandwidth_rule::misspecified_iid;
  if (val == "fixed") return bandwidth_rule::fixed;
  bad_key_value(key, "unknown bandwidth rule '" + val +
                         "' (allowed: theory_optimal, misspecified_iid, fixed)");
}

inline kernel_family cfg_kernel(const std::string& key, const std::string& val) {
  if (val == "rectangular") return kernel_family::rectangular;
  if (val == "epanechnikov") return kernel_family::epanechnikov;
  if (val == "gaussian") return kernel_family::gaussian;
  if (val == "polynomial") return kernel_family::polynomial;
  bad_key_value(key, "unknown kernel '" + val +
                         "' (allowed: rectangular, epanechnikov, gaussian, polynomial)");
}

inline std::string cfg_function(const std::string& key, const std::string& val, bool allow_empty) {
  if (val.empty()) {
    if (allow_empty) return val;
    bad_key_value(key, "function selector cannot be empty");
  }
  try {
    named_function(val, 0.0);  // raises on unknown selectors
  } catch (const error& e) {
    bad_key_value(key, e.what());
  }
  return val;
}

}  // namespace detail

inline run_config parse_config(const std::string& text) {
  run_config cfg;
  std::string section;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') raise("bad-range", "malformed section header: " + line);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "process" && section != "experiment" &&
          section != "output")
        raise("unknown-key", "unknown config section '" + section + "'");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) raise("bad-range", "malformed config line: " + line);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (section.empty()) raise("unknown-key", "key '" + key + "' appears before any section");
    const std::string full = section + "." + key;
    using namespace detail;

    if (section == "model") {
      if (key == "s") {
        cfg.model.s = cfg_double(full, val);
        require(cfg.model.s > 0, full, "smoothness must be positive");
      } else if (key == "r") {
        cfg.model.r = cfg_int(full, val);
        require(cfg.model.r >= 2 && cfg.model.r % 2 == 0 && cfg.model.r <= 8, full,
                "kernel order must be even, in [2, 8]");
      } else if (key == "d") {
        cfg.model.d = cfg_int(full, val);
        require(cfg.model.d >= 1 && cfg.model.d <= 8, full, "dimension must lie in [1, 8]");
      } else if (key == "q") {
        cfg.model.q = cfg_double(full, val);
        require(cfg.model.q > 0 && cfg.model.q < 1, full, "q must lie in (0, 1)");
      } else if (key == "q_f") {
        cfg.model.q_f = cfg_double(full, val);
        require(cfg.model.q_f > 0 && cfg.model.q_f <= 1, full, "q_f must lie in (0, 1]");
      } else if (key == "q_g") {
        cfg.model.q_g = cfg_double(full, val);
        require(cfg.model.q_g > 0 && cfg.model.q_g <= 1, full, "q_g must lie in (0, 1]");
      } else if (key == "v") {
        cfg.model.v = cfg_size(full, val);
        require(cfg.model.v >= 0, full, "size must be >= 0");
      } else if (key == "u") {
        cfg.model.u = cfg_size(full, val);
        require(cfg.model.u >= 0, full, "size must be >= 0");
      } else if (key == "theta") {
        cfg.model.theta = cfg_double(full, val);
        require(cfg.model.theta > 0.5, full, "theta must exceed 1/2");
      } else if (key == "ell") {
        cfg.model.ell = cfg_double(full, val);
        require(cfg.model.ell > 2, full, "ell must exceed 2");
      } else {
        raise("unknown-key", "unknown config key '" + full + "'");
      }
    } else if (section == "process") {
      if (key == "kind") {
        cfg.process.kind = cfg_process_kind(full, val);
      } else if (key == "theta") {
        cfg.process.theta = cfg_double(full, val);
        require(cfg.process.theta > 0.5, full, "theta must exceed 1/2");
      } else if (key == "delta") {
        cfg.process.delta = cfg_double(full, val);
        require(cfg.process.delta > 0, full, "delta must be positive");
      } else if (key == "innovation_bound") {
        cfg.process.innovation_bound = cfg_double(full, val);
        require(cfg.process.innovation_bound > 0 && cfg.process.innovation_bound < 1, full,
                "innovation bound must lie in (0, 1)");
      } else if (key == "gate") {
        cfg.process.gate = cfg_double(full, val);
        require(cfg.process.gate > 0, full, "gate must be positive");
      } else if (key == "a0") {
        cfg.process.a0 = cfg_double(full, val);
        require(cfg.process.a0 > 0, full, "a0 must be positive");
      } else if (key == "truncation") {
        cfg.process.truncation = cfg_int(full, val);
        require(cfg.process.truncation >= 0 && cfg.process.truncation <= 65536, full,
                "truncation must lie in [0, 65536] (0 = automatic)");
      } else if (key == "burn_in") {
        cfg.process.burn_in = cfg_int(full, val);
        require(cfg.process.burn_in >= -1, full, "burn_in must be >= -1 (-1 = automatic)");
      } else if (key == "phi") {
        cfg.process.phi = cfg_function(full, val, true);
      } else if (key == "h") {
        cfg.process.h = cfg_function(full, val, false);
      } else if (key == "sigma") {
        cfg.process.sigma = cfg_function(full, val, false);
      } else if (key == "z_source") {
        if (val != "linear" && val != "iid")
          bad_key_value(full, "z_source must be 'linear' or 'iid'");
        cfg.process.z_source = val;
      } else if (key == "noise_sd") {
        cfg.process.noise_sd = cfg_double(full, val);
        require(cfg.process.noise_sd >= 0, full, "noise_sd must be >= 0");
      } else if (key == "ar_coef") {
        cfg.process.ar_coef = cfg_double(full, val);
        require(std::fabs(cfg.process.ar_coef) < 1, full, "|ar_coef| must be < 1");
      } else if (key == "factor_loading") {
        cfg.process.factor_loading = cfg_double(full, val);
        require(cfg.process.factor_loading >= 0 && cfg.process.factor_loading <= 1, full,
                "factor loading must lie in [0, 1]");
      } else if (key == "n") {
        cfg.n = cfg_int(full, val);
        require(cfg.n >= 1, full, "panel width must be >= 1");
      } else {
        raise("unknown-key", "unknown config key '" + full + "'");
      }
    } else if (section == "experiment") {
      if (key == "estimator") {
        cfg.estimator = cfg_estimator(full, val);
      } else if (key == "rule") {
        cfg.rule = cfg_rule(full, val);
      } else if (key == "kernel") {
        cfg.kfamily = cfg_kernel(full, val);
      } else if (key == "order") {
        cfg.order = cfg_int(full, val);
        require(cfg.order >= 2 && cfg.order % 2 == 0 && cfg.order <= 8, full,
                "kernel order must be even, in [2, 8]");
      } else if (key == "t") {
        cfg.t = cfg_int(full, val);
        require(cfg.t >= 1, full, "t must be >= 1");
      } else if (key == "t_grid") {
        cfg.t_grid = cfg_int_list(full, val);
        for (int x : cfg.t_grid) require(x >= 8, full, "t_grid entries must be >= 8");
      } else if (key == "reps") {
        cfg.reps = cfg_int(full, val);
        require(cfg.reps >= 1, full, "reps must be >= 1");
      } else if (key == "z_points") {
        cfg.z_points = cfg_double_list(full, val);
      } else if (key == "c") {
        cfg.c = cfg_double(full, val);
        require(cfg.c >= 0, full, "c must be >= 0 (0 = sample scale)");
      } else if (key == "fixed_b") {
        cfg.fixed_b = cfg_double(full, val);
        require(cfg.fixed_b > 0, full, "fixed_b must be positive");
      } else if (key == "denom_floor") {
        cfg.denom_floor = cfg_double(full, val);
        require(cfg.denom_floor > 0, full, "denom_floor must be positive");
      } else if (key == "n_fixed") {
        cfg.n_fixed = cfg_int(full, val);
        require(cfg.n_fixed >= 1, full, "n_fixed must be >= 1");
      } else if (key == "alpha") {
        cfg.alpha = cfg_double(full, val);
        require(cfg.alpha > 0, full, "alpha must be positive");
      } else if (key == "panel_growth") {
        cfg.panel_growth = cfg_bool(full, val);
      } else if (key == "max_lag") {
        cfg.max_lag = cfg_int(full, val);
        require(cfg.max_lag >= 1 && cfg.max_lag <= 10000, full, "max_lag must lie in [1, 10000]");
      } else if (key == "path_length") {
        cfg.path_length = cfg_int(full, val);
        require(cfg.path_length >= 2, full, "path_length must be >= 2");
      } else if (key == "envelope_z") {
        cfg.envelope_z = cfg_double_list(full, val);
      } else if (key == "grid_min") {
        cfg.grid_min = cfg_double(full, val);
      } else if (key == "grid_max") {
        cfg.grid_max = cfg_double(full, val);
      } else if (key == "grid_points") {
        cfg.grid_points = cfg_int(full, val);
        require(cfg.grid_points >= 2 && cfg.grid_points <= 100000, full,
                "grid_points must lie in [2, 100000]");
      } else if (key == "sample") {
        cfg.sample = val;
      } else {
        raise("unknown-key", "unknown config key '" + full + "'");
      }
    } else {  // output
      if (key == "prefix") {
        cfg.prefix = val;
      } else {
        raise("unknown-key", "unknown config key '" + full + "'");
      }
    }
  }
  if (!(cfg.grid_min < cfg.grid_max))
    raise("bad-range", "config key 'experiment.grid_min': must be < grid_max");
  cfg.process.d = cfg.model.d;
  return cfg;
}

inline std::string serialize_config(const run_config& cfg) {
  using detail::fmt_size;
  std::ostringstream out;
  out << "[model]\n";
  out << "s = " << fmt_double(cfg.model.s) << "\n";
  out << "r = " << cfg.model.r << "\n";
  out << "d = " << cfg.model.d << "\n";
  out << "q = " << fmt_double(cfg.model.q) << "\n";
  out << "q_f = " << fmt_double(cfg.model.q_f) << "\n";
  out << "q_g = " << fmt_double(cfg.model.q_g) << "\n";
  out << "v = " << fmt_size(cfg.model.v) << "\n";
  out << "u = " << fmt_size(cfg.model.u) << "\n";
  out << "theta = " << fmt_double(cfg.model.theta) << "\n";
  out << "ell = " << fmt_double(cfg.model.ell) << "\n";
  out << "[process]\n";
  out << "kind = " << process_kind_name(cfg.process.kind) << "\n";
  out << "theta = " << fmt_double(cfg.process.theta) << "\n";
  out << "delta = " << fmt_double(cfg.process.delta) << "\n";
  out << "innovation_bound = " << fmt_double(cfg.process.innovation_bound) << "\n";
  out << "gate = " << fmt_double(cfg.process.gate) << "\n";
  out << "a0 = " << fmt_double(cfg.process.a0) << "\n";
  out << "truncation = " << cfg.process.truncation << "\n";
  out << "burn_in = " << cfg.process.burn_in << "\n";
  out << "phi = " << cfg.process.phi << "\n";
  out << "h = " << cfg.process.h << "\n";
  out << "sigma = " << cfg.process.sigma << "\n";
  out << "z_source = " << cfg.process.z_source << "\n";
  out << "noise_sd = " << fmt_double(cfg.process.noise_sd) << "\n";
  out << "ar_coef = " << fmt_double(cfg.process.ar_coef) << "\n";
  out << "factor_loading = " << fmt_double(cfg.process.factor_loading) << "\n";
  out << "n = " << cfg.n << "\n";
  out << "[experiment]\n";
  out << "estimator = " << estimator_kind_name(cfg.estimator) << "\n";
  out << "rule = " << bandwidth_rule_name(cfg.rule) << "\n";
  out << "kernel = " << family_name(cfg.kfamily) << "\n";
  out << "order = " << cfg.order << "\n";
  out << "t = " << cfg.t << "\n";
  out << "t_grid = ";
  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) out << (i ? "," : "") << cfg.t_grid[i];
  out << "\n";
  out << "reps = " << cfg.reps << "\n";
  out << "z_points = ";
  for (std::size_t i = 0; i < cfg.z_points.size(); ++i)
    out << (i ? "," : "") << fmt_double(cfg.z_points[i]);
  out << "\n";
  out << "c = " << fmt_double(cfg.c) << "\n";
  out << "fixed_b = " << fmt_double(cfg.fixed_b) << "\n";
  out << "denom_floor = " << fmt_double(cfg.denom_floor) << "\n";
  out << "n_fixed = " << cfg.n_fixed << "\n";
  out << "alpha = " << fmt_double(cfg.alpha) << "\n";
  out << "panel_growth = " << (cfg.panel_growth ? "true" : "false") << "\n";
  out << "max_lag = " << cfg.max_lag << "\n";
  out << "path_length = " << cfg.path_length << "\n";
  out << "envelope_z = ";
  for (std::size_t i = 0; i < cfg.envelope_z.size(); ++i)
    out << (i ? "," : "") << fmt_double(cfg.envelope_z[i]);
  out << "\n";
  out << "grid_min = " << fmt_double(cfg.grid_min) << "\n";
  out << "grid_max = " << fmt_double(cfg.grid_max) << "\n";
  out << "grid_points = " << cfg.grid_points << "\n";
  out << "sample = " << cfg.sample << "\n";
  out << "[output]\n";
  out << "prefix = " << cfg.prefix << "\n";
  return out.str();
}

}  // namespace mixkern
