#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixkern/csv.hpp"
#include "mixkern/errors.hpp"
#include "mixkern/estimators.hpp"
#include "mixkern/kernels.hpp"
#include "mixkern/processes.hpp"
#include "mixkern/seeds.hpp"
#include "mixkern/theory.hpp"

namespace mixkern {

/// Run fn(0..n-1), possibly on several threads.  Work items must write only
/// their own slots; the caller performs any reduction sequentially afterwards
/// so results are identical for every thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mtx;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct fit_result {
  double slope{0.0};
  double intercept{0.0};
  double slope_se{0.0};
};

/// Ordinary least squares of y on x (with intercept).
inline fit_result fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) raise("out-of-range", "line fit needs >= 2 matched points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) raise("out-of-range", "line fit needs non-constant x values");
  fit_result f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ys[i] - (f.intercept + f.slope * xs[i]);
      rss += e * e;
    }
    f.slope_se = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
  }
  return f;
}

enum class bandwidth_rule { theory_optimal, misspecified_iid, fixed };

inline const char* bandwidth_rule_name(bandwidth_rule r) {
  switch (r) {
    case bandwidth_rule::theory_optimal: return "theory_optimal";
    case bandwidth_rule::misspecified_iid: return "misspecified_iid";
    case bandwidth_rule::fixed: return "fixed";
  }
  return "?";
}

/// Full description of a Monte Carlo rate study.
struct experiment_plan {
  process_spec process{};
  model_spec model{};
  estimator_kind kind{estimator_kind::density};
  bandwidth_rule rule{bandwidth_rule::theory_optimal};
  kernel kern{};
  std::vector<int> t_grid{512, 1024, 2048, 4096};
  int reps{200};
  std::vector<double> z_points{-0.5, 0.0, 0.5};
  double c{0.0};        ///< bandwidth constant; 0 = per-replication sample scale
  double fixed_b{0.3};  ///< bandwidth under the fixed rule
  double denom_floor{1e-12};
  std::uint64_t master_seed{20260816u};
  int threads{1};
  bool panel_growth{false};  ///< panel arm: N = ceil(T^alpha) instead of n_fixed
  int n_fixed{8};
  double alpha{1.0};
  /// Test hook: when set, replaces simulation with a direct T -> MSE map so
  /// the aggregation and fitting stages can be checked exactly.
  std::function<double(int)> mse_override{};
};

struct rate_point {
  int t{0};
  double mse{0.0};
  double se{0.0};
  int n_excluded{0};
};

struct rate_report {
  std::vector<rate_point> points;
  double fitted_exponent{0.0};
  double fit_se{0.0};
  double theory_exponent{0.0};
  double margin{0.0};  ///< fitted_exponent - theory_exponent (signed)
  bool valid{true};    ///< false when any T saw > 1% excluded replications
};

namespace detail {

inline double std_normal_pdf(double z) {
  return 0.398942280401432677939946059934 * std::exp(-0.5 * z * z);
}

/// Ground-truth target for an experiment at a query point.  Raises
/// unsupported-combination when the process carries no usable truth for the
/// requested estimator.
inline double true_target(const experiment_plan& plan, const std::vector<double>& zq) {
  const process_kind pk = plan.process.kind;
  switch (plan.kind) {
    case estimator_kind::density: {
      if (pk == process_kind::arch_inf || pk == process_kind::panel_fixed_design ||
          pk == process_kind::panel_shared_factor)
        raise("unsupported-combination",
              "density rate studies need a design with a standard normal marginal");
      double f = 1.0;
      for (double z : zq) f *= std_normal_pdf(z);
      return f;
    }
    case estimator_kind::regression_model1:
    case estimator_kind::regression_model2: {
      if (pk == process_kind::stoch_vol) {
        const double sig = named_function(plan.process.sigma, zq[0]);
        return sig * sig;
      }
      if ((pk == process_kind::iid || pk == process_kind::linear_gaussian) &&
          !plan.process.phi.empty())
        return named_function(plan.process.phi, zq[0]);
      raise("unsupported-combination",
            "regression rate studies need a phi attachment or a volatility design");
    }
    case estimator_kind::panel_mean: {
      if (pk != process_kind::panel_fixed_design && pk != process_kind::panel_shared_factor)
        raise("unsupported-combination", "panel rate studies need a panel process");
      return named_function(plan.process.phi, zq[0]);
    }
  }
  raise("internal-error", "unreachable estimator kind");
}

inline double pooled_sd(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  s2 /= static_cast<double>(v.size());
  return s2 > 0.0 ? std::sqrt(s2) : 1.0;
}

/// Bandwidth for one replication.  c_eff is the user's constant, or the
/// replication's pooled design scale when the plan leaves c at 0.
inline double replication_bandwidth(const experiment_plan& plan, int t, int n,
                                    const std::vector<double>& z_data) {
  const double c_eff = plan.c > 0.0 ? plan.c : pooled_sd(z_data);
  const model_spec& m = plan.model;
  switch (plan.rule) {
    case bandwidth_rule::fixed:
      return plan.fixed_b;
    case bandwidth_rule::misspecified_iid:
      return c_eff * std::pow(static_cast<double>(t), -1.0 / (2.0 * m.rho() + m.d));
    case bandwidth_rule::theory_optimal: {
      if (plan.kind == estimator_kind::panel_mean) {
        const panel_exponent_pair pe =
            panel_exponents(m.u, m.v, m.q, m.q_fg(), m.rho(), m.d);
        double zeta_eff = 0.0;
        if (plan.panel_growth) {
          if (!(plan.alpha > 0.0))
            raise("out-of-range", "panel growth demo requires alpha > 0");
          zeta_eff = (pe.gamma - pe.delta) / plan.alpha;
        }
        return bandwidth_value_panel(c_eff, t, n, pe.delta, zeta_eff, m.rho(), m.d);
      }
      return bandwidth_from_plan(plan.kind, m, t, n, c_eff).b;
    }
  }
  raise("internal-error", "unreachable bandwidth rule");
}

struct rep_out {
  double mse{0.0};
  bool degenerate{false};
};

/// One Monte Carlo replication: simulate, estimate at every query point,
/// average squared error over the unflagged ones.
inline rep_out run_one_rep(const experiment_plan& plan, int t, int n, std::uint64_t seed) {
  estimator_config cfg;
  cfg.k = plan.kern;
  cfg.denom_floor = plan.denom_floor;

  const int d = plan.process.d;
  std::vector<double> zq(static_cast<std::size_t>(d));
  double acc = 0.0;
  int n_ok = 0;

  if (plan.kind == estimator_kind::panel_mean) {
    panel_sample p = gen_panel(plan.process, n, t, seed);
    const double b = replication_bandwidth(plan, t, n, p.z);
    cfg.b_i.assign(static_cast<std::size_t>(n), b);
    for (double z : plan.z_points) {
      for (int j = 0; j < d; ++j) zq[static_cast<std::size_t>(j)] = z;
      const est_result r = panel_mean_at(p, cfg, zq);
      if (r.flag != est_flag::ok) continue;
      const double err = r.value - true_target(plan, zq);
      acc += err * err;
      ++n_ok;
    }
  } else {
    sample s = generate_series(plan.process, t, seed);
    cfg.b = replication_bandwidth(plan, t, n, s.z);
    for (double z : plan.z_points) {
      for (int j = 0; j < d; ++j) zq[static_cast<std::size_t>(j)] = z;
      const est_result r = plan.kind == estimator_kind::density ? density_point(s, cfg, zq)
                                                                : nw_at(s, cfg, zq);
      if (r.flag != est_flag::ok) continue;
      const double err = r.value - true_target(plan, zq);
      acc += err * err;
      ++n_ok;
    }
  }
  rep_out out;
  if (n_ok == 0) {
    out.degenerate = true;
  } else {
    out.mse = acc / n_ok;
  }
  return out;
}

}  // namespace detail

/// Monte Carlo rate study: for each T in the grid, average the per-
/// replication squared estimation error (over unflagged query points), then
/// fit log MSE on log T.  Replications whose every query point is flagged
/// are excluded from the average and counted; any T with more than 1% of
/// replications excluded marks the report invalid.
inline rate_report run_mse(const experiment_plan& plan) {
  if (plan.t_grid.size() < 3) raise("out-of-range", "rate study needs at least 3 sample sizes");
  for (std::size_t i = 0; i < plan.t_grid.size(); ++i) {
    if (plan.t_grid[i] < 8) raise("out-of-range", "rate study sample sizes must be >= 8");
    if (i > 0 && plan.t_grid[i] <= plan.t_grid[i - 1])
      raise("out-of-range", "rate study sample sizes must be strictly increasing");
  }
  if (plan.reps < 1) raise("out-of-range", "rate study needs at least 1 replication");
  if (plan.z_points.empty()) raise("out-of-range", "rate study needs at least 1 query point");
  if (plan.kind == estimator_kind::panel_mean && !plan.panel_growth && plan.n_fixed < 1)
    raise("out-of-range", "panel rate study needs n_fixed >= 1");

  rate_report rep;
  rep.points.resize(plan.t_grid.size());

  for (std::size_t ti = 0; ti < plan.t_grid.size(); ++ti) {
    const int t = plan.t_grid[ti];
    rate_point& pt = rep.points[ti];
    pt.t = t;

    if (plan.mse_override) {
      pt.mse = plan.mse_override(t);
      pt.se = 0.0;
      pt.n_excluded = 0;
      continue;
    }

    int n = 1;
    if (plan.kind == estimator_kind::panel_mean)
      n = plan.panel_growth
              ? static_cast<int>(std::ceil(std::pow(static_cast<double>(t), plan.alpha)))
              : plan.n_fixed;

    std::vector<detail::rep_out> slots(static_cast<std::size_t>(plan.reps));
    parallel_for(plan.reps, plan.threads, [&](int r) {
      const std::uint64_t seed =
          derive_seed(plan.master_seed, static_cast<std::uint64_t>(ti), static_cast<std::uint64_t>(r));
      slots[static_cast<std::size_t>(r)] = detail::run_one_rep(plan, t, n, seed);
    });

    double sum = 0.0, sum2 = 0.0;
    int kept = 0;
    for (const auto& s : slots) {
      if (s.degenerate) {
        ++pt.n_excluded;
        continue;
      }
      sum += s.mse;
      sum2 += s.mse * s.mse;
      ++kept;
    }
    if (kept == 0) raise("degenerate-data", "every replication was excluded at T = " + std::to_string(t));
    pt.mse = sum / kept;
    if (kept >= 2) {
      const double var = std::max(0.0, (sum2 - sum * sum / kept) / (kept - 1));
      pt.se = std::sqrt(var / kept);
    }
    if (pt.n_excluded > 0.01 * plan.reps) rep.valid = false;
  }

  std::vector<double> xs, ys;
  xs.reserve(rep.points.size());
  ys.reserve(rep.points.size());
  for (const auto& pt : rep.points) {
    xs.push_back(std::log(static_cast<double>(pt.t)));
    ys.push_back(std::log(std::max(pt.mse, 1e-300)));
  }
  const fit_result f = fit_line(xs, ys);
  rep.fitted_exponent = -f.slope;
  rep.fit_se = f.slope_se;

  const model_spec& m = plan.model;
  switch (plan.rule) {
    case bandwidth_rule::theory_optimal:
      rep.theory_exponent = mse_decay_exponent(plan.kind, m, plan.panel_growth);
      break;
    case bandwidth_rule::misspecified_iid:
      rep.theory_exponent = misspecified_bandwidth_exponent(m.v, m.q_f, m.rho());
      break;
    case bandwidth_rule::fixed:
      rep.theory_exponent = std::numeric_limits<double>::quiet_NaN();
      break;
  }
  rep.margin = rep.fitted_exponent - rep.theory_exponent;
  return rep;
}

/// Side-by-side panel study: the same model estimated with a fixed number of
/// individuals versus a panel growing as N = ceil(T^alpha), each arm with
/// its own bandwidth schedule.
struct panel_demo_report {
  rate_report fixed_arm;
  rate_report growing_arm;
};

inline panel_demo_report run_panel_growth_demo(const experiment_plan& plan) {
  if (plan.kind != estimator_kind::panel_mean)
    raise("unsupported-combination", "the growth demo runs the panel estimator");
  panel_demo_report out;
  experiment_plan arm = plan;
  arm.panel_growth = false;
  arm.master_seed = derive_seed(plan.master_seed, 0xF1DEDu);
  out.fixed_arm = run_mse(arm);
  arm.panel_growth = true;
  arm.master_seed = derive_seed(plan.master_seed, 0x6007Au);
  out.growing_arm = run_mse(arm);
  return out;
}

/// Covariance-envelope diagnostic for kernel weights y_tau = K_b(Z_tau - z):
/// empirical lag covariances against the dependence-budget envelope
///   min(b^{-d(1-q_f)}, b^{-2d} lag^{-v})   (flat branch alone at lag 0).
struct envelope_plan {
  process_spec process{};
  double v{1.0};    ///< dependence size entering the envelope
  double q_f{0.5};  ///< density tail-budget exponent entering the envelope
  kernel kern{};
  double b{0.2};
  std::vector<double> z{0.0};
  int max_lag{20};
  int path_length{512};
  int reps{400};
  std::uint64_t master_seed{20260816u};
  int threads{1};
};

struct envelope_point {
  int lag{0};
  double emp_cov{0.0};   ///< mean over paths of the within-path lag covariance
  double se{0.0};        ///< standard error of that mean across paths
  double envelope{0.0};  ///< envelope value scaled by the fitted constant
  double ratio{0.0};     ///< |emp_cov| / envelope
};

struct envelope_report {
  std::vector<envelope_point> points;
  double fitted_constant{0.0};
};

inline double envelope_raw(double b, int d, double q_f, double v, int lag) {
  const double flat = std::pow(b, -static_cast<double>(d) * (1.0 - q_f));
  if (lag == 0) return flat;
  const double decay =
      std::pow(b, -2.0 * d) * std::pow(static_cast<double>(lag), -v);
  return std::min(flat, decay);
}

/// Estimate lag covariances of the kernel weight sequence.  Every path's
/// covariances are centered at the pooled mean across all paths and periods,
/// so the centering bias is O(1/(R L)) rather than O(1/L); the envelope
/// constant is fitted by least squares over the whole lag grid.
inline envelope_report run_envelope(const envelope_plan& plan) {
  if (plan.reps < 50)
    raise("insufficient-replications", "envelope diagnostic needs at least 50 paths");
  if (plan.max_lag < 1) raise("out-of-range", "envelope needs max_lag >= 1");
  if (plan.path_length < plan.max_lag + 1)
    raise("out-of-range", "envelope needs path_length > max_lag");
  if (static_cast<long long>(plan.reps) * plan.path_length > 100000000LL)
    raise("out-of-range", "envelope path storage too large (reps * path_length > 1e8)");
  const int d = plan.process.d;
  if (static_cast<int>(plan.z.size()) != d)
    raise("dimension-mismatch", "envelope query point dimension must match the process");
  if (!(plan.b > 0.0)) raise("invalid-bandwidth", "bandwidth must be positive");

  const int L = plan.path_length;
  const int R = plan.reps;
  const int n_lag = plan.max_lag + 1;

  std::vector<double> y(static_cast<std::size_t>(R) * L);
  std::vector<double> path_sum(static_cast<std::size_t>(R));
  parallel_for(R, plan.threads, [&](int r) {
    sample s = generate_series(plan.process, L, derive_seed(plan.master_seed, static_cast<std::uint64_t>(r)));
    double* yr = y.data() + static_cast<std::size_t>(r) * L;
    std::vector<double> w(static_cast<std::size_t>(d));
    double sum = 0.0;
    for (int tau = 0; tau < L; ++tau) {
      for (int j = 0; j < d; ++j)
        w[static_cast<std::size_t>(j)] = s.z[static_cast<std::size_t>(tau) * d + j] - plan.z[static_cast<std::size_t>(j)];
      yr[tau] = eval_multiplicative(plan.kern, w.data(), d, plan.b);
      sum += yr[tau];
    }
    path_sum[static_cast<std::size_t>(r)] = sum;
  });
  double mu = 0.0;
  for (double s : path_sum) mu += s;
  mu /= static_cast<double>(R) * L;

  std::vector<double> cov(static_cast<std::size_t>(R) * n_lag);
  parallel_for(R, plan.threads, [&](int r) {
    const double* yr = y.data() + static_cast<std::size_t>(r) * L;
    double* cr = cov.data() + static_cast<std::size_t>(r) * n_lag;
    for (int lag = 0; lag < n_lag; ++lag) {
      double acc = 0.0;
      for (int tau = 0; tau + lag < L; ++tau) acc += (yr[tau] - mu) * (yr[tau + lag] - mu);
      cr[lag] = acc / (L - lag);
    }
  });

  envelope_report rep;
  rep.points.resize(static_cast<std::size_t>(n_lag));
  double num = 0.0, den = 0.0;
  for (int lag = 0; lag < n_lag; ++lag) {
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < R; ++r) {
      const double cr = cov[static_cast<std::size_t>(r) * n_lag + lag];
      sum += cr;
      sum2 += cr * cr;
    }
    const double mean = sum / R;
    const double var = std::max(0.0, (sum2 - sum * sum / R) / (R - 1));
    envelope_point& pt = rep.points[static_cast<std::size_t>(lag)];
    pt.lag = lag;
    pt.emp_cov = mean;
    pt.se = std::sqrt(var / R);
    const double env = envelope_raw(plan.b, d, plan.q_f, plan.v, lag);
    pt.envelope = env;  // raw for now; rescaled by the fitted constant below
    num += std::fabs(mean) * env;
    den += env * env;
  }
  rep.fitted_constant = den > 0.0 ? num / den : 0.0;
  for (auto& pt : rep.points) {
    pt.envelope *= rep.fitted_constant;
    pt.ratio = pt.envelope > 0.0
                   ? std::fabs(pt.emp_cov) / pt.envelope
                   : (pt.emp_cov == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

/// Rate CSV: the per-T table followed by a one-row summary block.
inline std::string rate_report_to_csv(const rate_report& r) {
  std::ostringstream out;
  out << "T,mse,stderr,n_excluded\n";
  for (const auto& pt : r.points)
    out << pt.t << ',' << fmt_double(pt.mse) << ',' << fmt_double(pt.se) << ','
        << pt.n_excluded << "\n";
  out << "fitted_exponent,stderr,theory_exponent,margin\n";
  out << fmt_double(r.fitted_exponent) << ',' << fmt_double(r.fit_se) << ','
      << fmt_double(r.theory_exponent) << ',' << fmt_double(r.margin) << "\n";
  return out.str();
}

inline std::string envelope_report_to_csv(const envelope_report& r) {
  std::ostringstream out;
  out << "lag,emp_cov,stderr,envelope,ratio\n";
  for (const auto& pt : r.points)
    out << pt.lag << ',' << fmt_double(pt.emp_cov) << ',' << fmt_double(pt.se) << ','
        << fmt_double(pt.envelope) << ',' << fmt_double(pt.ratio) << "\n";
  return out.str();
}

/// Exponent-versus-dependence tables for the two smoothness levels used in
/// the survey figure, merged on the common m grid.
inline std::string figure1_to_csv() {
  const std::vector<double> grid = figure1_m_grid();
  const figure1_table t1 = figure1_curves(1.0, 1.0, grid);
  const figure1_table t5 = figure1_curves(5.0, 1.0, grid);
  std::ostringstream out;
  out << "m,delta_2mix_rho1,delta_linear_rho1,delta_2mix_rho5,delta_linear_rho5\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << fmt_double(grid[i]) << ',' << fmt_double(t1.delta_2mix[i]) << ','
        << fmt_double(t1.delta_linear[i]) << ',' << fmt_double(t5.delta_2mix[i]) << ','
        << fmt_double(t5.delta_linear[i]) << "\n";
  return out.str();
}

inline std::string bandwidth_plan_to_csv(const bandwidth_plan& p, int t, int n) {
  std::ostringstream out;
  out << "kind,gamma,delta,zeta,alpha,rho,d,c,T,N,b\n";
  out << estimator_kind_name(p.kind) << ',' << fmt_double(p.gamma) << ',' << fmt_double(p.delta)
      << ',' << fmt_double(p.zeta) << ',' << fmt_double(p.alpha) << ',' << fmt_double(p.rho)
      << ',' << p.d << ',' << fmt_double(p.c) << ',' << t << ',' << n << ','
      << fmt_double(p.b) << "\n";
  return out.str();
}

}  // namespace mixkern
