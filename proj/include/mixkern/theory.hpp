#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mixkern/errors.hpp"

namespace mixkern {

/// Sentinel for an infinite mixing / covariance size.  Every piecewise
/// exponent formula below treats any value above its top threshold
/// identically, so "largest finite double" is a faithful encoding.
inline constexpr double size_infinity = std::numeric_limits<double>::max();

/// Model knowledge supplied by the user, never estimated from data:
/// smoothness, kernel order, dimension, moment-balance parameters and the
/// dependence sizes that drive every rate exponent.
struct model_spec {
  double s{2.0};       ///< smoothness of the target function, > 0
  int r{2};            ///< kernel order (even, >= 2)
  int d{1};            ///< design dimension >= 1
  double q{0.5};       ///< moment balance q = 1 - 2/p, in (0,1)
  double q_f{0.5};     ///< density-norm balance, in (0,1]
  double q_g{0.5};     ///< numerator-norm balance, in (0,1]
  double v{size_infinity};  ///< within-series 2-mixing size, >= 0
  double u{size_infinity};  ///< cross / error-covariance size, >= 0
  double theta{1.0};   ///< linear-process coefficient decay, > 1/2
  double ell{4.0};     ///< innovation moment order, > 2

  double q_fg() const { return std::min(q_f, q_g); }
  /// Effective bias order rho = min(r, s): the kernel cannot exploit more
  /// smoothness than its order, and vice versa.
  double rho() const { return std::min(static_cast<double>(r), s); }
};

namespace detail {

inline void check_range(bool ok, const std::string& what) {
  if (!ok) raise("out-of-range", what);
}

inline double clamp01(double g) { return std::clamp(g, 0.0, 1.0); }

}  // namespace detail

/// Density-estimation bandwidth exponent gamma (d = 1):
///   gamma = 1                                   if v > 1 + 1/q_F
///   gamma = min(v,1) (2s+1) / (2s + 2 + q_F (1 - max(v,1)))   otherwise.
/// The optimal bandwidth is b* ~ T^{-gamma/(2s+1)} and MSE = O(T^{-(2s/(2s+1)) gamma}).
/// Clamped to [0,1]; the two branches join continuously at the threshold.
inline double gamma_density(double v, double q_f, double s) {
  detail::check_range(v >= 0.0, "mixing size v must be >= 0");
  detail::check_range(q_f > 0.0 && q_f <= 1.0, "q_F must lie in (0,1]");
  detail::check_range(s > 0.0, "smoothness s must be positive");
  if (v > 1.0 + 1.0 / q_f) return 1.0;
  const double num = std::min(v, 1.0) * (2.0 * s + 1.0);
  const double den = 2.0 * s + 2.0 + q_f * (1.0 - std::max(v, 1.0));
  return detail::clamp01(num / den);
}

/// Regression bandwidth exponent, model with multiplicative noise
/// X_t = phi(Z_t) + h(Z_t) eta_t and error-covariance size u:
///   gamma = min(u, 1)                           if q v > 1 + 1/q_FG
///   gamma = min(u, min(qv,1)(2 rho + d) / (2 rho + d(1 + q + q_FG(1 - max(qv,1)))))
/// Clamped to [0,1].  (The clamp also removes the spurious jump the printed
/// threshold would otherwise create for u > 1: the inner expression exceeds 1
/// exactly on the sliver where the other corollaries already give gamma = 1.)
inline double gamma_regression_model1(double u, double v, double q, double q_fg, double rho,
                                      int d) {
  detail::check_range(u >= 0.0, "covariance size u must be >= 0");
  detail::check_range(v >= 0.0, "mixing size v must be >= 0");
  detail::check_range(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::check_range(q_fg > 0.0 && q_fg <= 1.0, "q_FG must lie in (0,1]");
  detail::check_range(rho > 0.0, "rho must be positive");
  detail::check_range(d >= 1, "dimension must be >= 1");
  const double qv = (v >= size_infinity) ? size_infinity : q * v;
  if (qv > 1.0 + 1.0 / q_fg) return detail::clamp01(std::min(u, 1.0));
  const double num = std::min(qv, 1.0) * (2.0 * rho + d);
  const double den = 2.0 * rho + d * (1.0 + q + q_fg * (1.0 - std::max(qv, 1.0)));
  return detail::clamp01(std::min(u, num / den));
}

/// Regression bandwidth exponent, conditional-mean-only model
/// E[X_t | Z_t] = phi(Z_t):
///   gamma = 1                                   if q v > 1 + q/q_FG
///   gamma = min(qv,1)(2 rho + d) / (2 rho + d(1 + q + q_FG(1 - max(qv,1))))
/// Clamped to [0,1]; continuous at the threshold.
inline double gamma_regression_model2(double v, double q, double q_fg, double rho, int d) {
  detail::check_range(v >= 0.0, "mixing size v must be >= 0");
  detail::check_range(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::check_range(q_fg > 0.0 && q_fg <= 1.0, "q_FG must lie in (0,1]");
  detail::check_range(rho > 0.0, "rho must be positive");
  detail::check_range(d >= 1, "dimension must be >= 1");
  const double qv = (v >= size_infinity) ? size_infinity : q * v;
  if (qv > 1.0 + q / q_fg) return 1.0;
  const double num = std::min(qv, 1.0) * (2.0 * rho + d);
  const double den = 2.0 * rho + d * (1.0 + q + q_fg * (1.0 - std::max(qv, 1.0)));
  return detail::clamp01(num / den);
}

/// Panel exponents: gamma_i from the cross-individual size u and delta_i from
/// the within-individual size v, both via the model-2 piecewise rule.
struct panel_exponent_pair {
  double gamma{};  ///< controls the rate when N grows on schedule
  double delta{};  ///< controls the rate at fixed N
};

inline panel_exponent_pair panel_exponents(double u, double v, double q, double q_fg, double rho_i,
                                           int d) {
  return {gamma_regression_model2(u, q, q_fg, rho_i, d),
          gamma_regression_model2(v, q, q_fg, rho_i, d)};
}

/// N-growth schedule: pick the largest zeta_i admissible under
/// delta_i / min(qv, 1) >= zeta_i, then alpha with N ~ T^alpha from
/// N^{zeta_i} ~ T^{gamma_i - delta_i}.  gamma_i = delta_i needs no growth
/// (alpha = 0).  delta_i = 0 with gamma_i > delta_i admits no finite
/// schedule (zeta_i = 0); alpha is the infinity sentinel in that case.
struct growth_schedule {
  double zeta{};
  double alpha{};
};

inline growth_schedule panel_growth_schedule(double gamma_i, double delta_i, double q, double v) {
  detail::check_range(gamma_i >= 0.0 && gamma_i <= 1.0, "gamma_i must lie in [0,1]");
  detail::check_range(delta_i >= 0.0 && delta_i <= 1.0, "delta_i must lie in [0,1]");
  detail::check_range(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::check_range(v >= 0.0, "mixing size v must be >= 0");
  if (gamma_i < delta_i)
    raise("inconsistent-sizes", "panel growth schedule requires gamma_i >= delta_i");
  constexpr double eps_q = 1e-9;  // guards qv = 0
  const double qv = (v >= size_infinity) ? 1.0 : std::min(q * v, 1.0);
  growth_schedule g;
  g.zeta = delta_i / std::max(qv, eps_q);
  if (gamma_i == delta_i)
    g.alpha = 0.0;
  else if (g.zeta <= 0.0)
    g.alpha = size_infinity;
  else
    g.alpha = (gamma_i - delta_i) / g.zeta;
  return g;
}

/// MSE decay exponent for a linear process with coefficient decay theta:
/// min(2 theta - 1, 2s/(2s+1)).
inline double linear_rate_exponent(double theta, double s) {
  detail::check_range(theta >= 0.5, "theta must be >= 1/2");
  detail::check_range(s > 0.0, "smoothness s must be positive");
  return std::min(2.0 * theta - 1.0, 2.0 * s / (2.0 * s + 1.0));
}

/// Bounds on the 2-mixing size of a linear process with coefficient decay
/// theta and innovation moment order ell > 2:
///   (2 theta - 1) ell / (2(ell+1))  <=  v  <=  (2 theta - 1) ell / (ell - 2).
struct size_bounds {
  double lower{};
  double upper{};
};

inline size_bounds mixing_size_bounds(double theta, double ell) {
  detail::check_range(theta > 0.5, "theta must exceed 1/2");
  if (!(ell > 2.0))
    raise("undefined-upper-bound", "mixing size upper bound requires ell > 2");
  const double base = 2.0 * theta - 1.0;
  return {base * ell / (2.0 * (ell + 1.0)), base * ell / (ell - 2.0)};
}

/// MSE decay exponent when the iid-optimal bandwidth b ~ T^{-1/(2s+1)} (d=1)
/// is used regardless of dependence.  Signed: a value <= 0 is the
/// non-convergence regime (the MSE bound fails to vanish for v <= 2/(2s+1)).
inline double misspecified_bandwidth_exponent(double v, double q_f, double s) {
  detail::check_range(v >= 0.0, "mixing size v must be >= 0");
  detail::check_range(q_f > 0.0 && q_f <= 1.0, "q_F must lie in (0,1]");
  detail::check_range(s > 0.0, "smoothness s must be positive");
  const double w = 2.0 * s + 1.0;
  if (v > 1.0 + 1.0 / q_f) return 2.0 * s / w;
  if (v > 1.0) return (2.0 * s - 1.0 - q_f * (1.0 - v)) / w;
  return (v * w - 2.0) / w;
}

/// Exponent curves behind the density-rate comparison figure: the dependent
/// 2-mixing MSE exponent versus the linear-process exponent, both as a
/// function of the common size m.
struct figure1_table {
  std::vector<double> m;
  std::vector<double> delta_2mix;
  std::vector<double> delta_linear;
};

inline figure1_table figure1_curves(double rho, double q_f, const std::vector<double>& m_grid) {
  figure1_table t;
  t.m = m_grid;
  t.delta_2mix.reserve(m_grid.size());
  t.delta_linear.reserve(m_grid.size());
  const double sat = 2.0 * rho / (2.0 * rho + 1.0);
  for (double m : m_grid) {
    t.delta_2mix.push_back(sat * gamma_density(m, q_f, rho));
    t.delta_linear.push_back(std::min(m, sat));
  }
  return t;
}

/// The standard m grid for the exponent-comparison table: [0, 4] step 0.05.
inline std::vector<double> figure1_m_grid() {
  std::vector<double> g;
  g.reserve(81);
  for (int i = 0; i <= 80; ++i) g.push_back(0.05 * i);
  return g;
}

/// What is being estimated; selects which corollary supplies the exponents.
enum class estimator_kind { density, regression_model1, regression_model2, panel_mean };

inline const char* estimator_kind_name(estimator_kind k) {
  switch (k) {
    case estimator_kind::density: return "density";
    case estimator_kind::regression_model1: return "regression_model1";
    case estimator_kind::regression_model2: return "regression_model2";
    case estimator_kind::panel_mean: return "panel_mean";
  }
  return "?";
}

/// Resolved bandwidth plan: exponents plus the numeric bandwidth
///   series  b = c T^{-gamma/(2 rho + d)}
///   panel   b = c N^{-zeta/(2 rho + d)} T^{-delta/(2 rho + d)}.
struct bandwidth_plan {
  estimator_kind kind{estimator_kind::density};
  double gamma{};
  double delta{};  ///< panels only
  double zeta{};   ///< panels only
  double alpha{};  ///< panels only: N ~ T^alpha schedule (may be the sentinel)
  double rho{};
  int d{1};
  double c{1.0};
  double b{};
};

inline double bandwidth_value_series(double c, double t, double gamma, double rho, int d) {
  return c * std::pow(t, -gamma / (2.0 * rho + d));
}

inline double bandwidth_value_panel(double c, double t, double n, double delta, double zeta,
                                    double rho, int d) {
  const double e = 2.0 * rho + d;
  return c * std::pow(n, -zeta / e) * std::pow(t, -delta / e);
}

/// Select the corollary-optimal exponents for the estimator kind and turn
/// them into a numeric bandwidth.  c > 0 is the free scale constant the
/// theory leaves unspecified (callers default it to the sample standard
/// deviation of Z).  N is ignored for series estimators.
inline bandwidth_plan bandwidth_from_plan(estimator_kind kind, const model_spec& m, double t,
                                          double n, double c) {
  detail::check_range(t >= 1.0, "sample size T must be >= 1");
  detail::check_range(c > 0.0, "bandwidth constant c must be positive");
  bandwidth_plan p;
  p.kind = kind;
  p.rho = m.rho();
  p.d = m.d;
  p.c = c;
  switch (kind) {
    case estimator_kind::density:
      p.gamma = gamma_density(m.v, m.q_f, p.rho);
      p.b = bandwidth_value_series(c, t, p.gamma, p.rho, p.d);
      break;
    case estimator_kind::regression_model1:
      p.gamma = gamma_regression_model1(m.u, m.v, m.q, m.q_fg(), p.rho, p.d);
      p.b = bandwidth_value_series(c, t, p.gamma, p.rho, p.d);
      break;
    case estimator_kind::regression_model2:
      p.gamma = gamma_regression_model2(m.v, m.q, m.q_fg(), p.rho, p.d);
      p.b = bandwidth_value_series(c, t, p.gamma, p.rho, p.d);
      break;
    case estimator_kind::panel_mean: {
      detail::check_range(n >= 1.0, "panel size N must be >= 1");
      const panel_exponent_pair e = panel_exponents(m.u, m.v, m.q, m.q_fg(), p.rho, p.d);
      p.gamma = e.gamma;
      p.delta = e.delta;
      const growth_schedule g = panel_growth_schedule(e.gamma, e.delta, m.q, m.v);
      p.zeta = g.zeta;
      p.alpha = g.alpha;
      p.b = bandwidth_value_panel(c, t, n, p.delta, p.zeta, p.rho, p.d);
      break;
    }
  }
  return p;
}

/// Theoretical MSE decay exponent matching the corollary for the kind.
/// Panels report the growing-N rate when growing_n, otherwise the fixed-N
/// rate driven by delta alone.
inline double mse_decay_exponent(estimator_kind kind, const model_spec& m, bool growing_n = false) {
  const double rho = m.rho();
  const double sat = 2.0 * rho / (2.0 * rho + m.d);
  switch (kind) {
    case estimator_kind::density:
      return sat * gamma_density(m.v, m.q_f, rho);
    case estimator_kind::regression_model1:
      return sat * gamma_regression_model1(m.u, m.v, m.q, m.q_fg(), rho, m.d);
    case estimator_kind::regression_model2:
      return sat * gamma_regression_model2(m.v, m.q, m.q_fg(), rho, m.d);
    case estimator_kind::panel_mean: {
      const panel_exponent_pair e = panel_exponents(m.u, m.v, m.q, m.q_fg(), rho, m.d);
      return sat * (growing_n ? e.gamma : e.delta);
    }
  }
  return 0.0;
}

}  // namespace mixkern
