#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mixkern/errors.hpp"
#include "mixkern/kernels.hpp"
#include "mixkern/processes.hpp"

namespace mixkern {

enum class est_flag { ok, unstable_denominator };

inline const char* est_flag_name(est_flag f) {
  return f == est_flag::ok ? "ok" : "unstable_denominator";
}

/// One evaluation of a kernel estimator.  `denominator` is the local design
/// density estimate backing the value; the flag is ok exactly when that
/// denominator clears the configured floor.  Flagged ratio estimates carry
/// value 0 so downstream code cannot silently consume a blow-up.
struct est_result {
  double value{0.0};
  double denominator{0.0};
  est_flag flag{est_flag::ok};
};

struct estimator_config {
  kernel k;
  double b{0.0};                ///< bandwidth for series estimators
  std::vector<double> b_i;      ///< per-individual bandwidths for panels
  double denom_floor{1e-12};    ///< flag threshold on the density denominator
};

namespace detail {

/// Kernel-weighted sums over one series: sk = sum_t K_b(z_t - zq) and
/// sxk = sum_t x_t K_b(z_t - zq) (when x is non-null).  This single routine
/// backs the density, ratio, and panel estimators so the N=1 panel agrees
/// with the plain ratio estimator bit for bit.
inline void weighted_sums(const kernel& k, double b, const double* z, const double* x, int t,
                          int d, const double* zq, double& sk, double& sxk) {
  if (!(b > 0.0)) raise("invalid-bandwidth", "bandwidth must be positive");
  const double inv_b = 1.0 / b;
  double scale = 1.0;
  for (int j = 0; j < d; ++j) scale *= inv_b;
  sk = 0.0;
  sxk = 0.0;
  for (int row = 0; row < t; ++row) {
    const double* zr = z + static_cast<std::size_t>(row) * d;
    double prod = scale;
    for (int j = 0; j < d; ++j) {
      const double w = eval(k, (zr[j] - zq[j]) * inv_b);
      if (w == 0.0) {
        prod = 0.0;
        break;
      }
      prod *= w;
    }
    if (prod == 0.0) continue;
    sk += prod;
    if (x != nullptr) sxk += x[row] * prod;
  }
}

inline void check_query_dim(int want, std::size_t got) {
  if (static_cast<std::size_t>(want) != got)
    raise("dimension-mismatch", "query point dimension " + std::to_string(got) +
                                    " does not match sample dimension " + std::to_string(want));
}

}  // namespace detail

/// Density estimate at zq: average of product-kernel weights.
inline est_result density_point(const sample& s, const estimator_config& cfg,
                                const std::vector<double>& zq) {
  detail::check_query_dim(s.d, zq.size());
  double sk = 0.0, sxk = 0.0;
  detail::weighted_sums(cfg.k, cfg.b, s.z.data(), nullptr, s.t, s.d, zq.data(), sk, sxk);
  const double f_hat = sk / s.t;
  est_result r;
  r.value = f_hat;
  r.denominator = f_hat;
  r.flag = f_hat >= cfg.denom_floor ? est_flag::ok : est_flag::unstable_denominator;
  return r;
}

/// Plain density value (no flag), kept as the minimal calling convention.
inline double density_at(const sample& s, const estimator_config& cfg,
                         const std::vector<double>& zq) {
  return density_point(s, cfg, zq).value;
}

/// Locally weighted conditional-mean estimate at zq: the ratio of the
/// response-weighted kernel average to the density estimate, flagged (with
/// value 0) when the denominator falls below the floor.
inline est_result nw_at(const sample& s, const estimator_config& cfg,
                        const std::vector<double>& zq) {
  if (!s.has_x) raise("no-response-variable", "ratio estimator requires a response variable");
  detail::check_query_dim(s.d, zq.size());
  double sk = 0.0, sxk = 0.0;
  detail::weighted_sums(cfg.k, cfg.b, s.z.data(), s.x.data(), s.t, s.d, zq.data(), sk, sxk);
  const double f_hat = sk / s.t;
  const double g_hat = sxk / s.t;
  est_result r;
  r.denominator = f_hat;
  if (f_hat >= cfg.denom_floor) {
    r.value = g_hat / f_hat;
    r.flag = est_flag::ok;
  } else {
    r.value = 0.0;
    r.flag = est_flag::unstable_denominator;
  }
  return r;
}

/// Panel common-mean estimate at zq: per-individual kernel averages with
/// per-individual bandwidths, averaged across individuals *before* the
/// ratio.  With N = 1 and b_i = {b} this reproduces nw_at exactly.
inline est_result panel_mean_at(const panel_sample& p, const estimator_config& cfg,
                                const std::vector<double>& zq) {
  detail::check_query_dim(p.d, zq.size());
  if (static_cast<int>(cfg.b_i.size()) != p.n)
    raise("bandwidth-count-mismatch",
          "need one bandwidth per individual: got " + std::to_string(cfg.b_i.size()) +
              " for N = " + std::to_string(p.n));
  double num = 0.0, den = 0.0;
  for (int i = 0; i < p.n; ++i) {
    double sk = 0.0, sxk = 0.0;
    detail::weighted_sums(cfg.k, cfg.b_i[static_cast<std::size_t>(i)], p.z_col(i), p.x_col(i),
                          p.t, p.d, zq.data(), sk, sxk);
    den += sk / p.t;
    num += sxk / p.t;
  }
  num /= p.n;
  den /= p.n;
  est_result r;
  r.denominator = den;
  if (den >= cfg.denom_floor) {
    r.value = num / den;
    r.flag = est_flag::ok;
  } else {
    r.value = 0.0;
    r.flag = est_flag::unstable_denominator;
  }
  return r;
}

/// Evaluate an estimator over a flat grid of query points (n_pts x d,
/// row-major).  The loop is strictly sequential, so curve output is a pure
/// function of (sample, config, grid).
template <typename PointFn>
inline std::vector<est_result> eval_curve(int d, const std::vector<double>& grid, PointFn&& at) {
  if (d < 1) raise("out-of-range", "dimension must be >= 1");
  if (grid.empty() || grid.size() % static_cast<std::size_t>(d) != 0)
    raise("dimension-mismatch", "grid length must be a positive multiple of d");
  const std::size_t n_pts = grid.size() / static_cast<std::size_t>(d);
  std::vector<est_result> out(n_pts);
  std::vector<double> zq(static_cast<std::size_t>(d));
  for (std::size_t p = 0; p < n_pts; ++p) {
    for (int j = 0; j < d; ++j) zq[static_cast<std::size_t>(j)] = grid[p * d + j];
    out[p] = at(zq);
  }
  return out;
}

inline std::vector<est_result> density_curve(const sample& s, const estimator_config& cfg,
                                             const std::vector<double>& grid) {
  return eval_curve(s.d, grid, [&](const std::vector<double>& zq) {
    return density_point(s, cfg, zq);
  });
}

inline std::vector<est_result> nw_curve(const sample& s, const estimator_config& cfg,
                                        const std::vector<double>& grid) {
  return eval_curve(s.d, grid, [&](const std::vector<double>& zq) { return nw_at(s, cfg, zq); });
}

inline std::vector<est_result> panel_mean_curve(const panel_sample& p,
                                                const estimator_config& cfg,
                                                const std::vector<double>& grid) {
  return eval_curve(p.d, grid, [&](const std::vector<double>& zq) {
    return panel_mean_at(p, cfg, zq);
  });
}

}  // namespace mixkern
