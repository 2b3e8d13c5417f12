#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mixkern/errors.hpp"
#include "mixkern/seeds.hpp"

namespace mixkern {

enum class process_kind {
  iid,
  linear_gaussian,
  arch_inf,
  stoch_vol,
  panel_fixed_design,
  panel_shared_factor
};

inline const char* process_kind_name(process_kind k) {
  switch (k) {
    case process_kind::iid: return "iid";
    case process_kind::linear_gaussian: return "linear_gaussian";
    case process_kind::arch_inf: return "arch_inf";
    case process_kind::stoch_vol: return "stoch_vol";
    case process_kind::panel_fixed_design: return "panel_fixed_design";
    case process_kind::panel_shared_factor: return "panel_shared_factor";
  }
  return "?";
}

/// Named ground-truth function selectors.  Samples carry these by name so
/// experiments can evaluate true targets at arbitrary query points.
inline double named_function(const std::string& name, double z) {
  if (name == "zero") return 0.0;
  if (name == "const1") return 1.0;
  if (name == "sin") return std::sin(z);
  if (name == "cos") return std::cos(z);
  if (name == "linear") return z;
  if (name == "tanh") return std::tanh(z);
  if (name == "one_plus_half_tanh") return 1.0 + 0.5 * std::tanh(z);
  if (name == "exp_quarter") return std::exp(0.25 * z);
  raise("bad-range", "unknown function selector '" + name +
                         "' (allowed: zero, const1, sin, cos, linear, tanh, "
                         "one_plus_half_tanh, exp_quarter)");
}

/// True of selectors that are strictly positive everywhere (valid volatility).
inline bool named_function_positive(const std::string& name) {
  return name == "const1" || name == "one_plus_half_tanh" || name == "exp_quarter";
}

/// Full description of a simulated process.  Generators are pure functions
/// of (spec, T, seed); identical inputs give identical output on a platform.
struct process_spec {
  process_kind kind{process_kind::iid};
  int d{1};                     ///< design dimension
  double theta{2.0};            ///< linear coefficient decay a_j = (1+j)^{-theta}
  double delta{2.0};            ///< ARCH tail exponent: a_j ~ j^{-(1+delta)}
  double innovation_bound{0.9}; ///< ARCH innovations uniform on [-a, a], a < 1
  double gate{0.4};             ///< ARCH target for [E eps^4]^{1/2} sum_j a_j
  double a0{1.0};               ///< ARCH intercept
  int truncation{0};            ///< lag cutoff M; 0 = automatic by tail rule
  int burn_in{-1};              ///< discarded prefix; -1 = automatic (2M)
  std::string phi{};            ///< regression mean selector; empty = Z only
  std::string h{"const1"};      ///< regression noise-scale selector
  std::string sigma{"one_plus_half_tanh"};  ///< volatility selector (stoch_vol)
  std::string z_source{"linear"};           ///< stoch_vol design: "linear" or "iid"
  double noise_sd{0.5};         ///< additive noise scale for phi attachments
  double ar_coef{0.6};          ///< shared_factor: AR(1) coefficient
  double factor_loading{0.7};   ///< shared_factor: weight of the AR component
};

/// A single (possibly response-carrying) series.  Z is row-major (t, coord).
struct sample {
  int t{0};
  int d{1};
  std::vector<double> z;        ///< length t*d
  std::vector<double> x;        ///< length t when has_x
  bool has_x{false};
  std::uint64_t seed{0};
  process_spec spec;
  /// almost-sure output bound for bounded-innovation recursions; the
  /// infinity sentinel when no finite bound exists.
  double bound{std::numeric_limits<double>::infinity()};

  const double* z_row(int row) const { return z.data() + static_cast<std::size_t>(row) * d; }
};

/// Panel of N individuals over T periods.  Storage is individual-major so a
/// column is a contiguous series: z[(i*T + t)*d + j], x[i*T + t].
struct panel_sample {
  int t{0};
  int n{0};
  int d{1};
  std::vector<double> z;
  std::vector<double> x;
  std::uint64_t seed{0};
  process_spec spec;

  const double* z_col(int i) const {
    return z.data() + static_cast<std::size_t>(i) * t * d;
  }
  const double* x_col(int i) const { return x.data() + static_cast<std::size_t>(i) * t; }
};

namespace detail {

inline constexpr int trunc_min = 8;
inline constexpr int trunc_max = 65536;

/// Automatic truncation for the linear process: smallest M whose omitted
/// coefficient mass (measured in L2, the scale that controls every moment of
/// the truncated process) is below 1e-6 of the total, clamped to
/// [trunc_min, trunc_max].  Long-memory decays (theta <= 1) hit the cap.
inline int auto_truncation_linear(double theta) {
  const double p = 2.0 * theta;  // a_j^2 = (1+j)^{-p}, p > 1
  double total = 0.0;
  const int probe = 100000;
  for (int j = 0; j < probe; ++j) total += std::pow(1.0 + j, -p);
  total += std::pow(static_cast<double>(probe), 1.0 - p) / (p - 1.0);
  for (int m = trunc_min; m <= trunc_max; m *= 2) {
    const double tail = std::pow(1.0 + m, 1.0 - p) / (p - 1.0);
    if (tail < 1e-6 * total) {
      // refine downward within [m/2, m]
      int lo = m / 2, hi = m;
      while (lo + 1 < hi) {
        const int mid = (lo + hi) / 2;
        const double tmid = std::pow(1.0 + mid, 1.0 - p) / (p - 1.0);
        if (tmid < 1e-6 * total) hi = mid; else lo = mid;
      }
      return std::max(hi, trunc_min);
    }
  }
  return trunc_max;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace detail

/// iid standard-Gaussian design, optionally with the regression attachment
/// X_t = phi(Z_t) + noise_sd * h(Z_t) * eta_t  (eta iid standard normal).
inline sample gen_iid(const process_spec& spec, int t, std::uint64_t seed) {
  if (t < 1) raise("out-of-range", "sample size T must be >= 1");
  if (spec.d < 1) raise("out-of-range", "dimension d must be >= 1");
  const bool attach = !spec.phi.empty();
  if (attach && spec.d != 1)
    raise("unsupported-combination", "regression attachments require d = 1");
  sample s;
  s.t = t;
  s.d = spec.d;
  s.seed = seed;
  s.spec = spec;
  s.z.resize(static_cast<std::size_t>(t) * spec.d);
  if (attach) {
    s.has_x = true;
    s.x.resize(static_cast<std::size_t>(t));
  }
  auto eng = detail::make_engine(derive_seed(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int row = 0; row < t; ++row) {
    for (int j = 0; j < spec.d; ++j) s.z[static_cast<std::size_t>(row) * spec.d + j] = gauss(eng);
    if (attach) {
      const double zv = s.z[static_cast<std::size_t>(row) * spec.d];
      s.x[static_cast<std::size_t>(row)] =
          named_function(spec.phi, zv) + spec.noise_sd * named_function(spec.h, zv) * gauss(eng);
    }
  }
  return s;
}

/// Linear Gaussian process Z_t = sum_{j=0..M} a_j eps_{t-j} with
/// a_j = (1+j)^{-theta}, rescaled so the truncated process has unit variance
/// (hence an exactly standard-normal marginal).  The M leading innovations
/// put the recursion in its stationary regime from the first output sample.
inline sample gen_linear_gaussian(const process_spec& spec, int t, std::uint64_t seed) {
  if (t < 1) raise("out-of-range", "sample size T must be >= 1");
  if (!(spec.theta > 0.5))
    raise("nonsummable-coefficients",
          "linear process requires theta > 1/2 for square-summable coefficients");
  if (spec.d != 1)
    raise("unsupported-combination", "the linear Gaussian design is univariate (d = 1)");
  const int m = spec.truncation > 0 ? spec.truncation : detail::auto_truncation_linear(spec.theta);
  std::vector<double> a(static_cast<std::size_t>(m) + 1);
  double var = 0.0;
  for (int j = 0; j <= m; ++j) {
    a[static_cast<std::size_t>(j)] = std::pow(1.0 + j, -spec.theta);
    var += a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(j)];
  }
  const double scale = 1.0 / std::sqrt(var);
  for (double& aj : a) aj *= scale;

  sample s;
  s.t = t;
  s.d = 1;
  s.seed = seed;
  s.spec = spec;
  s.z.resize(static_cast<std::size_t>(t));
  auto eng = detail::make_engine(derive_seed(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> eps(static_cast<std::size_t>(t + m));
  for (double& e : eps) e = gauss(eng);
  for (int row = 0; row < t; ++row) {
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) acc += a[static_cast<std::size_t>(j)] * eps[static_cast<std::size_t>(row + m - j)];
    s.z[static_cast<std::size_t>(row)] = acc;
  }
  const bool attach = !spec.phi.empty();
  if (attach) {
    s.has_x = true;
    s.x.resize(static_cast<std::size_t>(t));
    for (int row = 0; row < t; ++row) {
      const double zv = s.z[static_cast<std::size_t>(row)];
      s.x[static_cast<std::size_t>(row)] =
          named_function(spec.phi, zv) + spec.noise_sd * named_function(spec.h, zv) * gauss(eng);
    }
  }
  return s;
}

/// ARCH(infinity) with bounded uniform innovations on [-a, a]:
///   Z_t = sigma_t eps_t,  sigma_t^2 = a_0 + sum_{j=1..M} a_j Z_{t-j}^2,
/// coefficients a_j proportional to j^{-(1+delta)} and scaled so the
/// stationarity gate [E eps^4]^{1/2} sum_j a_j equals spec.gate (< 1).
/// The returned sample carries the almost-sure bound from the worst-case
/// fixed point a sqrt(a_0 / (1 - a^2 sum a_j)) when the sup-recursion is
/// contractive (a^2 sum a_j < 1); otherwise no finite path bound exists and
/// the bound field is the infinity sentinel.
inline sample gen_arch_inf(const process_spec& spec, int t, std::uint64_t seed) {
  if (t < 1) raise("out-of-range", "sample size T must be >= 1");
  if (!(spec.delta > 0.0)) raise("out-of-range", "ARCH tail exponent delta must be positive");
  const double a = spec.innovation_bound;
  if (!(a > 0.0 && a < 1.0))
    raise("out-of-range", "ARCH innovation bound must lie in (0,1)");
  if (!(spec.a0 > 0.0)) raise("out-of-range", "ARCH intercept a0 must be positive");
  if (!(spec.gate > 0.0)) raise("out-of-range", "ARCH gate must be positive");
  if (spec.gate >= 1.0)
    raise("nonstationary-spec",
          "ARCH stationarity gate [E eps^4]^{1/2} sum a_j must be < 1");
  // E eps^2 = a^2/3, E eps^4 = a^4/5 for uniform innovations on [-a, a].
  const double fourth_root = a * a / std::sqrt(5.0);
  const double coef_sum_target = spec.gate / fourth_root;

  // Choose M so the omitted coefficient tail is < 1e-6 of the kept mass
  // (capped), then rescale on the final window so the gate holds exactly.
  auto raw_sum = [&](int m) {
    double sum = 0.0;
    for (int j = 1; j <= m; ++j) sum += std::pow(static_cast<double>(j), -(1.0 + spec.delta));
    return sum;
  };
  int m = spec.truncation;
  if (m <= 0) {
    m = detail::trunc_max;
    for (int probe = detail::trunc_min; probe <= detail::trunc_max; probe *= 2) {
      const double tail_rel =
          std::pow(static_cast<double>(probe), -spec.delta) / (spec.delta * raw_sum(probe));
      if (tail_rel < 1e-6) {
        m = probe;
        break;
      }
    }
  }
  std::vector<double> aj(static_cast<std::size_t>(m) + 1, 0.0);
  double sum = 0.0;
  for (int j = 1; j <= m; ++j) {
    aj[static_cast<std::size_t>(j)] = std::pow(static_cast<double>(j), -(1.0 + spec.delta));
    sum += aj[static_cast<std::size_t>(j)];
  }
  const double kappa = coef_sum_target / sum;
  for (double& c : aj) c *= kappa;

  sample s;
  s.t = t;
  s.d = 1;
  s.seed = seed;
  s.spec = spec;
  const double sup_gate = a * a * coef_sum_target;
  s.bound = sup_gate < 1.0 ? a * std::sqrt(spec.a0 / (1.0 - sup_gate))
                           : std::numeric_limits<double>::infinity();

  const int burn = spec.burn_in >= 0 ? spec.burn_in : 2 * m;
  const int total = burn + t;
  std::vector<double> path(static_cast<std::size_t>(total), 0.0);
  auto eng = detail::make_engine(derive_seed(seed));
  std::uniform_real_distribution<double> unif(-a, a);
  for (int step = 0; step < total; ++step) {
    double sig2 = spec.a0;
    const int reach = std::min(step, m);
    for (int j = 1; j <= reach; ++j)
      sig2 += aj[static_cast<std::size_t>(j)] * path[static_cast<std::size_t>(step - j)] *
              path[static_cast<std::size_t>(step - j)];
    path[static_cast<std::size_t>(step)] = std::sqrt(sig2) * unif(eng);
  }
  s.z.assign(path.begin() + burn, path.end());
  return s;
}

/// Stochastic-volatility design: Y_t = sigma(Z_t) eta_t with iid standard
/// Gaussian eta (E eta^2 = 1) and X_t = Y_t^2, so E[X_t | Z_t = z] = sigma(z)^2.
/// Z comes from the linear Gaussian design (default) or iid.
inline sample gen_stoch_vol(const process_spec& spec, int t, std::uint64_t seed) {
  if (!named_function_positive(spec.sigma))
    raise("invalid-volatility",
          "volatility selector '" + spec.sigma + "' is not strictly positive");
  process_spec zspec = spec;
  zspec.phi.clear();
  sample s;
  if (spec.z_source == "iid") {
    zspec.kind = process_kind::iid;
    s = gen_iid(zspec, t, seed);
  } else if (spec.z_source == "linear") {
    zspec.kind = process_kind::linear_gaussian;
    s = gen_linear_gaussian(zspec, t, seed);
  } else {
    raise("bad-range", "z_source must be 'linear' or 'iid'");
  }
  s.spec = spec;
  s.has_x = true;
  s.x.resize(static_cast<std::size_t>(t));
  auto eng = detail::make_engine(derive_seed(seed, 0x5ed0f));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int row = 0; row < t; ++row) {
    const double sig = named_function(spec.sigma, s.z[static_cast<std::size_t>(row)]);
    const double y = sig * gauss(eng);
    s.x[static_cast<std::size_t>(row)] = y * y;
  }
  return s;
}

namespace detail {

/// Generate one panel column (individual `i`) into contiguous storage.
/// Column i depends only on the derived sub-seed, so panels of different
/// widths share their leading columns and N=1 reduces to a single series.
inline void gen_panel_column(const process_spec& spec, int t, std::uint64_t sub_seed, double* z,
                             double* x) {
  auto eng = make_engine(sub_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = spec.d;
  if (spec.kind == process_kind::panel_fixed_design) {
    // Z_i drawn once, frozen over time: within-individual mixing size 0.
    double zi[8];
    for (int j = 0; j < d; ++j) zi[j] = gauss(eng);
    for (int row = 0; row < t; ++row)
      for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(row) * d + j] = zi[j];
    for (int row = 0; row < t; ++row)
      x[row] = named_function(spec.phi, zi[0]) + spec.noise_sd * gauss(eng);
  } else {
    // Individual AR(1) component plus an iid idiosyncratic part, both unit
    // variance, mixed by the factor loading; stationary initialization.
    const double rho = spec.ar_coef;
    const double lam = spec.factor_loading;
    const double innov_sd = std::sqrt(1.0 - rho * rho);
    const double idio_w = std::sqrt(1.0 - lam * lam);
    double ar = gauss(eng);
    for (int row = 0; row < t; ++row) {
      if (row > 0) ar = rho * ar + innov_sd * gauss(eng);
      const double zv = lam * ar + idio_w * gauss(eng);
      z[static_cast<std::size_t>(row) * d] = zv;
      x[row] = named_function(spec.phi, zv) + spec.noise_sd * gauss(eng);
    }
  }
}

}  // namespace detail

inline std::uint64_t panel_column_seed(std::uint64_t master, int i) {
  return derive_seed(master, 0xC01u, static_cast<std::uint64_t>(i));
}

/// Generate an N x T panel.  fixed_design freezes each individual's design
/// point over time (mixing size 0 within, independence across); the
/// shared-component design mixes a per-individual AR(1) with iid noise.
namespace detail {

inline void validate_panel_spec(const process_spec& spec) {
  if (spec.kind != process_kind::panel_fixed_design &&
      spec.kind != process_kind::panel_shared_factor)
    raise("unsupported-combination", "panel generation requires a panel process kind");
  if (spec.d < 1 || spec.d > 8) raise("out-of-range", "panel dimension must lie in [1,8]");
  if (spec.kind == process_kind::panel_shared_factor && spec.d != 1)
    raise("unsupported-combination", "the shared-component panel design is univariate");
  if (spec.phi.empty()) raise("missing-required", "panel generation requires a phi selector");
  if (!(spec.noise_sd >= 0.0)) raise("out-of-range", "noise_sd must be >= 0");
  if (spec.kind == process_kind::panel_shared_factor &&
      !(std::fabs(spec.ar_coef) < 1.0 && spec.factor_loading >= 0.0 && spec.factor_loading <= 1.0))
    raise("out-of-range", "shared-component panel needs |ar_coef| < 1 and loading in [0,1]");
}

}  // namespace detail

inline panel_sample gen_panel(const process_spec& spec, int n, int t, std::uint64_t seed) {
  if (t < 1 || n < 1) raise("out-of-range", "panel requires N >= 1 and T >= 1");
  detail::validate_panel_spec(spec);

  panel_sample p;
  p.t = t;
  p.n = n;
  p.d = spec.d;
  p.seed = seed;
  p.spec = spec;
  p.z.resize(static_cast<std::size_t>(n) * t * spec.d);
  p.x.resize(static_cast<std::size_t>(n) * t);
  for (int i = 0; i < n; ++i)
    detail::gen_panel_column(spec, t, panel_column_seed(seed, i),
                             p.z.data() + static_cast<std::size_t>(i) * t * spec.d,
                             p.x.data() + static_cast<std::size_t>(i) * t);
  return p;
}

/// One panel column as a standalone series (the N=1 reduction witness).
inline sample panel_column(const process_spec& spec, int t, std::uint64_t master, int i) {
  if (t < 1 || i < 0) raise("out-of-range", "panel column requires T >= 1 and i >= 0");
  detail::validate_panel_spec(spec);
  sample s;
  s.t = t;
  s.d = spec.d;
  s.seed = panel_column_seed(master, i);
  s.spec = spec;
  s.has_x = true;
  s.z.resize(static_cast<std::size_t>(t) * spec.d);
  s.x.resize(static_cast<std::size_t>(t));
  detail::gen_panel_column(spec, t, s.seed, s.z.data(), s.x.data());
  return s;
}

/// Dispatch on the spec's kind for series processes.
inline sample generate_series(const process_spec& spec, int t, std::uint64_t seed) {
  switch (spec.kind) {
    case process_kind::iid: return gen_iid(spec, t, seed);
    case process_kind::linear_gaussian: return gen_linear_gaussian(spec, t, seed);
    case process_kind::arch_inf: return gen_arch_inf(spec, t, seed);
    case process_kind::stoch_vol: return gen_stoch_vol(spec, t, seed);
    default:
      raise("unsupported-combination", "generate_series requires a series process kind");
  }
}

}  // namespace mixkern
