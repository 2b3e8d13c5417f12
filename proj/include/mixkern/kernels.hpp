#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "mixkern/errors.hpp"

namespace mixkern {

/// Univariate kernel families.  Multivariate evaluation is always the
/// multiplicative product of one univariate kernel per coordinate.
enum class kernel_family { rectangular, epanechnikov, gaussian, polynomial };

inline const char* family_name(kernel_family f) {
  switch (f) {
    case kernel_family::rectangular: return "rectangular";
    case kernel_family::epanechnikov: return "epanechnikov";
    case kernel_family::gaussian: return "gaussian";
    case kernel_family::polynomial: return "polynomial";
  }
  return "?";
}

/// An even univariate kernel of order r: integrates to one, moments 1..r-1
/// vanish, the r-th absolute moment is positive.  Evaluation uses u^2 only,
/// so ell(u) == ell(-u) holds exactly in floating point.
struct kernel {
  kernel_family family{kernel_family::epanechnikov};
  int order{2};
  double support_radius{1.0};  ///< ell(u) == 0 for |u| > support_radius
  /// polynomial family: ell(u) = (sum_k coeff[k] u^{2k}) * (1 - u^2) on [-1,1]
  std::array<double, 4> coeff{};
  int n_coeff{0};
};

namespace detail {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;
inline constexpr double gaussian_cut = 8.0;  // truncation point, |u| > 8 -> 0

/// Solve the (r/2)x(r/2) moment system for the polynomial family:
/// ell(u) = p(u^2) * (1 - u^2) on [-1,1] with p an even polynomial of degree
/// r - 2.  Row j imposes  int u^{2j} ell(u) du = [j == 0], using the exact
/// monomial integrals  int_{-1}^{1} u^{2i} (1 - u^2) du = 2/(2i+1) - 2/(2i+3).
inline void solve_polynomial_coeff(int order, std::array<double, 4>& coeff, int& n_coeff) {
  const int n = order / 2;
  double a[4][5];  // augmented system, at most 4x4
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const int i = j + k;
      a[j][k] = 2.0 / (2 * i + 1) - 2.0 / (2 * i + 3);
    }
    a[j][n] = (j == 0) ? 1.0 : 0.0;
  }
  // Gaussian elimination with partial pivoting; the system is tiny and
  // well-conditioned for the supported orders.
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
    if (piv != col)
      for (int k = col; k <= n; ++k) std::swap(a[piv][k], a[col][k]);
    for (int row = col + 1; row < n; ++row) {
      const double m = a[row][col] / a[col][col];
      for (int k = col; k <= n; ++k) a[row][k] -= m * a[col][k];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    double s = a[row][n];
    for (int k = row + 1; k < n; ++k) s -= a[row][k] * coeff[static_cast<std::size_t>(k)];
    coeff[static_cast<std::size_t>(row)] = s / a[row][row];
  }
  n_coeff = n;
}

}  // namespace detail

/// Evaluate the univariate kernel at u.
inline double eval(const kernel& k, double u) {
  const double u2 = u * u;
  switch (k.family) {
    case kernel_family::rectangular:
      return (u2 <= 0.25) ? 1.0 : 0.0;
    case kernel_family::epanechnikov:
      return (u2 <= 1.0) ? 0.75 * (1.0 - u2) : 0.0;
    case kernel_family::gaussian:
      return (u2 <= detail::gaussian_cut * detail::gaussian_cut)
                 ? detail::inv_sqrt_2pi * std::exp(-0.5 * u2)
                 : 0.0;
    case kernel_family::polynomial: {
      if (u2 > 1.0) return 0.0;
      double p = 0.0;
      for (int i = k.n_coeff - 1; i >= 0; --i) p = p * u2 + k.coeff[static_cast<std::size_t>(i)];
      return p * (1.0 - u2);
    }
  }
  return 0.0;
}

/// j-th raw moment  int u^j ell(u) du  by composite Simpson quadrature over
/// the kernel support.  Accuracy far exceeds the 1e-10 construction gate.
inline double moment(const kernel& k, int j) {
  const double radius = k.support_radius;
  const int n = 1 << 16;  // even panel count
  const double h = 2.0 * radius / n;
  auto f = [&](double u) { return std::pow(u, j) * eval(k, u); };
  double acc = f(-radius) + f(radius);
  for (int i = 1; i < n; ++i) acc += f(-radius + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// r-th absolute moment  int |u|^r ell(u) du  (enters the bias constant).
inline double abs_moment(const kernel& k) {
  const double radius = k.support_radius;
  const int n = 1 << 16;
  const double h = 2.0 * radius / n;
  auto f = [&](double u) { return std::pow(std::fabs(u), k.order) * eval(k, u); };
  double acc = f(-radius) + f(radius);
  for (int i = 1; i < n; ++i) acc += f(-radius + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Construct a kernel and verify its moment properties by quadrature.
/// The 1e-10 quadrature gate is a construction-time acceptance check: a
/// kernel object that exists satisfies its order contract.
inline kernel make_kernel(kernel_family family, int order) {
  if (order < 2 || order % 2 != 0)
    raise("invalid-order", "kernel order must be an even integer >= 2, got " +
                               std::to_string(order));
  kernel k;
  k.family = family;
  k.order = order;
  switch (family) {
    case kernel_family::rectangular:
      if (order != 2) raise("unsupported-combination", "rectangular kernel exists only at order 2");
      k.support_radius = 0.5;
      break;
    case kernel_family::epanechnikov:
      if (order != 2)
        raise("unsupported-combination", "epanechnikov kernel exists only at order 2");
      k.support_radius = 1.0;
      break;
    case kernel_family::gaussian:
      if (order != 2) raise("unsupported-combination", "gaussian kernel exists only at order 2");
      k.support_radius = detail::gaussian_cut;
      break;
    case kernel_family::polynomial:
      if (order > 8)
        raise("unsupported-combination",
              "polynomial kernels are provided for orders 2, 4, 6, 8; got " +
                  std::to_string(order));
      k.support_radius = 1.0;
      detail::solve_polynomial_coeff(order, k.coeff, k.n_coeff);
      break;
  }
  constexpr double gate = 1e-10;
  if (std::fabs(moment(k, 0) - 1.0) > gate)
    raise("internal-error", "kernel normalization failed the quadrature gate");
  for (int j = 1; j < order; ++j)
    if (std::fabs(moment(k, j)) > gate)
      raise("internal-error", "kernel moment " + std::to_string(j) + " failed to vanish");
  // Higher-order kernels take negative values, so the order moment can carry
  // either sign; the order contract only requires it to be nonzero.
  if (!(std::fabs(abs_moment(k)) > gate))
    raise("internal-error", "kernel |u|^r moment vanishes");
  return k;
}

inline kernel make_kernel(const std::string& family, int order) {
  if (family == "rectangular") return make_kernel(kernel_family::rectangular, order);
  if (family == "epanechnikov") return make_kernel(kernel_family::epanechnikov, order);
  if (family == "gaussian") return make_kernel(kernel_family::gaussian, order);
  if (family == "polynomial") return make_kernel(kernel_family::polynomial, order);
  raise("unsupported-combination", "unknown kernel family '" + family + "'");
}

/// Scaled multiplicative kernel  K_b(w) = b^{-d} prod_j ell(w_j / b).
/// Compact supports short-circuit: any out-of-support coordinate gives 0.
inline double eval_multiplicative(const kernel& k, const double* w, int d, double b) {
  if (!(b > 0.0)) raise("invalid-bandwidth", "bandwidth must be positive");
  const double inv_b = 1.0 / b;
  double prod = 1.0;
  for (int j = 0; j < d; ++j) {
    const double v = eval(k, w[j] * inv_b);
    if (v == 0.0) return 0.0;
    prod *= v;
  }
  for (int j = 0; j < d; ++j) prod *= inv_b;
  return prod;
}

}  // namespace mixkern
