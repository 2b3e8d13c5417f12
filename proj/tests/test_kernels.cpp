#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mixkern/errors.hpp"
#include "mixkern/kernels.hpp"

using namespace mixkern;

namespace {

// Independent quadrature oracle: plain midpoint rule with a large fixed
// panel count, deliberately different from the library's integrator.
double oracle_moment(const kernel& k, int j) {
  const double lo = -k.support_radius, hi = k.support_radius;
  const int n = 400000;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = lo + (i + 0.5) * h;
    acc += std::pow(u, j) * eval(k, u);
  }
  return acc * h;
}

}  // namespace

TEST_CASE("second-order kernels normalize and kill the first moment") {
  for (auto fam : {kernel_family::rectangular, kernel_family::epanechnikov,
                   kernel_family::gaussian, kernel_family::polynomial}) {
    kernel k = make_kernel(fam, 2);
    CHECK(std::fabs(oracle_moment(k, 0) - 1.0) < 1e-8);
    CHECK(std::fabs(oracle_moment(k, 1)) < 1e-12);
    CHECK(oracle_moment(k, 2) > 1e-3);
  }
}

TEST_CASE("closed-form moments match analytic values") {
  kernel epan = make_kernel(kernel_family::epanechnikov, 2);
  // 0.75 (1 - u^2) on [-1, 1]: second moment 1/5 (= the order-2 absolute moment).
  CHECK(std::fabs(moment(epan, 2) - 0.2) < 1e-10);
  CHECK(std::fabs(abs_moment(epan) - 0.2) < 1e-10);

  kernel rect = make_kernel(kernel_family::rectangular, 2);
  // Indicator on [-1/2, 1/2]: second moment 1/12.
  CHECK(std::fabs(moment(rect, 2) - 1.0 / 12.0) < 1e-10);

  kernel gauss = make_kernel(kernel_family::gaussian, 2);
  CHECK(std::fabs(moment(gauss, 2) - 1.0) < 1e-8);
}

TEST_CASE("order-4 polynomial kernel has the textbook coefficients") {
  // (15/32)(1 - u^2)(3 - 7u^2) = (45/32 - 105/32 u^2)(1 - u^2).
  kernel k = make_kernel(kernel_family::polynomial, 4);
  REQUIRE(k.n_coeff == 2);
  CHECK(std::fabs(k.coeff[0] - 45.0 / 32.0) < 1e-12);
  CHECK(std::fabs(k.coeff[1] + 105.0 / 32.0) < 1e-12);
}

TEST_CASE("order-2 polynomial kernel reduces to the parabolic kernel") {
  kernel poly = make_kernel(kernel_family::polynomial, 2);
  kernel epan = make_kernel(kernel_family::epanechnikov, 2);
  for (double u : {-0.9, -0.35, 0.0, 0.2, 0.77}) {
    CHECK(std::fabs(eval(poly, u) - eval(epan, u)) < 1e-12);
  }
}

TEST_CASE("higher-order polynomial kernels satisfy the moment gates") {
  for (int order : {4, 6, 8}) {
    kernel k = make_kernel(kernel_family::polynomial, order);
    CHECK(std::fabs(oracle_moment(k, 0) - 1.0) < 1e-7);
    for (int j = 1; j < order; ++j) CHECK(std::fabs(oracle_moment(k, j)) < 1e-7);
    CHECK(std::fabs(oracle_moment(k, order)) > 1e-4);
  }
}

TEST_CASE("kernel evaluation is exactly even and supported") {
  for (auto fam : {kernel_family::rectangular, kernel_family::epanechnikov,
                   kernel_family::gaussian, kernel_family::polynomial}) {
    kernel k = make_kernel(fam, 2);
    for (double u : {0.1, 0.43, 0.9, 1.7, 9.0}) {
      CHECK(eval(k, u) == eval(k, -u));
      if (u > k.support_radius) CHECK(eval(k, u) == 0.0);
    }
  }
  kernel rect = make_kernel(kernel_family::rectangular, 2);
  CHECK(eval(rect, 0.5) == 1.0);   // boundary included
  CHECK(eval(rect, 0.5001) == 0.0);
}

TEST_CASE("multiplicative kernel factorizes over coordinates") {
  kernel k = make_kernel(kernel_family::epanechnikov, 2);
  const double b = 0.37;
  double w[2] = {0.11, -0.25};
  const double expect = eval(k, w[0] / b) * eval(k, w[1] / b) / (b * b);
  CHECK(std::fabs(eval_multiplicative(k, w, 2, b) - expect) < 1e-14);

  double far[2] = {2.0, 0.0};  // one dead coordinate kills the product
  CHECK(eval_multiplicative(k, far, 2, b) == 0.0);
}

TEST_CASE("kernel construction rejects bad requests") {
  CHECK_THROWS_AS(make_kernel(kernel_family::epanechnikov, 3), error);
  CHECK_THROWS_AS(make_kernel(kernel_family::epanechnikov, 0), error);
  CHECK_THROWS_AS(make_kernel(kernel_family::gaussian, 4), error);
  CHECK_THROWS_AS(make_kernel(kernel_family::polynomial, 10), error);
  CHECK_THROWS_AS(make_kernel("no-such-kernel", 2), error);

  try {
    make_kernel(kernel_family::rectangular, 4);
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.code()) == "unsupported-combination");
  }
}

TEST_CASE("multiplicative kernel rejects nonpositive bandwidths") {
  kernel k = make_kernel(kernel_family::epanechnikov, 2);
  double w[1] = {0.1};
  CHECK_THROWS_AS(eval_multiplicative(k, w, 1, 0.0), error);
  CHECK_THROWS_AS(eval_multiplicative(k, w, 1, -0.2), error);
}

TEST_CASE("string construction matches enum construction") {
  kernel a = make_kernel("epanechnikov", 2);
  kernel b = make_kernel(kernel_family::epanechnikov, 2);
  CHECK(a.family == b.family);
  CHECK(eval(a, 0.3) == eval(b, 0.3));
  kernel p = make_kernel("polynomial", 6);
  CHECK(p.order == 6);
}
