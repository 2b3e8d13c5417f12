#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "mixkern/csv.hpp"
#include "mixkern/errors.hpp"
#include "mixkern/processes.hpp"

using namespace mixkern;

namespace {

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t i = from; i < to; ++i) m += v[i];
  return m / static_cast<double>(to - from);
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v, 0, v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double lag1_corr(const std::vector<double>& v) {
  const double m = mean_of(v, 0, v.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) num += (v[i] - m) * (v[i + 1] - m);
  for (double x : v) den += (x - m) * (x - m);
  return num / den;
}

}  // namespace

TEST_CASE("generators are pure functions of (spec, T, seed)") {
  process_spec spec;
  spec.kind = process_kind::linear_gaussian;
  const sample a = generate_series(spec, 500, 42);
  const sample b = generate_series(spec, 500, 42);
  CHECK(a.z == b.z);
  const sample c = generate_series(spec, 500, 43);
  CHECK(a.z != c.z);
}

TEST_CASE("iid design: moments and the regression attachment") {
  process_spec spec;
  spec.kind = process_kind::iid;
  spec.phi = "sin";
  const sample s = gen_iid(spec, 100000, 20260816u);
  REQUIRE(s.has_x);
  CHECK(std::fabs(mean_of(s.z, 0, s.z.size())) < 0.02);
  CHECK(std::fabs(var_of(s.z) - 1.0) < 0.02);
  // Residuals around the attached mean have sd noise_sd * h = 0.5.
  std::vector<double> resid(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) resid[i] = s.x[i] - std::sin(s.z[i]);
  CHECK(std::fabs(std::sqrt(var_of(resid)) - 0.5) < 0.01);
}

TEST_CASE("linear process: unit variance and the coefficient-sum lag oracle") {
  process_spec spec;
  spec.kind = process_kind::linear_gaussian;
  spec.theta = 2.0;
  const sample s = gen_linear_gaussian(spec, 200000, 7u);
  CHECK(std::fabs(var_of(s.z) - 1.0) < 0.02);

  // Independent oracle: lag-1 autocorrelation of the untruncated process,
  // sum_j a_j a_{j+1} / sum_j a_j^2 with a_j = (1+j)^{-theta}.
  double num = 0.0, den = 0.0;
  for (int j = 0; j < 1000000; ++j) {
    const double aj = std::pow(1.0 + j, -spec.theta);
    num += aj * std::pow(2.0 + j, -spec.theta);
    den += aj * aj;
  }
  CHECK(std::fabs(lag1_corr(s.z) - num / den) < 0.01);
}

TEST_CASE("linear process rejects nonsummable decay") {
  process_spec spec;
  spec.kind = process_kind::linear_gaussian;
  spec.theta = 0.5;
  try {
    gen_linear_gaussian(spec, 100, 1u);
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.code()) == "nonsummable-coefficients");
  }
}

TEST_CASE("linear process honors a manual truncation override") {
  process_spec spec;
  spec.kind = process_kind::linear_gaussian;
  spec.theta = 0.8;  // automatic rule would demand a huge window
  spec.truncation = 64;
  const sample s = gen_linear_gaussian(spec, 50000, 99u);
  // Rescaled on the actual window; the sample variance of this strongly
  // dependent series has a standard error near 0.015 at this length.
  CHECK(std::fabs(var_of(s.z) - 1.0) < 0.06);
  // A window of 64 makes the series an order-64 moving average: population
  // correlation is sizable at lag 1 and exactly zero beyond the window.
  auto lag_corr = [&](int lag) {
    const double m = mean_of(s.z, 0, s.z.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < s.z.size(); ++i)
      num += (s.z[i] - m) * (s.z[i + static_cast<std::size_t>(lag)] - m);
    for (double z : s.z) den += (z - m) * (z - m);
    return num / den;
  };
  CHECK(lag_corr(1) > 0.7);
  CHECK(std::fabs(lag_corr(80)) < 0.05);
}

TEST_CASE("bounded-innovation recursion: stationarity gate and path bound") {
  process_spec spec;
  spec.kind = process_kind::arch_inf;
  spec.delta = 2.0;
  spec.innovation_bound = 0.9;
  spec.gate = 0.4;
  const sample s = gen_arch_inf(spec, 200000, 11u);

  // Worst-case fixed point: sup = a sqrt(a0 / (1 - a^2 sum a_j)) with
  // a^2 sum a_j = gate sqrt(5) by construction.
  const double sup_gate = spec.gate * std::sqrt(5.0);
  const double bound = spec.innovation_bound * std::sqrt(spec.a0 / (1.0 - sup_gate));
  CHECK(s.bound == Catch::Approx(bound).margin(1e-12));
  double peak = 0.0;
  for (double z : s.z) peak = std::max(peak, std::fabs(z));
  CHECK(peak <= s.bound);

  // Stationary second moment: E Z^2 = a0 E eps^2 / (1 - E eps^2 sum a_j).
  const double e2 = spec.innovation_bound * spec.innovation_bound / 3.0;
  const double coef_sum = spec.gate / (spec.innovation_bound * spec.innovation_bound / std::sqrt(5.0));
  const double var_oracle = spec.a0 * e2 / (1.0 - e2 * coef_sum);
  CHECK(std::fabs(var_of(s.z) - var_oracle) < 0.03);
}

TEST_CASE("bounded-innovation recursion: rejected specs") {
  process_spec spec;
  spec.kind = process_kind::arch_inf;
  spec.gate = 1.1;
  try {
    gen_arch_inf(spec, 100, 1u);
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.code()) == "nonstationary-spec");
  }
  spec.gate = 0.5;  // sup-recursion no longer contractive: no finite bound
  const sample s = gen_arch_inf(spec, 1000, 1u);
  CHECK(std::isinf(s.bound));

  spec.innovation_bound = 1.2;
  CHECK_THROWS_AS(gen_arch_inf(spec, 100, 1u), error);
}

TEST_CASE("volatility design: squared response with the right conditional mean") {
  process_spec spec;
  spec.kind = process_kind::stoch_vol;
  const sample s = gen_stoch_vol(spec, 100000, 5u);
  REQUIRE(s.has_x);
  for (double x : s.x) REQUIRE(x >= 0.0);

  // Oracle: E X = E sigma(Z)^2 over a standard normal Z, by quadrature.
  double ex = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = -8.0 + 16.0 * (i + 0.5) / n;
    const double sig = 1.0 + 0.5 * std::tanh(z);
    ex += sig * sig * std::exp(-0.5 * z * z);
  }
  ex *= 16.0 / n / std::sqrt(2.0 * 3.14159265358979323846);
  CHECK(std::fabs(mean_of(s.x, 0, s.x.size()) - ex) < 0.03);

  process_spec bad = spec;
  bad.sigma = "sin";
  try {
    gen_stoch_vol(bad, 100, 1u);
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.code()) == "invalid-volatility");
  }
}

TEST_CASE("frozen-design panel: constant design, varying response") {
  process_spec spec;
  spec.kind = process_kind::panel_fixed_design;
  spec.phi = "sin";
  const panel_sample p = gen_panel(spec, 6, 50, 3u);
  for (int i = 0; i < p.n; ++i)
    for (int t = 1; t < p.t; ++t) CHECK(p.z_col(i)[t] == p.z_col(i)[0]);
  CHECK(p.z_col(0)[0] != p.z_col(1)[0]);
  CHECK(p.x_col(0)[0] != p.x_col(0)[1]);
}

TEST_CASE("shared-component panel: within-individual memory, cross independence") {
  process_spec spec;
  spec.kind = process_kind::panel_shared_factor;
  spec.phi = "sin";
  const int n = 50, t = 2000;
  const panel_sample p = gen_panel(spec, n, t, 13u);

  // Pooled lag-1 autocorrelation: loading^2 * ar_coef = 0.49 * 0.6.
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* z = p.z_col(i);
    for (int tau = 0; tau + 1 < t; ++tau) num += z[tau] * z[tau + 1];
    for (int tau = 0; tau < t; ++tau) den += z[tau] * z[tau];
  }
  CHECK(std::fabs(num / den - 0.49 * 0.6) < 0.02);
  CHECK(std::fabs(den / (static_cast<double>(n) * t) - 1.0) < 0.03);

  // Same-period cross-individual correlation vanishes.
  double cross = 0.0;
  for (int tau = 0; tau < t; ++tau) cross += p.z_col(0)[tau] * p.z_col(1)[tau];
  CHECK(std::fabs(cross / t) < 0.05);
}

TEST_CASE("panel columns depend only on their sub-seed") {
  process_spec spec;
  spec.kind = process_kind::panel_shared_factor;
  spec.phi = "cos";
  const panel_sample p1 = gen_panel(spec, 1, 200, 77u);
  const panel_sample p3 = gen_panel(spec, 3, 200, 77u);
  const sample col0 = panel_column(spec, 200, 77u, 0);

  CHECK(std::vector<double>(p1.z.begin(), p1.z.end()) == col0.z);
  CHECK(std::vector<double>(p1.x.begin(), p1.x.end()) == col0.x);
  CHECK(std::vector<double>(p3.z.begin(), p3.z.begin() + 200) == col0.z);

  const sample col2 = panel_column(spec, 200, 77u, 2);
  CHECK(std::vector<double>(p3.z.begin() + 400, p3.z.end()) == col2.z);
}

TEST_CASE("panel generation: rejected specs") {
  process_spec spec;
  spec.kind = process_kind::panel_fixed_design;
  try {
    gen_panel(spec, 4, 50, 1u);  // no phi
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.code()) == "missing-required");
  }
  spec.phi = "sin";
  spec.kind = process_kind::iid;
  CHECK_THROWS_AS(gen_panel(spec, 4, 50, 1u), error);
  spec.kind = process_kind::panel_fixed_design;
  CHECK_THROWS_AS(generate_series(spec, 50, 1u), error);
}

TEST_CASE("all generators look stationary across sample halves") {
  const double tol_factor = 5.0;
  auto check_halves = [&](const std::vector<double>& z) {
    const std::size_t half = z.size() / 2;
    const double d = mean_of(z, 0, half) - mean_of(z, half, z.size());
    CHECK(std::fabs(d) < tol_factor / std::sqrt(static_cast<double>(z.size())));
  };

  process_spec spec;
  spec.kind = process_kind::iid;
  check_halves(gen_iid(spec, 40000, 20260816u).z);

  spec.kind = process_kind::linear_gaussian;
  spec.theta = 2.0;
  check_halves(gen_linear_gaussian(spec, 40000, 20260816u).z);

  spec.kind = process_kind::arch_inf;
  spec.delta = 2.0;
  spec.gate = 0.4;
  check_halves(gen_arch_inf(spec, 20000, 20260816u).z);

  spec.kind = process_kind::stoch_vol;
  check_halves(gen_stoch_vol(spec, 40000, 20260816u).z);

  spec.kind = process_kind::panel_shared_factor;
  spec.phi = "sin";
  check_halves(gen_panel(spec, 1, 40000, 20260816u).z);
}

TEST_CASE("sample CSV round trip is exact") {
  process_spec spec;
  spec.kind = process_kind::iid;
  spec.phi = "tanh";
  const sample s = gen_iid(spec, 37, 123u);
  const csv_sample_data back = csv_to_sample_data(sample_to_csv(s));
  REQUIRE(back.t == s.t);
  REQUIRE(back.n == 1);
  REQUIRE(back.d == s.d);
  REQUIRE(back.has_x);
  CHECK(back.z == s.z);
  CHECK(back.x == s.x);

  process_spec noattach;
  const sample plain = gen_iid(noattach, 9, 5u);
  const csv_sample_data back2 = csv_to_sample_data(sample_to_csv(plain));
  CHECK_FALSE(back2.has_x);
  CHECK(back2.z == plain.z);
}

TEST_CASE("panel CSV round trip is exact") {
  process_spec spec;
  spec.kind = process_kind::panel_shared_factor;
  spec.phi = "sin";
  const panel_sample p = gen_panel(spec, 4, 25, 9u);
  const csv_sample_data back = csv_to_sample_data(panel_to_csv(p));
  REQUIRE(back.t == p.t);
  REQUIRE(back.n == p.n);
  CHECK(back.z == p.z);
  CHECK(back.x == p.x);
  const panel_sample p2 = csv_data_to_panel(back);
  CHECK(p2.z == p.z);
}

TEST_CASE("sample CSV parsing is fail-closed") {
  CHECK_THROWS_AS(csv_to_sample_data(""), error);
  CHECK_THROWS_AS(csv_to_sample_data("a,b,c\n"), error);
  CHECK_THROWS_AS(csv_to_sample_data("t,i,x,z1\n0,0,1.0\n"), error);          // ragged
  CHECK_THROWS_AS(csv_to_sample_data("t,i,x,z1\n0,0,1.0,0.5\n0,0,1.0,0.5\n"), error);  // repeat
  CHECK_THROWS_AS(csv_to_sample_data("t,i,x,z1\n0,0,1.0,0.5\n1,0,,0.5\n"), error);     // mixed x
  CHECK_THROWS_AS(csv_to_sample_data("t,i,x,z1\n0,0,1.0,abc\n"), error);      // bad number
  // Full rectangle required.
  CHECK_THROWS_AS(csv_to_sample_data("t,i,x,z1\n0,0,1.0,0.5\n1,1,1.0,0.5\n"), error);
}
