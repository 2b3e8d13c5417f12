#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "mixkern/config.hpp"
#include "mixkern/errors.hpp"

using namespace mixkern;

namespace {

std::string code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults survive a serialize/parse round trip") {
  const run_config base;
  const std::string text = serialize_config(base);
  const run_config back = parse_config(text);
  CHECK(serialize_config(back) == text);  // canonical form is a fixpoint
  CHECK(back.model.s == base.model.s);
  CHECK(back.model.v == base.model.v);
  CHECK(back.model.v == size_infinity);
  CHECK(back.process.kind == base.process.kind);
  CHECK(back.estimator == base.estimator);
  CHECK(back.t_grid == base.t_grid);
  CHECK(back.z_points == base.z_points);
}

TEST_CASE("partial configs keep defaults for unspecified keys") {
  const run_config cfg = parse_config("[model]\nv = 1.5\n");
  CHECK(cfg.model.v == Catch::Approx(1.5));
  CHECK(cfg.model.s == Catch::Approx(2.0));       // untouched default
  CHECK(cfg.reps == 200);                          // untouched default
  CHECK(cfg.kfamily == kernel_family::epanechnikov);
}

TEST_CASE("infinite sizes parse from 'inf' and serialize back to 'inf'") {
  const run_config cfg = parse_config("[model]\nv = inf\nu = inf\n");
  CHECK(cfg.model.v == size_infinity);
  CHECK(cfg.model.u == size_infinity);
  const std::string text = serialize_config(cfg);
  CHECK(text.find("v = inf\n") != std::string::npos);
  CHECK(text.find("u = inf\n") != std::string::npos);
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
  const std::string text =
      "# leading comment\n"
      "\n"
      "[model]\n"
      "  s   =   3.0   \n"
      "# trailing comment\n"
      "[experiment]\n"
      "reps = 7\n";
  const run_config cfg = parse_config(text);
  CHECK(cfg.model.s == Catch::Approx(3.0));
  CHECK(cfg.reps == 7);
}

TEST_CASE("duplicate keys: the last assignment wins") {
  const run_config cfg = parse_config("[experiment]\nreps = 5\nreps = 9\n");
  CHECK(cfg.reps == 9);
}

TEST_CASE("list values parse and round trip") {
  const run_config cfg =
      parse_config("[experiment]\nt_grid = 64, 128,256\nz_points = -1.0,0.25\n");
  REQUIRE(cfg.t_grid.size() == 3);
  CHECK(cfg.t_grid[2] == 256);
  REQUIRE(cfg.z_points.size() == 2);
  CHECK(cfg.z_points[0] == Catch::Approx(-1.0));
  const run_config back = parse_config(serialize_config(cfg));
  CHECK(back.t_grid == cfg.t_grid);
  CHECK(back.z_points == cfg.z_points);
}

TEST_CASE("process dimension follows the model dimension") {
  const run_config cfg = parse_config("[model]\nd = 2\n");
  CHECK(cfg.model.d == 2);
  CHECK(cfg.process.d == 2);
}

TEST_CASE("unknown sections and keys fail closed") {
  CHECK(code_of("[nosuch]\nx = 1\n") == "unknown-key");
  CHECK(code_of("[model]\nnot_a_key = 1\n") == "unknown-key");
  CHECK(code_of("s = 2\n") == "unknown-key");  // key before any section
}

TEST_CASE("malformed and out-of-range values fail closed with key context") {
  CHECK(code_of("[model]\ns 2\n") == "bad-range");
  CHECK(code_of("[model]\ns = banana\n") == "bad-range");
  CHECK(code_of("[model]\nq = 1.5\n") == "bad-range");
  CHECK(code_of("[model]\ntheta = 0.5\n") == "bad-range");
  CHECK(code_of("[process]\nkind = nosuch\n") == "bad-range");
  CHECK(code_of("[process]\ninnovation_bound = 0\n") == "bad-range");
  CHECK(code_of("[experiment]\norder = 3\n") == "bad-range");
  CHECK(code_of("[experiment]\nt_grid = 64,,256\n") == "bad-range");
  CHECK(code_of("[experiment]\nkernel = nosuch\n") == "bad-range");
  CHECK(code_of("[experiment]\ngrid_min = 2\ngrid_max = -2\n") == "bad-range");
  try {
    parse_config("[model]\nq = 1.5\n");
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(std::string(e.what()).find("model.q") != std::string::npos);
  }
}

TEST_CASE("enum-valued keys parse every documented spelling") {
  const run_config cfg = parse_config(
      "[process]\nkind = stoch_vol\n[experiment]\nestimator = panel_mean\n"
      "rule = misspecified_iid\nkernel = polynomial\norder = 6\n");
  CHECK(cfg.process.kind == process_kind::stoch_vol);
  CHECK(cfg.estimator == estimator_kind::panel_mean);
  CHECK(cfg.rule == bandwidth_rule::misspecified_iid);
  CHECK(cfg.kfamily == kernel_family::polynomial);
  CHECK(cfg.order == 6);
}

TEST_CASE("free-form path and prefix keys round trip untouched") {
  const run_config cfg = parse_config(
      "[experiment]\nsample = data/my sample.csv\n[output]\nprefix = runA_\n");
  CHECK(cfg.sample == "data/my sample.csv");
  CHECK(cfg.prefix == "runA_");
  const run_config back = parse_config(serialize_config(cfg));
  CHECK(back.sample == cfg.sample);
  CHECK(back.prefix == cfg.prefix);
}
