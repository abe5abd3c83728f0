#include <doctest.h>

#include <sstream>

#include "uinfc/config.hpp"

using namespace uinfc;

TEST_CASE("flat key = value parsing with comments") {
  std::istringstream is(
      "# a comment\n"
      "system = integrator1d\n"
      "x0 = 1.0\n"
      "R = 1.0   # trailing comment\n"
      "r = 0.25\n"
      "\n"
      "delta = 1e-4\n"
      "horizon = 10\n"
      "controller.alpha = 0.25\n"
      "box.lower = -1\n"
      "box.upper = 1\n");
  const Config c = Config::parse(is);
  CHECK(c.get_double("R") == 1.0);
  CHECK(c.get_double("delta") == 1e-4);
  CHECK(c.get_string("system", "") == "integrator1d");
  CHECK(c.get_long("horizon") == 10);
  CHECK(c.get_double("controller.alpha") == 0.25);
  CHECK(c.get_double("missing.key", 7.5) == 7.5);
}

TEST_CASE("parse errors carry a line number") {
  std::istringstream is("system = endi\nthis line has no equals sign\n");
  try {
    Config::parse(is);
    FAIL("expected a config error");
  } catch (const config_error& ex) {
    CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("missing required fields name the field") {
  std::istringstream is(
      "system = integrator1d\nx0 = 1\nR = 1\nr = 0.25\nhorizon = 10\n");
  try {
    build_experiment(Config::parse(is));
    FAIL("expected a config error");
  } catch (const config_error& ex) {
    CHECK(std::string(ex.what()).find("`delta`") != std::string::npos);
  }
}

TEST_CASE("bad numbers and vectors are reported with the field name") {
  std::istringstream is("delta = fast\nx0 = 1,oops\n");
  const Config c = Config::parse(is);
  CHECK_THROWS_WITH_AS(c.get_double("delta"),
                       "config: field `delta` is not a number: fast", config_error);
  CHECK_THROWS_AS(c.get_vec("x0"), config_error);
}

TEST_CASE("experiment construction for the 1-D system") {
  std::istringstream is(
      "system = integrator1d\n"
      "x0 = 1\n"
      "R = 1\n"
      "r = 0.25\n"
      "delta = 1e-2\n"
      "horizon = 5\n"
      "box.lower = -1\n"
      "box.upper = 1\n"
      "controller.alpha = 0.5\n"
      "noise.meas.kind = zero\n"
      "noise.dist.kind = zero\n");
  const Experiment e = build_experiment(Config::parse(is));
  CHECK(e.dyn.n == 1);
  CHECK(e.run.params.alpha == 0.5);
  CHECK(e.run.env_opts.v_bar > 0.0);  // auto-calibrated
  const TrajectoryLog log = simulate(e.run);
  CHECK(log.rows.size() == 6);
}

TEST_CASE("invariant violations in the config are rejected") {
  std::istringstream is(
      "system = integrator1d\n"
      "x0 = 1\n"
      "R = 0.5\n"  // r >= R
      "r = 0.6\n"
      "delta = 1e-2\n"
      "horizon = 5\n"
      "box.lower = -1\n"
      "box.upper = 1\n");
  const Experiment e = build_experiment(Config::parse(is));
  CHECK_THROWS_AS(simulate(e.run), parameter_error);
}

TEST_CASE("sweep value application") {
  std::istringstream is(
      "system = integrator1d\nx0 = 1\nR = 1\nr = 0.25\ndelta = 1e-2\nhorizon = 5\n"
      "box.lower = -1\nbox.upper = 1\n");
  Experiment e = build_experiment(Config::parse(is));
  ShRunConfig run = e.run;
  apply_sweep_value(run, SweepParam::eps_and_eta, 1e-4);
  CHECK(run.params.eps_target == 1e-4);
  CHECK(run.params.eta_target == 1e-4);
  apply_sweep_value(run, SweepParam::e_and_q, 0.5e-3);
  CHECK(run.meas_noise.bound == 0.5e-3);
  CHECK(run.dist_noise.bound == 0.5e-3);
  CHECK_THROWS_AS(apply_sweep_value(run, SweepParam::eps, -1.0), parameter_error);
  CHECK_THROWS_AS(parse_sweep_param("bogus"), config_error);
}

TEST_CASE("environment seed override") {
  const std::string body =
      "system = integrator1d\nx0 = 1\nR = 1\nr = 0.25\ndelta = 1e-2\nhorizon = 5\n"
      "box.lower = -1\nbox.upper = 1\ncontroller.seed = 3\nnoise.meas.seed = 4\n";
  std::istringstream is(body);
  setenv("UINFC_SEED", "99", 1);
  const Experiment e = build_experiment(Config::parse(is));
  unsetenv("UINFC_SEED");
  CHECK(e.run.params.seed == 99);
  CHECK(e.run.meas_noise.seed == mix_seed(99, 101));
  std::istringstream is2(body);
  const Experiment e2 = build_experiment(Config::parse(is2));
  CHECK(e2.run.params.seed == 3);
}
