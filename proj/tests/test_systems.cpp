#include <doctest.h>

#include "uinfc/systems.hpp"

using namespace uinfc;

namespace {
void check_close(const Vec& a, const Vec& b, double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}
}  // namespace

TEST_CASE("ENDI right-hand side") {
  check_close(endi_rhs({-1.0, 0.5, 0.2, 0.1, 0.1}, {0.0, 0.0}), {0.1, 0.1, -0.15, 0.0, 0.0});
  CHECK(endi_rhs({0, 0, 0, 0, 0}, {0, 0}) == Vec{0, 0, 0, 0, 0});
  CHECK(endi_rhs({1, 0, 0, 0, 0}, {2, -3}) == Vec{0, 0, 0, 2, -3});
  CHECK_THROWS_AS(endi_rhs({1, 2, 3}, {0, 0}), parameter_error);
}

TEST_CASE("NI right-hand side") {
  CHECK(ni_rhs({1, 2, 0}, {1, 0}) == Vec{1, 0, -2});
  CHECK(ni_rhs({1, 2, 0}, {0, 0}) == Vec{0, 0, 0});
  CHECK(ni_rhs({1, 2, 0}, {0, 1}) == Vec{0, 1, 1});
  CHECK_THROWS_AS(ni_rhs({1, 2}, {0, 0}), parameter_error);
}

TEST_CASE("noise: zero kind") {
  NoiseModel m(NoiseKind::zero, 0.5, 1);
  CHECK(m.emit(3.7, 4) == Vec{0, 0, 0, 0});
}

TEST_CASE("noise: uniform ball norm bound over many draws") {
  NoiseModel m(NoiseKind::uniform_ball, 0.5e-3, 42);
  double max_norm = 0.0;
  for (int i = 0; i < 100000; ++i) max_norm = std::max(max_norm, norm(m.emit(0.0, 5)));
  CHECK(max_norm <= 0.5e-3);
  CHECK(max_norm > 0.25e-3);  // the draws actually fill the ball
}

TEST_CASE("noise: uniform ball determinism given a seed") {
  NoiseModel a(NoiseKind::uniform_ball, 1.0, 7);
  NoiseModel b(NoiseKind::uniform_ball, 1.0, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.emit(0.0, 3) == b.emit(0.0, 3));
  NoiseModel c(NoiseKind::uniform_ball, 1.0, 8);
  bool differs = false;
  a.reset();
  for (int i = 0; i < 10; ++i) differs = differs || a.emit(0.0, 3) != c.emit(0.0, 3);
  CHECK(differs);
}

TEST_CASE("noise: rotating sine keeps the exact amplitude") {
  NoiseModel m(NoiseKind::worst_case_sine, 0.25, 0);
  CHECK(norm(m.emit(0.0, 5)) == doctest::Approx(0.25).epsilon(1e-12));
  for (double t : {0.1, 0.37, 0.5, 0.93, 2.0})
    CHECK(norm(m.emit(t, 5)) <= 0.25 * (1.0 + 1e-12));
  // rotation: the component pattern changes over a period
  const Vec v0 = m.emit(0.0, 5);
  const Vec v1 = m.emit(0.3, 5);
  CHECK(norm_diff(v0, v1) > 1e-3);
  // period 1
  CHECK(norm_diff(m.emit(0.0, 5), m.emit(1.0, 5)) < 1e-9);

  NoiseModel m1(NoiseKind::worst_case_sine, 0.25, 0);
  CHECK(m1.emit(0.0, 1)[0] == doctest::Approx(0.25));
  CHECK(std::abs(m1.emit(0.4, 1)[0]) <= 0.25);
}

TEST_CASE("both systems vanish at the origin with zero input") {
  const Dynamics endi = make_endi_dynamics();
  const Dynamics ni = make_ni_dynamics();
  CHECK(norm(endi(Vec(5, 0.0), Vec(2, 0.0))) == 0.0);
  CHECK(norm(ni(Vec(3, 0.0), Vec(2, 0.0))) == 0.0);
}
