#include <doctest.h>

#include "uinfc/clf.hpp"
#include "uinfc/endi_clf.hpp"

using namespace uinfc;

TEST_CASE("difference-quotient directional derivative on |x|") {
  const ClfSpec clf = make_abs_clf();
  // at the kink, forward quotient along +1 is exactly 1
  CHECK(dini_derivative_fd(clf, {0.0}, {1.0}, {0.1, 0.01}) == doctest::Approx(1.0));
  // away from the kink the quotient is exact for steps below the distance
  CHECK(dini_derivative_fd(clf, {2.0}, {-1.0}, {0.1, 0.01}) == doctest::Approx(-1.0));
}

TEST_CASE("difference-quotient derivative of the NI closed-form CLF") {
  ClfSpec clf;
  clf.dim = 3;
  clf.value = [](const Vec& x) { return v_tilde(x); };
  const double d = dini_derivative_fd(clf, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0},
                                      {1e-2, 1e-3, 1e-4});
  CHECK(d == doctest::Approx(-2.0).epsilon(0.05 / 2.0));
}

TEST_CASE("dini derivative input validation") {
  const ClfSpec clf = make_abs_clf();
  CHECK_THROWS_AS(dini_derivative_fd(clf, {0.0}, {1.0}, {}), parameter_error);
  CHECK_THROWS_AS(dini_derivative_fd(clf, {0.0}, {1.0}, {0.1, -0.1}), parameter_error);
  ClfSpec bad = clf;
  bad.value = [](const Vec&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(dini_derivative_fd(bad, {0.0}, {1.0}, {0.1}), evaluation_error);
}

TEST_CASE("class-K radius maps") {
  ClfSpec clf = make_abs_clf();
  CHECK(rho_V(clf, 0.5) == doctest::Approx(0.5));
  CHECK(lambda_V(clf, 0.25) == doctest::Approx(0.25));

  clf.alpha1 = [](double s) { return s * s; };
  clf.alpha2 = [](double s) { return 2.0 * s * s; };
  CHECK(rho_V(clf, 2.0) == doctest::Approx(4.0));
  CHECK(lambda_V(clf, 2.0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(rho_V(clf, -1.0), parameter_error);
  CHECK_THROWS_AS(lambda_V(clf, 0.0), parameter_error);
}

TEST_CASE("radius map implications audited by sampling") {
  EndiCalibration cal;
  const ClfSpec clf = make_endi_clf({}, &cal);
  REQUIRE(cal.c1 > 0.0);
  REQUIRE(cal.c2 > cal.c1);
  for (double r : {0.3, 0.7, 1.2}) {
    const double level = rho_V(clf, r);
    const double lam = lambda_V(clf, level);
    int inside = 0;
    for (int i = 0; i < 1000; ++i) {
      // half the samples from a small ball so the sublevel set is populated
      const double rad = (i % 2) ? cal.radius : 0.5 * r;
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, rad, 0xc0);
      const double v = clf(x);
      if (v <= level) {
        ++inside;
        CHECK(norm(x) <= r * (1.0 + 1e-9));
      }
      if (v >= level) CHECK(norm(x) >= lam * (1.0 - 1e-9));
    }
    CHECK(inside > 0);  // the audit actually exercised the implication
  }
}

TEST_CASE("point regularization on |x|") {
  const ClfSpec clf = make_abs_clf();
  SUBCASE("point on the kink neighborhood moves off it") {
    const Vec y = regularize_point(clf, {0.01}, 0.1);
    CHECK(std::abs(y[0]) > 0.05);
    CHECK(std::abs(y[0] - 0.01) <= 0.1 + 1e-12);
  }
  SUBCASE("clear points are returned unchanged") {
    const Vec y = regularize_point(clf, {5.0}, 0.1);
    CHECK(y[0] == 5.0);
  }
  SUBCASE("idempotent on regularized output") {
    const Vec y = regularize_point(clf, {0.01}, 0.1);
    const Vec z = regularize_point(clf, y, 0.1);
    CHECK(z == y);
  }
  CHECK_THROWS_AS(regularize_point(clf, {0.0}, 0.0), parameter_error);
}

TEST_CASE("point regularization on the ENDI bad set") {
  const ClfSpec clf = make_endi_clf();
  SUBCASE("ridge phi1 = phi2 = 0") {
    const Vec y = {0.0, 0.0, 0.3, 0.1, 0.1};
    const Vec yt = regularize_point(clf, y, 0.02);
    CHECK(std::sqrt(yt[0] * yt[0] + yt[1] * yt[1]) > 0.01);
    CHECK(norm_diff(yt, y) <= 0.02 + 1e-12);
    // quotients along a fixed direction stabilize at the regularized point
    const Vec theta = {1.0, 1.0, 1.0, 0.0, 0.0};
    const double q1 = (clf(axpy(yt, 1e-5, theta)) - clf(yt)) / 1e-5;
    const double q2 = (clf(axpy(yt, 1e-6, theta)) - clf(yt)) / 1e-6;
    CHECK(q1 == doctest::Approx(q2).epsilon(1e-2));
  }
  SUBCASE("doubly degenerate point still clears the set") {
    const Vec y = {0.0, 0.0, 0.004, 0.05, -0.02};
    const double chi = 0.02;
    const Vec yt = regularize_point(clf, y, chi);
    CHECK(clf.nonsmooth_distance(yt) > chi / 2.0);
    CHECK(norm_diff(yt, y) <= chi * (1.0 + 1e-9));
  }
}

TEST_CASE("escape failure reported when the oracle cannot make progress") {
  ClfSpec clf = make_abs_clf();
  clf.nonsmooth_escape = [](const Vec& y, double) { return y; };
  CHECK_THROWS_AS(regularize_point(clf, {0.0}, 0.1), regularization_error);
}

TEST_CASE("escape displacement stays within chi on sampled pairs") {
  const ClfSpec clf = make_endi_clf();
  for (int i = 0; i < 200; ++i) {
    const Vec y = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.5, 0xc1);
    const double chi = 0.001 + 0.05 * halton(static_cast<std::uint64_t>(i) + 1, 3);
    const Vec yt = clf.nonsmooth_escape(y, chi);
    CHECK(norm_diff(yt, y) <= chi * (1.0 + 1e-12));
  }
}
