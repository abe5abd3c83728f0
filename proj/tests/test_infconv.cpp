#include <doctest.h>

#include "uinfc/endi_clf.hpp"
#include "uinfc/infconv.hpp"

using namespace uinfc;

namespace {

ClfSpec quad_clf() {  // V(x) = ||x||^2, smooth sanity case
  ClfSpec c;
  c.dim = 2;
  c.value = [](const Vec& x) { return dot(x, x); };
  c.alpha1 = [](double s) { return s * s; };
  c.alpha2 = [](double s) { return s * s; };
  c.nonsmooth_distance = [](const Vec&) { return 1e9; };
  c.nonsmooth_escape = [](const Vec& y, double) { return y; };
  return c;
}

}  // namespace

TEST_CASE("envelope of |x|: closed form") {
  const ClfSpec clf = make_abs_clf();
  EnvelopeOpts opts;
  opts.v_bar = 2.0;
  const auto res = moreau_envelope(clf, {1.0}, 0.5, 0.0, 7, opts);
  CHECK(res.y_eps[0] == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(res.envelope_value == doctest::Approx(0.875).epsilon(1e-9));
  CHECK(res.zeta[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.eps_achieved <= 1e-9);
}

TEST_CASE("envelope at the origin of a positive-definite V") {
  const ClfSpec clf = quad_clf();
  const auto res = moreau_envelope(clf, {0.0, 0.0}, 0.3, 0.0, 7, {});
  CHECK(res.envelope_value == doctest::Approx(0.0));
  CHECK(norm(res.y_eps) == doctest::Approx(0.0));
  CHECK(norm(res.zeta) == doctest::Approx(0.0));
}

TEST_CASE("envelope of the smooth quadratic matches the closed form") {
  // min_y ||y||^2 + ||y-x||^2/(2 a^2) = ||x||^2 / (1 + 2 a^2)
  const ClfSpec clf = quad_clf();
  EnvelopeOpts opts;
  opts.v_bar = 9.0;
  for (double alpha : {0.1, 0.4}) {
    const Vec x = {0.8, -0.55};
    const auto res = moreau_envelope(clf, x, alpha, 0.0, 3, opts);
    const double expect = dot(x, x) / (1.0 + 2.0 * alpha * alpha);
    CHECK(res.envelope_value == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("parameter validation") {
  const ClfSpec clf = make_abs_clf();
  CHECK_THROWS_AS(moreau_envelope(clf, {1.0}, 1.5, 0.0, 0, {}), parameter_error);
  CHECK_THROWS_AS(moreau_envelope(clf, {1.0}, 0.0, 0.0, 0, {}), parameter_error);
  CHECK_THROWS_AS(moreau_envelope(clf, {1.0}, 0.5, -1.0, 0, {}), parameter_error);
  ClfSpec diverging = clf;
  diverging.value = [](const Vec& x) { return std::exp(800.0 * std::abs(x[0] - 1.0)); };
  EnvelopeOpts wide;
  wide.v_bar = 2.0;
  CHECK_THROWS_AS(moreau_envelope(diverging, {1.0}, 0.5, 0.0, 0, wide), solver_error);
}

TEST_CASE("ENDI envelope certified against the grid reference at the case-study state") {
  const ClfSpec clf = make_endi_clf();
  const Vec x0 = {-1.0, 0.5, 0.2, 0.1, 0.1};
  EnvelopeOpts opts;
  opts.v_bar = 8.0;
  const auto res = moreau_envelope(clf, x0, 0.1, 1e-6, 11, opts);
  const double ref = reference_envelope(clf, x0, 0.1, 1e-3);
  CHECK(res.envelope_value >= ref - 1e-6);         // reference is an upper bound, near-tight
  CHECK(res.envelope_value <= ref + 1e-6 + 1e-7);  // within the injected accuracy
}

TEST_CASE("reference envelope: closed form, origin, monotone refinement") {
  const ClfSpec clf = make_abs_clf();
  CHECK(reference_envelope(clf, {1.0}, 0.5, 1e-4) == doctest::Approx(0.875).epsilon(1e-4));
  CHECK(reference_envelope(clf, {0.0}, 0.5, 1e-4) == doctest::Approx(0.0));
  const double r2 = reference_envelope(clf, {1.0}, 0.5, 1e-2);
  const double r3 = reference_envelope(clf, {1.0}, 0.5, 1e-3);
  const double r4 = reference_envelope(clf, {1.0}, 0.5, 1e-4);
  CHECK(r2 >= r3 - 1e-12);
  CHECK(r3 >= r4 - 1e-12);
  CHECK_THROWS_AS(reference_envelope(clf, {1.0}, 0.5, 0.0), parameter_error);
}

TEST_CASE("sandwich check on |x|") {
  const ClfSpec clf = make_abs_clf();
  CHECK(check_sandwich(clf, {1.0}, 0.5, 0.2));
  CHECK(check_sandwich(clf, {0.0}, 0.5, 0.2));
  CHECK_FALSE(check_sandwich(clf, {1.0}, 0.5, 0.1));
  CHECK_THROWS_AS(check_sandwich(clf, {1.0}, 0.5, 0.0), parameter_error);
}

TEST_CASE("proximal inequality on |x| probes") {
  const ClfSpec clf = make_abs_clf();
  EnvelopeOpts opts;
  opts.v_bar = 2.0;
  std::vector<Vec> probes;
  for (int i = 0; i <= 120; ++i) probes.push_back({-3.0 + 0.05 * i});
  auto res = moreau_envelope(clf, {1.0}, 0.5, 0.0, 0, opts);
  CHECK(check_prox_subgradient(clf, res, {1.0}, probes));
  SUBCASE("equality at the minimizer itself") {
    CHECK(check_prox_subgradient(clf, res, {1.0}, {res.y_eps}, 1e-12));
  }
  SUBCASE("corrupted subgradient violates the inequality") {
    res.zeta[0] += 1.0;
    CHECK_FALSE(check_prox_subgradient(clf, res, {1.0}, probes));
  }
}

TEST_CASE("localization property on sampled points (1-D and ENDI)") {
  const ClfSpec abs_clf = make_abs_clf();
  EnvelopeOpts abs_opts;
  abs_opts.v_bar = 1.1;
  for (int i = 0; i < 400; ++i) {
    const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 1, 1.0, 0xe0);
    for (double alpha : {0.05, 0.2, 0.6})
      for (double eps : {0.0, 1e-6, 1e-3}) {
        const auto res = moreau_envelope(abs_clf, x, alpha, eps, 100 + i, abs_opts);
        CHECK(norm_diff(res.y_eps, x) <= std::sqrt(2.0 * abs_opts.v_bar) * alpha * (1 + 1e-9));
        CHECK(res.eps_achieved <= std::max(eps, 1e-9) * (1 + 1e-12));
      }
  }

  const ClfSpec endi = make_endi_clf();
  EnvelopeOpts endi_opts;
  double v_bar = 0.0;
  for (int i = 0; i < 256; ++i)
    v_bar = std::max(v_bar, endi(halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xe1)));
  endi_opts.v_bar = 1.1 * v_bar;
  for (int i = 0; i < 25; ++i) {
    const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xe2);
    const auto res = moreau_envelope(endi, x, 0.1, 1e-6, 55 + i, endi_opts);
    CHECK(norm_diff(res.y_eps, x) <= std::sqrt(2.0 * endi_opts.v_bar) * 0.1 * (1 + 1e-9));
  }
}

TEST_CASE("envelope dominance: exact-mode value never exceeds V(x) + floor") {
  const ClfSpec clf = make_endi_clf();
  for (int i = 0; i < 25; ++i) {
    const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.3, 0xe3);
    const auto res = moreau_envelope(clf, x, 0.1, 0.0, 0, {});
    CHECK(res.envelope_value <= clf(x) + 1e-9);
  }
}

TEST_CASE("monotonicity of the reference envelope in alpha") {
  const ClfSpec clf = make_abs_clf();
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.1, 0.3, 0.5, 0.8}) {
    const double v = reference_envelope(clf, {1.0}, alpha, 1e-4);
    CHECK(v <= prev + 1e-10);
    prev = v;
  }
}

TEST_CASE("zeta consistency and injected inexactness calibration") {
  const ClfSpec clf = make_abs_clf();
  EnvelopeOpts opts;
  opts.v_bar = 1.6;
  int injected = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 1, 1.2, 0xe4);
    for (double eps : {1e-6, 1e-4, 1e-2}) {
      const auto res = moreau_envelope(clf, x, 0.3, eps, 1000 + i, opts);
      for (std::size_t j = 0; j < res.zeta.size(); ++j)
        CHECK(res.zeta[j] == (x[j] - res.y_eps[j]) / (0.3 * 0.3));
      if (eps > 10 * opts.solver_floor) {
        CHECK(res.eps_achieved >= 0.5 * eps);
        CHECK(res.eps_achieved <= eps);
        ++injected;
      }
    }
  }
  CHECK(injected > 0);
}

TEST_CASE("directional-derivative surrogate bound at regular points") {
  // Exact-mode subgradients satisfy <zeta, theta> <= FD-quotient + nu at the
  // minimizer, along unit jet directions the closed loop would use. The
  // envelope is solved to a tighter floor here: the subgradient error scales
  // like sqrt(2 floor) / alpha and must stay well inside nu.
  const ClfSpec clf = make_endi_clf();
  const Dynamics dyn = make_endi_dynamics();
  EnvelopeOpts opts;
  opts.v_bar = 8.0;
  opts.solver_floor = 1e-11;
  const double nu_tol = 1e-3;
  const double chi = 1e-3;
  const std::vector<double> schedule = {1e-4, 1e-5, 1e-6};
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xe5);
    const auto res = moreau_envelope(clf, x, 0.1, 0.0, 0, opts);
    const Vec y = regularize_point(clf, res.y_eps, chi);
    if (norm_diff(y, res.y_eps) > 0.0) continue;  // stay on exact-subgradient points
    for (int j = 0; j < 8; ++j) {
      const Vec u = {6.0 * halton(static_cast<std::uint64_t>(8 * i + j) + 1, 2) - 3.0,
                     6.0 * halton(static_cast<std::uint64_t>(8 * i + j) + 1, 3) - 3.0};
      Vec theta = dyn(y, u);
      const double tn = norm(theta);
      if (tn == 0.0) continue;
      theta = scale(theta, 1.0 / tn);
      const double fd = dini_derivative_fd(clf, y, theta, schedule);
      CHECK(dot(res.zeta, theta) <= fd + nu_tol);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}
