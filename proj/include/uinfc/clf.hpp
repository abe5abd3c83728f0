#pragma once

#include <algorithm>
#include <functional>
#include <limits>

#include "uinfc/core.hpp"

namespace uinfc {

// Compact box of admissible controls.
struct BoxSet {
  Vec lower;
  Vec upper;

  BoxSet() = default;
  BoxSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
      throw parameter_error("BoxSet: dimension mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
        throw parameter_error("BoxSet: bounds must be finite with lower <= upper");
    }
  }

  static BoxSet cube(int m, double lo, double hi) {
    return BoxSet(Vec(static_cast<std::size_t>(m), lo), Vec(static_cast<std::size_t>(m), hi));
  }

  int dim() const { return static_cast<int>(lower.size()); }

  Vec midpoint() const {
    Vec m(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) m[i] = 0.5 * (lower[i] + upper[i]);
    return m;
  }

  Vec clamp(Vec u) const {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], lower[i], upper[i]);
    return u;
  }

  bool contains(const Vec& u, double tol = 0.0) const {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
    return true;
  }
};

// A locally Lipschitz control Lyapunov function together with its decay
// function, class-K envelope and an oracle for the (measure-zero) set where
// the difference quotients of V do not stabilize.
struct ClfSpec {
  int dim = 0;
  std::function<double(const Vec&)> value;              // V(x)
  std::function<double(const Vec&)> decay;              // w(x) >= 0
  std::function<double(double)> alpha1;                 // class-K lower envelope
  std::function<double(double)> alpha2;                 // class-K upper envelope
  std::function<double(const Vec&)> nonsmooth_distance; // distance to the bad set
  std::function<Vec(const Vec&, double)> nonsmooth_escape;

  double operator()(const Vec& x) const {
    const double v = value(x);
    if (!std::isfinite(v)) throw evaluation_error("ClfSpec: V(x) is not finite");
    return v;
  }
};

// Finite-difference surrogate of the lower directional derivative: the minimum
// of forward difference quotients over a decreasing step schedule. On points
// where the quotients stabilize the surrogate is within the stabilization
// tolerance of the true liminf; elsewhere it is only an upper estimate.
inline double dini_derivative_fd(const ClfSpec& clf, const Vec& x, const Vec& theta,
                                 const std::vector<double>& mu_schedule) {
  if (mu_schedule.empty()) throw parameter_error("dini_derivative_fd: empty mu schedule");
  const double vx = clf(x);
  double best = std::numeric_limits<double>::infinity();
  for (double mu : mu_schedule) {
    if (!(mu > 0.0)) throw parameter_error("dini_derivative_fd: mu must be positive");
    const double q = (clf(axpy(x, mu, theta)) - vx) / mu;
    best = std::min(best, q);
  }
  return best;
}

// Default step schedule, scaled so the steps are relative to a unit direction.
inline std::vector<double> default_mu_schedule(const Vec& theta) {
  const double tn = norm(theta);
  const double s = tn > 0.0 ? 1.0 / tn : 1.0;
  return {1e-2 * s, 1e-3 * s, 1e-4 * s};
}

inline double dini_derivative_fd(const ClfSpec& clf, const Vec& x, const Vec& theta) {
  return dini_derivative_fd(clf, x, theta, default_mu_schedule(theta));
}

// V(x) <= rho_V(r)  =>  ||x|| <= r
inline double rho_V(const ClfSpec& clf, double r) {
  if (!(r > 0.0)) throw parameter_error("rho_V: r must be positive");
  return clf.alpha1(r);
}

// V(x) >= v  =>  ||x|| >= lambda_V(v).  Inverse of alpha2 by monotone bisection.
inline double lambda_V(const ClfSpec& clf, double v) {
  if (!(v > 0.0)) throw parameter_error("lambda_V: v must be positive");
  double hi = 1.0;
  int grow = 0;
  while (clf.alpha2(hi) < v) {
    hi *= 2.0;
    if (++grow > 200) throw config_error("lambda_V: alpha2 does not reach target value");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (clf.alpha2(mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Replace y by a nearby point where the difference quotients of V stabilize:
// ||y~ - y|| <= chi and nonsmooth_distance(y~) > chi/2. Points already clear
// of the bad set are returned unchanged. The escape oracle is re-applied a
// bounded number of times within the chi budget; distances like min(a, b)
// need one step per degenerate arm.
inline Vec regularize_point(const ClfSpec& clf, const Vec& y, double chi) {
  if (!(chi > 0.0)) throw parameter_error("regularize_point: chi must be positive");
  Vec cur = y;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (clf.nonsmooth_distance(cur) > 0.5 * chi) return cur;
    Vec cand = clf.nonsmooth_escape(cur, chi);
    if (norm_diff(cand, y) > chi * (1.0 + 1e-12)) break;  // budget exhausted
    if (norm_diff(cand, cur) == 0.0) break;               // oracle made no progress
    cur = std::move(cand);
  }
  if (clf.nonsmooth_distance(cur) > 0.5 * chi && norm_diff(cur, y) <= chi * (1.0 + 1e-12))
    return cur;
  throw regularization_error("regularize_point: escape oracle failed to clear the nonsmooth set");
}

// Deterministic escape used by the built-in CLFs: step chi/sqrt(2) along the
// signed coordinate direction that maximally increases nonsmooth_distance,
// ties broken by lowest coordinate index with + before -. The shortened step
// leaves budget for a second step when two arms of the distance are degenerate.
inline Vec coordinate_escape(const std::function<double(const Vec&)>& dist, const Vec& y,
                             double chi) {
  const double step = chi / std::sqrt(2.0);
  Vec best = y;
  double best_d = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (double s : {+1.0, -1.0}) {
      Vec cand = y;
      cand[i] += s * step;
      const double d = dist(cand);
      if (d > best_d + 1e-15) {
        best_d = d;
        best = cand;
      }
    }
  }
  return best;
}

// V(x) = |x| on the line, with the decay function w(x) = |x|/2. The set where
// the quotients fail to stabilize is the origin.
inline ClfSpec make_abs_clf() {
  ClfSpec c;
  c.dim = 1;
  c.value = [](const Vec& x) { return std::abs(x[0]); };
  c.decay = [](const Vec& x) { return 0.5 * std::abs(x[0]); };
  c.alpha1 = [](double s) { return s; };
  c.alpha2 = [](double s) { return s; };
  c.nonsmooth_distance = [](const Vec& x) { return std::abs(x[0]); };
  auto dist = c.nonsmooth_distance;
  c.nonsmooth_escape = [dist](const Vec& y, double chi) {
    return coordinate_escape(dist, y, chi);
  };
  return c;
}

}  // namespace uinfc
