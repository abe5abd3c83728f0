#pragma once

#include <vector>

#include "uinfc/clf.hpp"
#include "uinfc/systems.hpp"

namespace uinfc {

// Angle grid over [0, 2pi) used to evaluate the min-over-theta objective, with
// golden-section refinement of the best cell. Carries cos/sin tables so the
// grid pass costs no trig.
struct ThetaGrid {
  std::vector<double> points;
  std::vector<double> cos_pts;
  std::vector<double> sin_pts;
  int refinement_iters = 40;

  static ThetaGrid from_points(std::vector<double> pts, int refine = 40) {
    if (pts.size() < 8) throw parameter_error("ThetaGrid: need at least 8 points");
    if (pts.size() > 512) throw parameter_error("ThetaGrid: at most 512 points");
    ThetaGrid g;
    g.points = std::move(pts);
    g.refinement_iters = refine;
    g.cos_pts.resize(g.points.size());
    g.sin_pts.resize(g.points.size());
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      g.cos_pts[i] = std::cos(g.points[i]);
      g.sin_pts[i] = std::sin(g.points[i]);
    }
    return g;
  }

  static ThetaGrid uniform(int count = 64, int refine = 40) {
    constexpr double two_pi = 6.283185307179586476925;
    std::vector<double> pts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      pts[static_cast<std::size_t>(i)] = two_pi * static_cast<double>(i) / count;
    return from_points(std::move(pts), refine);
  }
};

// F~(phi; theta) = phi1^2 + phi2^2 + 2 phi3^2 - 2 phi3 (phi1 cos + phi2 sin)
inline double f_tilde(const Vec& phi, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return phi[0] * phi[0] + phi[1] * phi[1] + 2.0 * phi[2] * phi[2] -
         2.0 * phi[2] * (phi[0] * c + phi[1] * s);
}

inline Vec grad_f_tilde(const Vec& phi, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {2.0 * phi[0] - 2.0 * phi[2] * c, 2.0 * phi[1] - 2.0 * phi[2] * s,
          4.0 * phi[2] - 2.0 * (phi[0] * c + phi[1] * s)};
}

// Backstepping target feedback for the nonholonomic integrator:
// kappa = -(<zeta, g1>, <zeta, g2>) with zeta = grad of F~.
inline Vec kappa_ni(const Vec& phi, double theta) {
  const Vec z = grad_f_tilde(phi, theta);
  const double k1 = z[0] - phi[1] * z[2];
  const double k2 = z[1] + phi[0] * z[2];
  return {-k1, -k2};
}

// Closed form of min over theta of F~: V~(phi) = phi1^2 + phi2^2 + 2 phi3^2
// - 2 |phi3| sqrt(phi1^2 + phi2^2).
inline double v_tilde(const Vec& phi) {
  const double rho = std::sqrt(phi[0] * phi[0] + phi[1] * phi[1]);
  return phi[0] * phi[0] + phi[1] * phi[1] + 2.0 * phi[2] * phi[2] -
         2.0 * std::abs(phi[2]) * rho;
}

namespace detail {

// The bracketed ENDI objective F~ + 0.5 ||eta - kappa||^2 is affine in
// (cos theta, sin theta); precomputing the coefficients makes each theta
// evaluation a handful of flops.
struct EndiObjCoeffs {
  double p, mc, ms;          // F~ = p + mc*c + ms*s
  double e1, f1, g1;          // eta1 - kappa1 = e1 + f1*c + g1*s
  double e2, f2, g2;

  explicit EndiObjCoeffs(const Vec& x) {
    const double p1 = x[0], p2 = x[1], p3 = x[2], n1 = x[3], n2 = x[4];
    p = p1 * p1 + p2 * p2 + 2.0 * p3 * p3;
    mc = -2.0 * p3 * p1;
    ms = -2.0 * p3 * p2;
    // kappa1 = (-2 p1 + 4 p2 p3) + (2 p3 - 2 p1 p2) c + (-2 p2^2) s
    e1 = n1 - (-2.0 * p1 + 4.0 * p2 * p3);
    f1 = -(2.0 * p3 - 2.0 * p1 * p2);
    g1 = 2.0 * p2 * p2;
    // kappa2 = (-2 p2 - 4 p1 p3) + (2 p1^2) c + (2 p3 + 2 p1 p2) s
    e2 = n2 - (-2.0 * p2 - 4.0 * p1 * p3);
    f2 = -2.0 * p1 * p1;
    g2 = -(2.0 * p3 + 2.0 * p1 * p2);
  }

  double eval(double c, double s) const {
    const double d1 = e1 + f1 * c + g1 * s;
    const double d2 = e2 + f2 * c + g2 * s;
    return p + mc * c + ms * s + 0.5 * (d1 * d1 + d2 * d2);
  }

  double eval_theta(double theta) const {
#if defined(__GNUC__) && defined(__linux__)
    double c, s;
    ::sincos(theta, &s, &c);
    return eval(c, s);
#else
    return eval(std::cos(theta), std::sin(theta));
#endif
  }

  // bound on |dh/dtheta| over the whole circle, used to prune basins that
  // cannot undercut an already refined minimum
  double slope_bound() const {
    const double d1m = std::sqrt(f1 * f1 + g1 * g1);
    const double d2m = std::sqrt(f2 * f2 + g2 * g2);
    return std::abs(mc) + std::abs(ms) + (std::abs(e1) + d1m) * d1m +
           (std::abs(e2) + d2m) * d2m;
  }
};

}  // namespace detail

// Backstepping CLF for the ENDI system: the grid minimum of
// F~(phi; theta) + 0.5 ||eta - kappa(phi; theta)||^2 with golden-section
// refinement of every grid-local minimum. The objective is a degree-2
// trigonometric polynomial of theta, so it has at most four basins and the
// refinement is exact up to the iteration budget.
inline double endi_clf_value(const Vec& x, const ThetaGrid& grid) {
  if (x.size() != 5) throw parameter_error("endi_clf_value: expects n=5");
  const detail::EndiObjCoeffs co(x);
  const std::size_t g = grid.points.size();
  double vals[512];
  const std::size_t gc = std::min<std::size_t>(g, 512);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gc; ++i) {
    vals[i] = co.eval(grid.cos_pts[i], grid.sin_pts[i]);
    best = std::min(best, vals[i]);
  }
  constexpr double two_pi = 6.283185307179586476925;
  const double h = two_pi / static_cast<double>(gc);
  // refine basin floors in ascending order; a basin whose grid value cannot
  // undercut the current best within one cell (slope bound) is skipped
  const double reach = co.slope_bound() * h;
  std::size_t order[16];
  std::size_t n_basins = 0;
  for (std::size_t i = 0; i < gc && n_basins < 16; ++i) {
    const double prev = vals[(i + gc - 1) % gc];
    const double next = vals[(i + 1) % gc];
    if (vals[i] > prev || vals[i] > next) continue;    // not a basin floor
    if (vals[i] == prev && vals[i] == next) continue;  // flat cell, grid value is exact
    order[n_basins++] = i;
  }
  std::sort(order, order + n_basins, [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  for (std::size_t k = 0; k < n_basins; ++k) {
    const std::size_t i = order[k];
    if (vals[i] - reach > best) break;  // no remaining basin can improve
    const double t_ref = golden_min([&](double th) { return co.eval_theta(th); },
                                    grid.points[i] - h, grid.points[i] + h,
                                    grid.refinement_iters);
    best = std::min(best, co.eval_theta(t_ref));
  }
  return best;
}

struct EndiClfOptions {
  ThetaGrid grid = ThetaGrid::uniform();
  // Region over which the quadratic class-K envelopes are fitted.
  double calibration_radius = 1.6;
  int calibration_samples = 4096;
  std::uint64_t seed = 20210901;
  // Annulus and box for the sampled decay-condition calibration. The outer
  // radius is where the box-vertex jets still provide descent; for the
  // [-3,3]^2 box the drift term outruns the available torque beyond
  // ||x|| ~ 1.05, so the certified decay region stops at 1.0.
  double decay_inner_radius = 0.02;
  double decay_outer_radius = 1.0;
  int decay_samples = 1000;
  BoxSet input_box = BoxSet::cube(2, -3.0, 3.0);
};

struct EndiCalibration {
  double c1 = 0.0;   // alpha1(s) = c1 s^2
  double c2 = 0.0;   // alpha2(s) = c2 s^2
  double c_w = 0.0;  // w(x) = c_w ||x||^2
  double radius = 0.0;
};

namespace detail {

// Fit quadratic class-K envelopes c1 s^2 <= V <= c2 s^2 from sampled ratios
// over the calibration region (5% margin each way).
inline void fit_endi_envelopes(const ThetaGrid& grid, const EndiClfOptions& opt,
                               EndiCalibration& cal) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < opt.calibration_samples; ++i) {
    Vec x = halton_annulus_point(static_cast<std::uint64_t>(i), 5,
                                 0.02 * opt.calibration_radius, opt.calibration_radius,
                                 opt.seed);
    const double ratio = endi_clf_value(x, grid) / dot(x, x);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  cal.c1 = 0.95 * lo;
  cal.c2 = 1.05 * hi;
  cal.radius = opt.calibration_radius;
}

// Calibrate w(x) = c_w ||x||^2 against the sampled decay condition: at every
// sample the best finite-difference directional derivative of V over the box
// vertices must be <= -c_w ||x||^2. c_w halves from 4 until all samples pass.
inline void fit_endi_decay(const ThetaGrid& grid, const EndiClfOptions& opt,
                           EndiCalibration& cal) {
  const Dynamics dyn = make_endi_dynamics();
  const Vec& lo = opt.input_box.lower;
  const Vec& hi = opt.input_box.upper;
  const std::vector<Vec> vertices = {
      {lo[0], lo[1]}, {lo[0], hi[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}};

  ClfSpec probe;
  probe.dim = 5;
  probe.value = [grid](const Vec& x) { return endi_clf_value(x, grid); };

  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.decay_samples; ++i) {
    Vec x = halton_annulus_point(static_cast<std::uint64_t>(i), 5, opt.decay_inner_radius,
                                 opt.decay_outer_radius, mix_seed(opt.seed, 77));
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& u : vertices) {
      const Vec theta = dyn(x, u);
      best = std::min(best, dini_derivative_fd(probe, x, theta));
    }
    worst_ratio = std::min(worst_ratio, -best / dot(x, x));
  }
  double cw = 6.0;
  while (cw > worst_ratio && cw > 1e-9) cw *= 0.5;
  if (!(cw > 1e-9))
    throw config_error("ENDI decay calibration failed: sampled decay condition unsatisfiable");
  cal.c_w = cw;
}

}  // namespace detail

inline ClfSpec make_endi_clf(const EndiClfOptions& opt = {}, EndiCalibration* out_cal = nullptr) {
  EndiCalibration cal;
  detail::fit_endi_envelopes(opt.grid, opt, cal);
  detail::fit_endi_decay(opt.grid, opt, cal);

  ClfSpec c;
  c.dim = 5;
  const ThetaGrid grid = opt.grid;
  c.value = [grid](const Vec& x) { return endi_clf_value(x, grid); };
  const double cw = cal.c_w;
  c.decay = [cw](const Vec& x) { return cw * dot(x, x); };
  const double c1 = cal.c1, c2 = cal.c2;
  c.alpha1 = [c1](double s) { return c1 * s * s; };
  c.alpha2 = [c2](double s) { return c2 * s * s; };
  // Bad set: {phi1 = phi2 = 0} (minimizing theta not unique) union {phi3 = 0}
  // (the |phi3| kink).
  c.nonsmooth_distance = [](const Vec& x) {
    const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return std::min(rho, std::abs(x[2]));
  };
  auto dist = c.nonsmooth_distance;
  c.nonsmooth_escape = [dist](const Vec& y, double chi) {
    return coordinate_escape(dist, y, chi);
  };
  if (out_cal) *out_cal = cal;
  return c;
}

}  // namespace uinfc
