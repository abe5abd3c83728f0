#pragma once

#include <algorithm>

#include "uinfc/clf.hpp"

namespace uinfc {

// Result of one approximate inf-convolution (Moreau envelope) evaluation.
struct InfConvResult {
  Vec y_eps;              // approximate minimizer
  Vec zeta;               // (x - y_eps) / alpha^2
  double envelope_value;  // V(y_eps) + ||y_eps - x||^2 / (2 alpha^2)
  double eps_achieved;    // certified gap to the envelope value
  double alpha;
};

// componentwise (x - y) / alpha^2, kept as a literal division so the stored
// vector matches the defining formula bit for bit
inline Vec prox_subgradient(const Vec& x, const Vec& y, double alpha) {
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - y[i]) / (alpha * alpha);
  return z;
}

struct EnvelopeOpts {
  // Supremum of V over the working region; bounds the minimizer search ball
  // radius sqrt(2 v_bar) alpha. 0 means "derive from V(x)".
  double v_bar = 0.0;
  int lattice_points_per_axis = 5;
  int descent_starts = 3;
  double solver_floor = 1e-9;  // declared envelope-value resolution
  int max_sweeps = 12;
};

namespace detail {

struct EnvObjective {
  const ClfSpec& clf;
  const Vec& x;
  double inv_two_a2;

  double operator()(const Vec& y) const {
    double q = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - x[i];
      q += d * d;
    }
    const double v = clf.value(y) + q * inv_two_a2;
    if (!std::isfinite(v)) throw solver_error("moreau_envelope: objective diverged");
    return v;
  }
};

// Coordinate-wise golden-section descent: each pass searches the full trial
// interval down to the target coordinate resolution, and the sweep loop stops
// once a whole sweep improves the objective by less than tol. Moves are
// clamped to the ball around `center`.
inline double coordinate_descent(const EnvObjective& f, Vec& y, const Vec& center,
                                 double radius, double step0, double w_res, double tol,
                                 int max_sweeps) {
  constexpr double inv_phi = 0.6180339887498949;
  double fy = f(y);
  // golden iterations needed to narrow 2*step0 down to w_res
  int iters = 8;
  if (w_res > 0.0 && 2.0 * step0 > w_res)
    iters = static_cast<int>(std::ceil(std::log(w_res / (2.0 * step0)) / std::log(inv_phi)));
  iters = std::clamp(iters, 8, 40);
  Vec probe = y;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double f_before = fy;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double slack2 = radius * radius;
      for (std::size_t j = 0; j < y.size(); ++j)
        if (j != i) {
          const double d = y[j] - center[j];
          slack2 -= d * d;
        }
      if (slack2 <= 0.0) continue;
      const double half = std::sqrt(slack2);
      double a = std::max(y[i] - step0, center[i] - half);
      double b = std::min(y[i] + step0, center[i] + half);
      if (!(b > a)) continue;
      probe = y;
      auto eval = [&](double t) {
        probe[i] = t;
        return f(probe);
      };
      double c = b - inv_phi * (b - a);
      double d = a + inv_phi * (b - a);
      double fc = eval(c), fd = eval(d);
      for (int it = 0; it < iters; ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - inv_phi * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + inv_phi * (b - a);
          fd = eval(d);
        }
      }
      const double t_best = fc < fd ? c : d;
      const double f_best = fc < fd ? fc : fd;
      if (f_best < fy) {
        y[i] = t_best;
        fy = f_best;
      }
    }
    if (f_before - fy < tol) break;
  }
  return fy;
}

}  // namespace detail

// Approximate Moreau envelope of V at x with penalty 1/(2 alpha^2).
//
// The search is restricted to the ball ||y - x|| <= sqrt(2 v_bar) alpha, which
// contains every epsilon-minimizer. eps_target = 0 asks for the best the
// solver can do (certified at the declared solver floor). An eps_target above
// 10x the floor makes the inexactness an experimental variable: the returned
// point is walked along a seeded direction away from the converged minimizer
// until the objective has risen by an amount in [0.5, 0.9] * eps_target, so
// eps_achieved is a reproducible, seeded quantity rather than solver luck.
inline InfConvResult moreau_envelope(const ClfSpec& clf, const Vec& x, double alpha,
                                     double eps_target, std::uint64_t seed,
                                     const EnvelopeOpts& opts = {}) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw parameter_error("moreau_envelope: alpha must lie in (0,1)");
  if (eps_target < 0.0) throw parameter_error("moreau_envelope: eps_target must be >= 0");
  require_finite(x, "moreau_envelope: x");

  const double vx = clf(x);
  const double v_bar = std::max(opts.v_bar, vx);
  const double radius = std::sqrt(2.0 * v_bar) * alpha;
  const detail::EnvObjective f{clf, x, 1.0 / (2.0 * alpha * alpha)};
  const int n = static_cast<int>(x.size());

  Vec best_y = x;
  double best_f = vx;  // y = x is always feasible

  if (radius > 0.0) {
    // coarse lattice over the cube circumscribing the search ball; keep the
    // top seeds for the descent stage
    const int k = std::max(opts.lattice_points_per_axis, 2);
    const int starts = std::max(opts.descent_starts, 1);
    std::vector<std::pair<double, Vec>> top;
    top.reserve(static_cast<std::size_t>(starts) + 1);
    Vec y(x.size());
    std::vector<int> idx(x.size(), 0);
    const double h = 2.0 * radius / (k - 1);
    bool done = false;
    while (!done) {
      double r2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double off = -radius + h * idx[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + off;
        r2 += off * off;
      }
      if (r2 <= radius * radius * (1.0 + 1e-12)) {
        const double fy = f(y);
        if (top.size() < static_cast<std::size_t>(starts))
          top.emplace_back(fy, y);
        else if (fy < top.back().first)
          top.back() = {fy, y};
        std::sort(top.begin(), top.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
      }
      for (int i = 0;; ++i) {  // odometer
        if (i == n) {
          done = true;
          break;
        }
        if (++idx[static_cast<std::size_t>(i)] < k) break;
        idx[static_cast<std::size_t>(i)] = 0;
      }
    }

    const double tol = 0.25 * opts.solver_floor;
    // resolution giving objective increments below the floor on the
    // quadratic penalty alone
    const double w_res = 0.5 * alpha * std::sqrt(2.0 * opts.solver_floor);
    for (auto& [fs0, ys] : top) {
      const double fs =
          detail::coordinate_descent(f, ys, x, radius, 0.75 * h, w_res, tol, opts.max_sweeps);
      if (fs < best_f) {
        best_f = fs;
        best_y = ys;
      }
    }
    {
      Vec ys = x;  // polish from the query point as well
      const double fs =
          detail::coordinate_descent(f, ys, x, radius, 0.5 * radius, w_res, tol, opts.max_sweeps);
      if (fs < best_f) {
        best_f = fs;
        best_y = ys;
      }
    }
  }

  InfConvResult res;
  res.alpha = alpha;
  res.y_eps = best_y;
  res.eps_achieved = opts.solver_floor;

  const bool inject = eps_target > 10.0 * opts.solver_floor && radius > 0.0;
  if (inject) {
    std::mt19937_64 rng = make_rng(seed, 0x1f1f);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double lo_gap = 0.5 * eps_target;
    const double hi_gap = 0.9 * eps_target;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Vec dir(x.size());
      for (double& d : dir) d = nd(rng);
      const double dn = norm(dir);
      if (dn == 0.0) continue;
      dir = scale(dir, 1.0 / dn);
      // longest admissible step along dir inside the search ball
      const Vec rel = sub(best_y, x);
      const double b = dot(rel, dir);
      const double c = dot(rel, rel) - radius * radius;
      const double t_max = -b + std::sqrt(std::max(b * b - c, 0.0));
      if (t_max <= 0.0) continue;
      auto gap = [&](double t) { return f(axpy(best_y, t, dir)) - best_f; };
      double t_hi = std::min(t_max, alpha * std::sqrt(eps_target));
      int guard = 0;
      while (gap(t_hi) < hi_gap && t_hi < t_max && ++guard < 60)
        t_hi = std::min(2.0 * t_hi, t_max);
      if (gap(t_hi) < lo_gap) continue;  // this direction cannot reach the window
      double t_lo = 0.0;
      double t_hit = t_hi;
      double g_hit = gap(t_hi);
      for (int it = 0; it < 200 && (g_hit < lo_gap || g_hit > hi_gap); ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        const double gm = gap(mid);
        if (gm < lo_gap)
          t_lo = mid;
        else
          t_hi = mid;
        g_hit = gm;
        t_hit = mid;
      }
      if (g_hit >= lo_gap && g_hit <= hi_gap) {
        res.y_eps = axpy(best_y, t_hit, dir);
        res.eps_achieved = g_hit + opts.solver_floor;
        break;
      }
    }
  }

  res.envelope_value = f(res.y_eps);
  res.zeta = prox_subgradient(x, res.y_eps, alpha);
  return res;
}

// Brute-force upper bound on the envelope: a dense per-axis grid over the
// search ball for n <= 2, a denser lattice refined by coordinate descent for
// larger n. Used only by tests and certificates.
inline double reference_envelope(const ClfSpec& clf, const Vec& x, double alpha,
                                 double grid_step) {
  if (!(grid_step > 0.0)) throw parameter_error("reference_envelope: grid_step must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw parameter_error("reference_envelope: alpha must lie in (0,1)");
  const double vx = clf(x);
  const double radius = std::sqrt(2.0 * vx) * alpha;  // minimizers live here
  const detail::EnvObjective f{clf, x, 1.0 / (2.0 * alpha * alpha)};
  const int n = static_cast<int>(x.size());
  if (radius == 0.0) return vx;

  double best = vx;
  Vec best_y = x;
  if (n <= 2) {
    const long per_axis = std::lround(std::ceil(2.0 * radius / grid_step)) + 1;
    if (std::pow(static_cast<double>(per_axis), n) > 5e7)
      throw resource_error("reference_envelope: grid too large");
    Vec y(x.size());
    if (n == 1) {
      for (long i = 0; i < per_axis; ++i) {
        y[0] = x[0] - radius + grid_step * static_cast<double>(i);
        const double fy = f(y);
        if (fy < best) {
          best = fy;
          best_y = y;
        }
      }
    } else {
      for (long i = 0; i < per_axis; ++i)
        for (long j = 0; j < per_axis; ++j) {
          y[0] = x[0] - radius + grid_step * static_cast<double>(i);
          y[1] = x[1] - radius + grid_step * static_cast<double>(j);
          const double fy = f(y);
          if (fy < best) {
            best = fy;
            best_y = y;
          }
        }
    }
    // refine the best cell coordinate-wise
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < best_y.size(); ++i) {
        const double t = golden_min(
            [&](double v) {
              Vec probe = best_y;
              probe[i] = v;
              return f(probe);
            },
            best_y[i] - grid_step, best_y[i] + grid_step, 48);
        Vec probe = best_y;
        probe[i] = t;
        const double fp = f(probe);
        if (fp < best) {
          best = fp;
          best_y = probe;
        }
      }
    return best;
  }

  if (n > 6) throw resource_error("reference_envelope: dimension too large for the grid oracle");
  EnvelopeOpts opts;
  opts.lattice_points_per_axis = 7;
  opts.descent_starts = 6;
  opts.solver_floor = std::min(1e-10, grid_step * grid_step);
  opts.v_bar = vx;
  const InfConvResult r = moreau_envelope(clf, x, alpha, 0.0, 0, opts);
  return std::min(vx, r.envelope_value);
}

// Sandwich test: reference <= V(x) <= reference + eps1.
inline bool check_sandwich(const ClfSpec& clf, const Vec& x, double alpha, double eps1,
                           double grid_step = 1e-4) {
  if (!(eps1 > 0.0)) throw parameter_error("check_sandwich: eps1 must be > 0");
  const double ref = reference_envelope(clf, x, alpha, grid_step);
  const double vx = clf(x);
  return ref <= vx + 1e-12 && vx <= ref + eps1;
}

// Proximal subgradient inequality at the minimizer: for every probe z,
// V(z) >= V(y) + <zeta, z - y> - ||z - y||^2 / (2 alpha^2) - tol.
inline bool check_prox_subgradient(const ClfSpec& clf, const InfConvResult& result,
                                   const Vec& x, const std::vector<Vec>& probe_points,
                                   double tol = 1e-6) {
  (void)x;
  const Vec& y = result.y_eps;
  const double vy = clf(y);
  const double inv_two_a2 = 1.0 / (2.0 * result.alpha * result.alpha);
  for (const Vec& z : probe_points) {
    const Vec d = sub(z, y);
    const double rhs = vy + dot(result.zeta, d) - dot(d, d) * inv_two_a2;
    if (clf(z) < rhs - tol) return false;
  }
  return true;
}

}  // namespace uinfc
