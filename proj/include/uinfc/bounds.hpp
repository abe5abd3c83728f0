#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "uinfc/clf.hpp"
#include "uinfc/systems.hpp"

namespace uinfc {

// Knobs for the sampled constant estimation. All suprema, infima and
// Lipschitz constants are quasi-random sampled with the stated safety
// factors; region_cap bounds the outer radius of the estimation region so the
// desk-scale working region stays where the decay calibration is meaningful.
struct EstimationConfig {
  int samples = 3000;
  double sup_safety = 1.1;
  double inf_safety = 0.8;
  double lip_safety = 1.25;
  double theta_headroom = 1.05;  // Theta = headroom * V_hat, headroom > 1
  double region_cap = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 7;
};

struct RadialDomain {
  double r_in = 0.0;
  double r_out = 0.0;
};

enum class ExtremumMode { sup, inf };

// Statistical Lipschitz estimate over a ball: max sampled difference ratio,
// inflated by the safety factor. Pairs mix global separations with short
// ones so local steep spots are seen.
inline double estimate_lipschitz(const std::function<Vec(const Vec&)>& fn, const Vec& center,
                                 double radius, int samples, double safety,
                                 std::uint64_t seed) {
  if (samples < 100) throw parameter_error("estimate_lipschitz: need at least 100 samples");
  if (safety < 1.0) throw parameter_error("estimate_lipschitz: safety must be >= 1");
  const int n = static_cast<int>(center.size());
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec a =
        add(center, halton_ball_point(static_cast<std::uint64_t>(2 * i), n, radius, seed));
    Vec b;
    if (i % 2 == 0) {
      b = add(center,
              halton_ball_point(static_cast<std::uint64_t>(2 * i + 1), n, radius, seed));
    } else {
      // short displacement, shrunk toward the center if it would leave the ball
      Vec d = halton_ball_point(static_cast<std::uint64_t>(2 * i + 1), n, 1e-4 * radius,
                                mix_seed(seed, 3));
      b = add(a, d);
      if (norm(b) > radius) b = sub(a, d);
    }
    const double dist = norm_diff(a, b);
    if (dist == 0.0) continue;
    const double ratio = norm_diff(fn(a), fn(b)) / dist;
    best = std::max(best, ratio);
  }
  return best * safety;
}

inline double estimate_lipschitz(const std::function<double(const Vec&)>& fn, const Vec& center,
                                 double radius, int samples, double safety,
                                 std::uint64_t seed) {
  return estimate_lipschitz(
      std::function<Vec(const Vec&)>([&fn](const Vec& x) { return Vec{fn(x)}; }), center,
      radius, samples, safety, seed);
}

// Sampled extremum over a centered ball or annulus, scaled by the safety
// factor in the conservative direction (inflation for sup, deflation for inf).
// Half the radii are drawn uniformly in radius rather than in volume: in
// higher dimensions volume-uniform points pile up at the outer shell and an
// extremum sitting at the inner boundary would never be seen.
inline double estimate_extrema(const std::function<double(const Vec&)>& fn, int n,
                               const RadialDomain& domain, ExtremumMode mode, int samples,
                               double safety, std::uint64_t seed) {
  if (samples < 100) throw parameter_error("estimate_extrema: need at least 100 samples");
  if (!(domain.r_out > domain.r_in) || domain.r_in < 0.0)
    throw config_error("estimate_extrema: empty domain");
  if (mode == ExtremumMode::sup && safety < 1.0)
    throw parameter_error("estimate_extrema: sup safety must be >= 1");
  if (mode == ExtremumMode::inf && safety > 1.0)
    throw parameter_error("estimate_extrema: inf safety must be <= 1");
  double best = mode == ExtremumMode::sup ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    Vec x = halton_annulus_point(static_cast<std::uint64_t>(i), n, domain.r_in, domain.r_out,
                                 seed);
    if (i % 2) {
      const double u = halton(static_cast<std::uint64_t>(i) + 1, 3);
      const double target = domain.r_in + u * (domain.r_out - domain.r_in);
      const double cur = norm(x);
      if (cur > 0.0) x = scale(std::move(x), target / cur);
    }
    const double v = fn(x);
    best = mode == ExtremumMode::sup ? std::max(best, v) : std::min(best, v);
  }
  return best * safety;
}

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;
  bool satisfied = false;
};

// Every constant and solved bound of the constructive feasibility analysis,
// plus the substituted inequality checklist.
struct BoundsReport {
  // inputs
  double R = 0, r = 0, e_bar = 0, q_bar = 0, alpha = 0;
  // measured-state geometry
  double R_hat = 0, r_hat = 0;
  // overshoot chain
  double V_hat = 0, Theta = 0, R_hat_star = 0, V_hat_star = 0;
  // target chain
  double v_hat = 0, r_hat_star = 0;
  // estimated constants
  double f_bar = 0, w_bar = 0, L_f = 0, L_V = 0;
  // solved accuracies and times
  double eps1 = 0, eps2 = 0;
  double delta_bar = 0, eps_bar = 0, eta_bar = 0, chi_bar = 0, e_bar_max = 0;
  double T_alpha = 0;
  // estimation provenance
  double region_cap = 0, work_radius = 0;
  double samples = 0, seed = 0;

  std::vector<BoundCheck> checks;

  bool all_satisfied() const {
    for (const auto& c : checks)
      if (!c.satisfied) return false;
    return true;
  }

  const BoundCheck* first_failed() const {
    for (const auto& c : checks)
      if (!c.satisfied) return &c;
    return nullptr;
  }
};

namespace detail {

inline double invert_increasing(const std::function<double(double)>& fn, double target,
                                const char* what) {
  double hi = 1.0;
  int grow = 0;
  while (fn(hi) < target) {
    hi *= 2.0;
    if (++grow > 200) throw config_error(std::string(what) + ": function does not reach target");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fn(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Rebuild the full inequality checklist from the stored constants.
inline std::vector<BoundCheck> substitute_checks(const BoundsReport& b) {
  std::vector<BoundCheck> cs;
  auto push = [&cs](const std::string& name, double lhs, double rhs, bool strict = false) {
    BoundCheck c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.strict = strict;
    c.satisfied = strict ? (lhs < rhs) : (lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    cs.push_back(std::move(c));
  };
  const double w36 = b.w_bar / 36.0;
  const double a2 = b.alpha * b.alpha;
  const double sq2V = std::sqrt(2.0 * b.V_hat_star);
  push("bounds1_eps1", 4.0 * b.L_f * b.eps1, w36);
  push("bounds2_eta", b.eta_bar, w36);
  push("bounds2_delta_target", b.delta_bar * b.w_bar / 2.0, b.v_hat / 4.0);
  push("bounds2_delta_speed", b.delta_bar * (b.f_bar + b.q_bar) * (b.f_bar + b.q_bar) / (2.0 * a2),
       w36);
  push("bounds2_delta_drift", (b.delta_bar * b.L_f * b.f_bar + b.q_bar) * sq2V / b.alpha, w36);
  push("bounds3_eps_sq_delta", b.eps_bar * b.eps_bar, b.delta_bar * w36);
  push("bounds3_eps_sq_lip", 4.0 * b.L_f * b.eps_bar * b.eps_bar, w36);
  push("bounds4_chi_sq", 2.0 / a2 * b.L_f * b.chi_bar * b.chi_bar, w36);
  push("bounds4_chi_drift", (b.delta_bar * b.L_f * b.f_bar + b.q_bar) * b.chi_bar / a2, w36);
  push("bounds4_chi_speed", b.chi_bar / a2 * (b.f_bar + b.q_bar), w36);
  push("bound5_eps",
       b.eps_bar, (b.w_bar * a2 / 10.0 - 2.0 * b.chi_bar * b.f_bar) / (2.0 * a2 + b.f_bar * b.f_bar));
  push("alpha_localization", sq2V * b.alpha,
       std::min(b.r_hat_star / 2.0, b.L_V > 0.0 ? b.eps1 / b.L_V
                                                : std::numeric_limits<double>::infinity()));
  push("eps2_hold", b.delta_bar * b.f_bar, b.L_V > 0.0 ? b.eps2 / b.L_V
                                                       : std::numeric_limits<double>::infinity());
  push("eps2_core", b.eps2, b.v_hat / 8.0);
  push("ebar_decay_margin", b.e_bar_max, b.L_V > 0.0 ? b.w_bar / (16.0 * b.L_V)
                                                     : std::numeric_limits<double>::infinity(),
       /*strict=*/true);
  return cs;
}

}  // namespace detail

// Constructive feasibility analysis for one closed-loop setup: executes the
// overshoot/target ball constructions, estimates the needed constants over
// the (possibly capped) working region, and solves for the largest sampling
// time, optimization accuracies, regularization radius and measurement-error
// bound that satisfy the decay inequality system. Conditions that a
// caller-fixed input (alpha, q_bar) makes unsatisfiable are reported as
// failed checks rather than thrown, so the report always documents which
// constraint binds.
inline BoundsReport compute_bounds(const ClfSpec& clf, const Dynamics& dyn, double R, double r,
                                   double e_bar, double q_bar, double alpha, const BoxSet& box,
                                   const EstimationConfig& cfg = {}) {
  if (!(0.0 < r && r < R)) throw parameter_error("compute_bounds: need 0 < r < R");
  if (!(e_bar >= 0.0 && q_bar >= 0.0)) throw parameter_error("compute_bounds: negative noise bound");
  if (!(e_bar + q_bar < r))
    throw infeasibility_error("compute_bounds: target radius smaller than the noise bounds");
  if (e_bar > r / 8.0 || q_bar > r / 8.0)
    throw infeasibility_error("compute_bounds: noise bounds exceed r/8");
  if (!(alpha > 0.0 && alpha < 1.0)) throw parameter_error("compute_bounds: alpha outside (0,1)");
  if (!(cfg.theta_headroom > 1.0))
    throw parameter_error("compute_bounds: theta_headroom must exceed 1");

  BoundsReport b;
  b.R = R;
  b.r = r;
  b.e_bar = e_bar;
  b.q_bar = q_bar;
  b.alpha = alpha;
  b.region_cap = cfg.region_cap;
  b.samples = cfg.samples;
  b.seed = static_cast<double>(cfg.seed);

  b.R_hat = R + e_bar + q_bar;
  b.r_hat = r - e_bar - q_bar;

  const int n = dyn.n;
  const auto V = [&clf](const Vec& x) { return clf.value(x); };

  b.V_hat = estimate_extrema(V, n, {0.0, b.R_hat}, ExtremumMode::sup, cfg.samples,
                             cfg.sup_safety, mix_seed(cfg.seed, 1));
  b.Theta = cfg.theta_headroom * b.V_hat;
  b.R_hat_star = detail::invert_increasing(clf.alpha1, b.Theta, "compute_bounds: alpha1");

  const double cap = std::max(cfg.region_cap, b.R_hat);  // cap never cuts the starting ball
  const double star_radius = std::min(b.R_hat_star, cap);
  b.V_hat_star = std::max(b.V_hat, estimate_extrema(V, n, {0.0, star_radius}, ExtremumMode::sup,
                                                    cfg.samples, cfg.sup_safety,
                                                    mix_seed(cfg.seed, 2)));
  b.work_radius = std::min(b.R_hat_star + std::sqrt(2.0 * b.V_hat_star), cap);

  b.v_hat = rho_V(clf, b.r_hat);
  b.r_hat_star = lambda_V(clf, b.v_hat / 4.0);
  if (b.r_hat_star / 2.0 >= b.work_radius)
    throw config_error("compute_bounds: empty working annulus");

  // constants over the working region
  const Vec origin(static_cast<std::size_t>(n), 0.0);
  {
    const Vec mid = box.midpoint();
    std::vector<Vec> probes = {mid};
    std::vector<int> idx(static_cast<std::size_t>(dyn.m), 0);
    bool done = false;
    while (!done) {  // box vertices
      Vec u(static_cast<std::size_t>(dyn.m));
      for (int j = 0; j < dyn.m; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        u[sj] = idx[sj] ? box.upper[sj] : box.lower[sj];
      }
      probes.push_back(std::move(u));
      for (int j = 0;; ++j) {
        if (j == dyn.m) {
          done = true;
          break;
        }
        if (++idx[static_cast<std::size_t>(j)] < 2) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
    const int per = std::max(100, cfg.samples / static_cast<int>(probes.size()));
    double lf = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const Vec u = probes[k];
      lf = std::max(lf, estimate_lipschitz(
                            std::function<Vec(const Vec&)>(
                                [&dyn, u](const Vec& x) { return dyn.rhs(x, u); }),
                            origin, b.work_radius, per, cfg.lip_safety,
                            mix_seed(cfg.seed, 10 + k)));
    }
    b.L_f = lf;
  }
  b.L_V = estimate_lipschitz(std::function<double(const Vec&)>(V), origin, b.work_radius,
                             cfg.samples, cfg.lip_safety, mix_seed(cfg.seed, 20));
  {
    std::mt19937_64 urng = make_rng(cfg.seed, 30);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    double fb = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), n, b.work_radius,
                                      mix_seed(cfg.seed, 31));
      Vec u(static_cast<std::size_t>(dyn.m));
      for (int j = 0; j < dyn.m; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        // alternate vertices and interior points
        u[sj] = (i % 2) ? (ud(urng) < 0.5 ? box.lower[sj] : box.upper[sj])
                        : box.lower[sj] + ud(urng) * (box.upper[sj] - box.lower[sj]);
      }
      fb = std::max(fb, norm(dyn(x, u)));
    }
    b.f_bar = fb * cfg.sup_safety;
  }
  b.w_bar = estimate_extrema(clf.decay, n, {b.r_hat_star / 2.0, b.work_radius},
                             ExtremumMode::inf, cfg.samples, cfg.inf_safety,
                             mix_seed(cfg.seed, 40));
  if (!(b.w_bar > 0.0))
    throw infeasibility_error("compute_bounds: w_bar <= 0 (decay vanishes on the annulus)");
  if (!(b.L_V > 0.0))
    throw infeasibility_error("compute_bounds: L_V estimate is zero");

  // ---- solve the inequality system, largest-first ----
  const double inf = std::numeric_limits<double>::infinity();
  const double w36 = b.w_bar / 36.0;
  const double a2 = alpha * alpha;
  const double sq2V = std::sqrt(2.0 * b.V_hat_star);

  b.eps1 = std::min({b.L_f > 0.0 ? w36 / (4.0 * b.L_f) : inf,  // decay budget
                     b.v_hat / 8.0,                            // keep the target ball
                     b.Theta - b.V_hat});                      // keep the overshoot ball
  b.eps2 = b.v_hat / 8.0;

  double delta = std::min({1.0 - 1e-9,                                      // delta < 1
                           b.v_hat / (2.0 * b.w_bar),                       // per-sample drop cap
                           a2 * w36 * 2.0 / ((b.f_bar + q_bar) * (b.f_bar + q_bar)),
                           b.f_bar > 0.0 ? b.eps2 / (b.L_V * b.f_bar) : inf});
  if (b.L_f * b.f_bar > 0.0) {
    const double numer = alpha * w36 / sq2V - q_bar;
    if (numer > 0.0) delta = std::min(delta, numer / (b.L_f * b.f_bar));
    // numer <= 0 leaves the drift condition unsatisfiable for any delta; the
    // checklist records it against the delta solved from the rest.
  }
  b.delta_bar = delta;

  double chi = inf;
  if (b.L_f > 0.0) chi = std::min(chi, alpha * std::sqrt(w36 / (2.0 * b.L_f)));
  const double drift = b.delta_bar * b.L_f * b.f_bar + q_bar;
  if (drift > 0.0) chi = std::min(chi, a2 * w36 / drift);
  if (b.f_bar + q_bar > 0.0) chi = std::min(chi, a2 * w36 / (b.f_bar + q_bar));
  if (!std::isfinite(chi)) chi = alpha;  // degenerate dynamics leave chi unconstrained
  if (!(b.w_bar * a2 / 10.0 - 2.0 * chi * b.f_bar > 0.0) && b.f_bar > 0.0)
    chi = b.w_bar * a2 / (40.0 * b.f_bar);  // force chi small enough for a positive budget
  b.chi_bar = chi;

  b.eps_bar = std::min({std::sqrt(b.delta_bar * w36),
                        b.L_f > 0.0 ? std::sqrt(w36 / (4.0 * b.L_f)) : inf,
                        (b.w_bar * a2 / 10.0 - 2.0 * b.chi_bar * b.f_bar) /
                            (2.0 * a2 + b.f_bar * b.f_bar)});
  b.eta_bar = w36;
  b.e_bar_max = 0.999 * b.w_bar / (16.0 * b.L_V);
  b.T_alpha = 2.0 * (b.V_hat_star - b.v_hat / 2.0) / (b.delta_bar * b.w_bar);

  b.checks = detail::substitute_checks(b);
  return b;
}

// Re-substitute every inequality from the stored constants.
inline bool verify_bounds(const BoundsReport& report) {
  const auto checks = detail::substitute_checks(report);
  for (const auto& c : checks)
    if (!c.satisfied) return false;
  return true;
}

// ---- flat text serialization ---------------------------------------------

inline std::string to_text(const BoundsReport& b) {
  char buf[128];
  std::ostringstream os;
  auto put = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", name, v);
    os << buf;
  };
  put("R", b.R);
  put("r", b.r);
  put("e_bar", b.e_bar);
  put("q_bar", b.q_bar);
  put("alpha", b.alpha);
  put("R_hat", b.R_hat);
  put("r_hat", b.r_hat);
  put("V_hat", b.V_hat);
  put("Theta", b.Theta);
  put("R_hat_star", b.R_hat_star);
  put("V_hat_star", b.V_hat_star);
  put("v_hat", b.v_hat);
  put("r_hat_star", b.r_hat_star);
  put("f_bar", b.f_bar);
  put("w_bar", b.w_bar);
  put("L_f", b.L_f);
  put("L_V", b.L_V);
  put("eps1", b.eps1);
  put("eps2", b.eps2);
  put("delta_bar", b.delta_bar);
  put("eps_bar", b.eps_bar);
  put("eta_bar", b.eta_bar);
  put("chi_bar", b.chi_bar);
  put("e_bar_max", b.e_bar_max);
  put("T_alpha", b.T_alpha);
  put("region_cap", b.region_cap);
  put("work_radius", b.work_radius);
  put("samples", b.samples);
  put("seed", b.seed);
  for (const auto& c : b.checks) {
    std::snprintf(buf, sizeof buf, "check: %s %.17g%s%.17g %s\n", c.name.c_str(), c.lhs,
                  c.strict ? "<" : "<=", c.rhs, c.satisfied ? "OK" : "FAIL");
    os << buf;
  }
  return os.str();
}

inline BoundsReport report_from_text(const std::string& text) {
  BoundsReport b;
  std::map<std::string, double*> fields = {
      {"R", &b.R},
      {"r", &b.r},
      {"e_bar", &b.e_bar},
      {"q_bar", &b.q_bar},
      {"alpha", &b.alpha},
      {"R_hat", &b.R_hat},
      {"r_hat", &b.r_hat},
      {"V_hat", &b.V_hat},
      {"Theta", &b.Theta},
      {"R_hat_star", &b.R_hat_star},
      {"V_hat_star", &b.V_hat_star},
      {"v_hat", &b.v_hat},
      {"r_hat_star", &b.r_hat_star},
      {"f_bar", &b.f_bar},
      {"w_bar", &b.w_bar},
      {"L_f", &b.L_f},
      {"L_V", &b.L_V},
      {"eps1", &b.eps1},
      {"eps2", &b.eps2},
      {"delta_bar", &b.delta_bar},
      {"eps_bar", &b.eps_bar},
      {"eta_bar", &b.eta_bar},
      {"chi_bar", &b.chi_bar},
      {"e_bar_max", &b.e_bar_max},
      {"T_alpha", &b.T_alpha},
      {"region_cap", &b.region_cap},
      {"work_radius", &b.work_radius},
      {"samples", &b.samples},
      {"seed", &b.seed},
  };
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("check: ", 0) == 0) {
      std::istringstream ls(line.substr(7));
      BoundCheck c;
      std::string middle, verdict;
      ls >> c.name >> middle >> verdict;
      const auto lt = middle.find("<=");
      if (lt != std::string::npos) {
        c.strict = false;
        c.lhs = std::stod(middle.substr(0, lt));
        c.rhs = std::stod(middle.substr(lt + 2));
      } else {
        const auto st = middle.find('<');
        if (st == std::string::npos) throw config_error("bounds report: malformed check line");
        c.strict = true;
        c.lhs = std::stod(middle.substr(0, st));
        c.rhs = std::stod(middle.substr(st + 1));
      }
      c.satisfied = verdict == "OK";
      b.checks.push_back(std::move(c));
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw config_error("bounds report: malformed line: " + line);
    const std::string key = line.substr(0, eq);
    auto it = fields.find(key);
    if (it == fields.end()) throw config_error("bounds report: unknown field: " + key);
    *it->second = std::stod(line.substr(eq + 3));
  }
  return b;
}

}  // namespace uinfc
