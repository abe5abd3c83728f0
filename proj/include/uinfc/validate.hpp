#pragma once

#include <functional>
#include <iomanip>
#include <iostream>

#include "uinfc/bounds.hpp"
#include "uinfc/config.hpp"
#include "uinfc/controller.hpp"
#include "uinfc/endi_clf.hpp"
#include "uinfc/sim.hpp"

namespace uinfc {

struct ValidationCase {
  std::string name;
  std::function<bool()> run;
};

// Built-in property suite behind `validate`: minimizer localization, the
// envelope sandwich, the proximal inequality on probe points, a short 1-D
// decay audit under certified bounds, and the grid-vs-closed-form identity of
// the ENDI CLF. corrupt_zeta deliberately corrupts the subgradient before the
// proximal check so the suite's failure path stays testable.
inline std::vector<ValidationCase> build_validation_suite(bool corrupt_zeta = false) {
  std::vector<ValidationCase> cases;

  cases.push_back({"lemma1_localization_abs", [] {
    const ClfSpec clf = make_abs_clf();
    EnvelopeOpts opts;
    opts.v_bar = 1.1;
    for (int i = 0; i < 200; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 1, 1.0, 0xa1);
      for (double alpha : {0.05, 0.3})
        for (double eps : {0.0, 1e-3}) {
          const auto res = moreau_envelope(clf, x, alpha, eps, 17 + i, opts);
          if (norm_diff(res.y_eps, x) > std::sqrt(2.0 * opts.v_bar) * alpha * (1.0 + 1e-9))
            return false;
        }
    }
    return true;
  }});

  cases.push_back({"lemma1_localization_endi", [] {
    const ClfSpec clf = make_endi_clf();
    double v_bar = 0.0;
    for (int i = 0; i < 512; ++i)
      v_bar = std::max(v_bar, clf(halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xa2)));
    v_bar *= 1.1;
    EnvelopeOpts opts;
    opts.v_bar = v_bar;
    for (int i = 0; i < 40; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xa3);
      const auto res = moreau_envelope(clf, x, 0.1, 1e-6, 23 + i, opts);
      if (norm_diff(res.y_eps, x) > std::sqrt(2.0 * v_bar) * 0.1 * (1.0 + 1e-9)) return false;
    }
    return true;
  }});

  cases.push_back({"lemma2_sandwich_abs", [] {
    const ClfSpec clf = make_abs_clf();
    const double eps1 = 0.1, L_V = 1.0, v_bar = 1.1;
    const double alpha = 0.9 * eps1 / (2.0 * L_V * std::sqrt(2.0 * v_bar));
    for (int i = 0; i < 100; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 1, 1.0, 0xa4);
      if (!check_sandwich(clf, x, alpha, eps1, 1e-4)) return false;
    }
    return true;
  }});

  cases.push_back({"lemma2_sandwich_endi", [] {
    const ClfSpec clf = make_endi_clf();
    const double eps1 = 0.25;
    const double L_V = estimate_lipschitz(std::function<double(const Vec&)>(clf.value),
                                          Vec(5, 0.0), 1.3, 400, 1.25, 0xa5);
    double v_bar = 0.0;
    for (int i = 0; i < 512; ++i)
      v_bar = std::max(v_bar, clf(halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xa6)));
    v_bar *= 1.1;
    const double alpha = 0.9 * eps1 / (2.0 * L_V * std::sqrt(2.0 * v_bar));
    for (int i = 0; i < 30; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xa7);
      if (!check_sandwich(clf, x, alpha, eps1, 1e-3)) return false;
    }
    return true;
  }});

  cases.push_back({"prox_subgradient_abs", [corrupt_zeta] {
    const ClfSpec clf = make_abs_clf();
    EnvelopeOpts opts;
    opts.v_bar = 1.1;
    std::vector<Vec> probes;
    for (int i = 0; i <= 60; ++i) probes.push_back({-3.0 + 0.1 * i});
    for (int i = 0; i < 50; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 1, 1.0, 0xa8);
      auto res = moreau_envelope(clf, x, 0.5, 0.0, 0, opts);
      if (corrupt_zeta) res.zeta[0] += 1.0;
      if (!check_prox_subgradient(clf, res, x, probes)) return false;
    }
    return true;
  }});

  cases.push_back({"prox_subgradient_endi", [corrupt_zeta] {
    const ClfSpec clf = make_endi_clf();
    double v_bar = 0.0;
    for (int i = 0; i < 512; ++i)
      v_bar = std::max(v_bar, clf(halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xa9)));
    v_bar *= 1.1;
    EnvelopeOpts opts;
    opts.v_bar = v_bar;
    for (int i = 0; i < 15; ++i) {
      const Vec x = halton_ball_point(static_cast<std::uint64_t>(i), 5, 1.2, 0xaa);
      auto res = moreau_envelope(clf, x, 0.1, 0.0, 0, opts);
      if (corrupt_zeta)
        for (double& z : res.zeta) z += 1.0;
      std::vector<Vec> probes;
      for (int j = 0; j < 50; ++j)
        probes.push_back(add(res.y_eps, halton_ball_point(static_cast<std::uint64_t>(j), 5,
                                                          0.5, 0xab)));
      if (!check_prox_subgradient(clf, res, x, probes)) return false;
    }
    return true;
  }});

  cases.push_back({"endi_clf_grid_vs_closed_form", [] {
    constexpr double two_pi = 6.283185307179586476925;
    for (int i = 0; i < 300; ++i) {
      const Vec phi = halton_ball_point(static_cast<std::uint64_t>(i), 3, 2.0, 0xac);
      double grid_min = std::numeric_limits<double>::infinity();
      int best_k = 0;
      for (int k = 0; k < 720; ++k) {
        const double v = f_tilde(phi, two_pi * k / 720.0);
        if (v < grid_min) {
          grid_min = v;
          best_k = k;
        }
      }
      const double cell = two_pi / 720.0;
      const double t2 = golden_min([&](double t) { return f_tilde(phi, t); },
                                   two_pi * best_k / 720.0 - cell,
                                   two_pi * best_k / 720.0 + cell, 60);
      const double best = std::min(grid_min, f_tilde(phi, t2));
      if (std::abs(best - v_tilde(phi)) > 1e-6) return false;
    }
    return true;
  }});

  cases.push_back({"decay_audit_1d_short", [] {
    const ClfSpec clf = make_abs_clf();
    const Dynamics dyn = make_integrator_1d();
    const BoxSet box = BoxSet::cube(1, -1.0, 1.0);
    EstimationConfig est;
    est.samples = 500;
    est.theta_headroom = 1.3;
    const BoundsReport b = compute_bounds(clf, dyn, 1.0, 0.6, 0.0, 0.0, 0.03, box, est);
    if (!verify_bounds(b)) return false;

    ShRunConfig cfg;
    cfg.dyn = dyn;
    cfg.clf = clf;
    cfg.params.alpha = 0.03;
    cfg.params.eps_target = b.eps_bar * b.eps_bar;
    cfg.params.eta_target = b.eta_bar;
    cfg.params.chi = b.chi_bar;
    cfg.params.input_set = box;
    cfg.params.seed = 5;
    cfg.delta = b.delta_bar;
    cfg.substeps = 4;
    cfg.horizon_samples = 4000;
    cfg.x0 = {1.0};
    cfg.meas_noise = NoiseModel(NoiseKind::zero, 0.0, 0);
    cfg.dist_noise = NoiseModel(NoiseKind::zero, 0.0, 0);
    cfg.r = 0.6;
    cfg.R = 1.0;
    cfg.env_opts.v_bar = 1.1;
    cfg.log_v_alpha = false;
    const TrajectoryLog log = simulate(cfg);
    const DecayAuditReport audit = decay_audit(log, cfg, b.w_bar, 1e-4);
    return audit.n_case1 > 0 && audit.pass_rate() == 1.0;
  }});

  return cases;
}

inline int run_validation(bool corrupt_zeta, bool list_only, std::ostream& os) {
  const auto cases = build_validation_suite(corrupt_zeta);
  if (list_only) {
    for (const auto& c : cases) os << c.name << "\n";
    return 0;
  }
  bool all = true;
  for (const auto& c : cases) {
    bool ok = false;
    std::string note;
    try {
      ok = c.run();
    } catch (const std::exception& ex) {
      ok = false;
      note = std::string(" (") + ex.what() + ")";
    }
    all = all && ok;
    os << std::left << std::setw(34) << c.name << (ok ? "PASS" : "FAIL") << note << "\n";
  }
  os << (all ? "validation suite: all checks passed\n" : "validation suite: FAILURES\n");
  return all ? 0 : 1;
}

}  // namespace uinfc
