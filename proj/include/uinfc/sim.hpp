#pragma once

#include <cstdio>
#include <fstream>
#include <optional>

#include "uinfc/controller.hpp"
#include "uinfc/infconv.hpp"

namespace uinfc {

// Full configuration of one sample-and-hold closed-loop run.
struct ShRunConfig {
  Dynamics dyn;
  ClfSpec clf;
  UinfcParams params;
  double delta = 1e-4;       // sampling time
  int substeps = 10;         // integrator steps per sample
  long horizon_samples = 0;  // rows logged = horizon_samples + 1
  Vec x0;
  NoiseModel meas_noise;
  NoiseModel dist_noise;
  double r = 0.0;  // verdict target radius
  double R = 0.0;  // verdict starting radius
  EnvelopeOpts env_opts;
  int audit_stride = 10;          // envelope reference every this many samples
  double audit_grid_step = 1e-3;  // resolution of the logged envelope reference
  bool log_v_alpha = true;
  double divergence_factor = 1e3;

  void validate() const {
    params.validate();
    if (!(delta > 0.0)) throw parameter_error("ShRunConfig: delta must be positive");
    if (substeps < 1) throw parameter_error("ShRunConfig: substeps must be >= 1");
    if (horizon_samples < 0) throw parameter_error("ShRunConfig: horizon must be >= 0");
    if (!(0.0 < r && r < R)) throw parameter_error("ShRunConfig: need 0 < r < R");
    if (static_cast<int>(x0.size()) != dyn.n) throw parameter_error("ShRunConfig: x0 dimension");
    if (norm(x0) > R * (1.0 + 1e-12)) throw parameter_error("ShRunConfig: ||x0|| exceeds R");
  }
};

struct TrajectoryRow {
  long k = 0;
  double t = 0.0;
  Vec x;
  Vec x_hat;
  Vec u;
  double eps_used = 0.0;
  double eta_used = 0.0;
  double V = 0.0;
  double V_alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: not audited this row
  int region = 1;  // 1: outside the core ball, 2: inside
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  bool diverged = false;
  int n = 0;
  int m = 0;
};

namespace detail {

// One RK4 substep of x' = f(x, u) + q(t). The uniform-ball disturbance is held
// constant over the substep (one draw per substep); deterministic kinds are
// evaluated at the stage times so the integrator keeps its order on them.
inline Vec rk4_substep(const Dynamics& dyn, const Vec& x, const Vec& u, double t, double h,
                       NoiseModel& q) {
  const bool hold = !q.deterministic();
  const Vec q0 = q.emit(t, dyn.n);
  auto rhs = [&](const Vec& xs, double ts) {
    Vec r = dyn(xs, u);
    if (hold) return add(std::move(r), q0);
    NoiseModel tmp = q;  // deterministic kinds carry no state worth advancing
    return add(std::move(r), tmp.emit(ts, dyn.n));
  };
  const Vec k1 = rhs(x, t);
  const Vec k2 = rhs(axpy(x, 0.5 * h, k1), t + 0.5 * h);
  const Vec k3 = rhs(axpy(x, 0.5 * h, k2), t + 0.5 * h);
  const Vec k4 = rhs(axpy(x, h, k3), t + h);
  Vec out = x;
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace detail

// Closed-loop sample-and-hold simulation: measure, run one uInfC step, hold
// the control over [k delta, (k+1) delta] under RK4 with the disturbance
// realization. Deterministic given the config seeds; a per-sample seed stream
// is derived from params.seed.
inline TrajectoryLog simulate(const ShRunConfig& cfg_in) {
  cfg_in.validate();
  ShRunConfig cfg = cfg_in;  // noise models carry RNG state
  cfg.meas_noise.reset();
  cfg.dist_noise.reset();

  TrajectoryLog log;
  log.n = cfg.dyn.n;
  log.m = cfg.dyn.m;
  log.rows.reserve(static_cast<std::size_t>(cfg.horizon_samples) + 1);

  const double r_hat = cfg.r - cfg.meas_noise.bound - cfg.dist_noise.bound;
  const double v_hat = r_hat > 0.0 ? cfg.clf.alpha1(r_hat) : 0.0;

  Vec x = cfg.x0;
  for (long k = 0; k <= cfg.horizon_samples; ++k) {
    const double t = static_cast<double>(k) * cfg.delta;
    const Vec e = cfg.meas_noise.emit(t, cfg.dyn.n);
    const Vec x_hat = add(x, e);

    UinfcParams pk = cfg.params;
    pk.seed = mix_seed(cfg.params.seed, static_cast<std::uint64_t>(k));
    auto [u, diag] = uinfc_step(cfg.clf, cfg.dyn, x_hat, pk, cfg.env_opts);

    TrajectoryRow row;
    row.k = k;
    row.t = t;
    row.x = x;
    row.x_hat = x_hat;
    row.u = u;
    row.eps_used = diag.eps_used;
    row.eta_used = diag.eta_used;
    row.V = cfg.clf(x_hat);
    if (cfg.log_v_alpha && cfg.audit_stride > 0 && k % cfg.audit_stride == 0)
      row.V_alpha = reference_envelope(cfg.clf, x_hat, cfg.params.alpha, cfg.audit_grid_step);
    const double region_value = std::isnan(row.V_alpha) ? row.V : row.V_alpha;
    row.region = (v_hat > 0.0 && region_value < 0.5 * v_hat) ? 2 : 1;
    log.rows.push_back(std::move(row));

    if (k == cfg.horizon_samples) break;

    const double h = cfg.delta / cfg.substeps;
    for (int s = 0; s < cfg.substeps; ++s)
      x = detail::rk4_substep(cfg.dyn, x, u, t + s * h, h, cfg.dist_noise);

    if (norm(x) > cfg.divergence_factor * cfg.R) {
      log.diverged = true;
      break;
    }
  }
  return log;
}

// ---- practical-stability verdict ----------------------------------------

enum class StabilityKind { stable, unstable, inconclusive };

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::inconclusive;
  double t_entry = std::numeric_limits<double>::quiet_NaN();
  long k_entry = -1;
};

// stable: some sample with t <= T_max after which the true state stays in
// B_r for the whole remaining log, with at least 10% of the horizon left.
// unstable: never happens (includes exiting after every entry, and diverged
// runs). inconclusive: happens, but too late to certify.
inline StabilityVerdict check_practical_stability(const TrajectoryLog& log, double r,
                                                  double t_max =
                                                      std::numeric_limits<double>::infinity()) {
  StabilityVerdict v;
  if (log.rows.empty()) throw parameter_error("check_practical_stability: empty log");
  if (log.diverged) {
    v.kind = StabilityKind::unstable;
    return v;
  }
  const long n_rows = static_cast<long>(log.rows.size());
  long entry = -1;
  for (long k = n_rows - 1; k >= 0; --k) {
    if (norm(log.rows[static_cast<std::size_t>(k)].x) <= r)
      entry = k;
    else
      break;
  }
  if (entry < 0) {
    v.kind = StabilityKind::unstable;
    return v;
  }
  v.k_entry = entry;
  v.t_entry = log.rows[static_cast<std::size_t>(entry)].t;
  const long horizon = n_rows - 1;
  const bool enough_left = (horizon - entry) * 10 >= horizon;
  if (v.t_entry <= t_max && enough_left)
    v.kind = StabilityKind::stable;
  else
    v.kind = StabilityKind::inconclusive;
  return v;
}

// ---- per-sample decay audit -----------------------------------------------

struct DecayAuditEntry {
  long k = 0;
  double v_alpha = 0.0;
  double v_alpha_next = 0.0;
  double drop = 0.0;
  bool pass = false;
};

struct DecayAuditReport {
  std::vector<DecayAuditEntry> entries;
  long n_case1 = 0;
  long n_pass = 0;
  double threshold = 0.0;  // required drop: -(3/8) delta w_bar + tolerance

  double pass_rate() const {
    return n_case1 == 0 ? 1.0 : static_cast<double>(n_pass) / static_cast<double>(n_case1);
  }
};

// For every consecutive pair whose first sample lies outside the core ball
// (envelope value >= v_hat / 2), check the sample-to-sample envelope drop
// against -(3/8) delta w_bar. Envelope references are recomputed densely at
// the audit resolution regardless of the logging stride.
inline DecayAuditReport decay_audit(const TrajectoryLog& log, const ShRunConfig& cfg,
                                    double w_bar, double grid_step, double tolerance = 1e-8) {
  DecayAuditReport rep;
  rep.threshold = -0.375 * cfg.delta * w_bar + tolerance;
  if (log.rows.size() < 2) return rep;
  const double r_hat = cfg.r - cfg.meas_noise.bound - cfg.dist_noise.bound;
  const double v_hat = r_hat > 0.0 ? cfg.clf.alpha1(r_hat) : 0.0;

  std::vector<double> va(log.rows.size(), std::numeric_limits<double>::quiet_NaN());
  auto va_at = [&](std::size_t i) {
    if (std::isnan(va[i]))
      va[i] = reference_envelope(cfg.clf, log.rows[i].x_hat, cfg.params.alpha, grid_step);
    return va[i];
  };

  for (std::size_t i = 0; i + 1 < log.rows.size(); ++i) {
    const double v0 = va_at(i);
    if (!(v0 >= 0.5 * v_hat)) continue;  // inside the core ball
    const double v1 = va_at(i + 1);
    DecayAuditEntry e;
    e.k = log.rows[i].k;
    e.v_alpha = v0;
    e.v_alpha_next = v1;
    e.drop = v1 - v0;
    e.pass = e.drop <= rep.threshold;
    rep.entries.push_back(e);
    ++rep.n_case1;
    if (e.pass) ++rep.n_pass;
  }
  return rep;
}

// ---- CSV serialization -----------------------------------------------------

inline std::string csv_header(int n, int m) {
  std::string h = "k,t";
  for (int i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
  for (int i = 1; i <= n; ++i) h += ",xhat" + std::to_string(i);
  for (int i = 1; i <= m; ++i) h += ",u" + std::to_string(i);
  h += ",eps_used,eta_used,V,V_alpha,region";
  return h;
}

inline void write_csv(const TrajectoryLog& log, std::ostream& os) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << csv_header(log.n, log.m) << "\n";
  for (const auto& row : log.rows) {
    os << row.k << ',' << num(row.t);
    for (double v : row.x) os << ',' << num(v);
    for (double v : row.x_hat) os << ',' << num(v);
    for (double v : row.u) os << ',' << num(v);
    os << ',' << num(row.eps_used) << ',' << num(row.eta_used) << ',' << num(row.V) << ',';
    if (!std::isnan(row.V_alpha)) os << num(row.V_alpha);
    os << ',' << row.region << "\n";
  }
}

inline void write_csv_file(const TrajectoryLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("write_csv_file: cannot open " + path);
  write_csv(log, f);
}

}  // namespace uinfc
