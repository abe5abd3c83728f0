#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "uinfc/bounds.hpp"
#include "uinfc/endi_clf.hpp"
#include "uinfc/sim.hpp"

namespace uinfc {

// Flat `key = value` configuration with dotted keys and '#' comments.
struct Config {
  std::map<std::string, std::string> kv;
  std::map<std::string, int> line_of;

  static Config parse(std::istream& is) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw config_error("config line " + std::to_string(lineno) + ": empty key");
      c.kv[key] = value;
      c.line_of[key] = lineno;
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    return parse(f);
  }

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  const std::string& require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw config_error("config: missing required field `" + key + "`");
    return it->second;
  }

  double get_double(const std::string& key) const {
    const std::string& s = require(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw config_error("config: field `" + key + "` is not a number: " + s);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long get_long(const std::string& key) const {
    const double v = get_double(key);
    return static_cast<long>(v);
  }

  long get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = kv.at(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("config: field `" + key + "` is not a boolean: " + s);
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? kv.at(key) : fallback;
  }

  Vec get_vec(const std::string& key) const {
    const std::string& s = require(key);
    Vec out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw config_error("config: field `" + key + "` has a bad component: " + tok);
      }
    }
    if (out.empty()) throw config_error("config: field `" + key + "` is empty");
    return out;
  }

  Vec get_vec(const std::string& key, const Vec& fallback) const {
    return has(key) ? get_vec(key) : fallback;
  }
};

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "zero") return NoiseKind::zero;
  if (s == "uniform_ball") return NoiseKind::uniform_ball;
  if (s == "worst_case_sine") return NoiseKind::worst_case_sine;
  throw config_error("config: unknown noise kind: " + s);
}

// Everything needed to run: system + CLF + closed-loop config, built from one
// flat config file. UINFC_SEED (environment) overrides the run seeds.
struct Experiment {
  std::string system;
  Dynamics dyn;
  ClfSpec clf;
  EndiCalibration endi_cal;  // zeros unless system == endi
  ShRunConfig run;
  EstimationConfig est;
};

inline std::optional<std::uint64_t> env_seed_override() {
  const char* s = std::getenv("UINFC_SEED");
  if (!s || !*s) return std::nullopt;
  return static_cast<std::uint64_t>(std::strtoull(s, nullptr, 10));
}

inline Experiment build_experiment(const Config& c) {
  Experiment e;
  e.system = c.get_string("system", "endi");

  if (e.system == "endi") {
    e.dyn = make_endi_dynamics();
  } else if (e.system == "ni") {
    e.dyn = make_ni_dynamics();
  } else if (e.system == "integrator1d") {
    e.dyn = make_integrator_1d();
  } else {
    throw config_error("config: unknown system: " + e.system);
  }

  const Vec lo = c.get_vec("box.lower", Vec(static_cast<std::size_t>(e.dyn.m), -3.0));
  const Vec hi = c.get_vec("box.upper", Vec(static_cast<std::size_t>(e.dyn.m), 3.0));
  BoxSet box(lo, hi);
  if (box.dim() != e.dyn.m) throw config_error("config: box dimension mismatch");

  if (e.system == "endi") {
    EndiClfOptions opt;
    opt.calibration_radius = c.get_double("clf.endi.calib_radius", 1.6);
    opt.decay_outer_radius = c.get_double("clf.endi.decay_radius", 1.0);
    opt.grid = ThetaGrid::uniform(static_cast<int>(c.get_long("clf.endi.theta_points", 64)),
                                  static_cast<int>(c.get_long("clf.endi.theta_refine", 40)));
    opt.seed = static_cast<std::uint64_t>(c.get_long("clf.endi.seed", 20210901));
    opt.input_box = box;
    e.clf = make_endi_clf(opt, &e.endi_cal);
  } else if (e.system == "integrator1d") {
    e.clf = make_abs_clf();
  } else {
    throw config_error("config: no built-in CLF for system " + e.system +
                       "; use the library API");
  }

  ShRunConfig& run = e.run;
  run.dyn = e.dyn;
  run.clf = e.clf;
  run.x0 = c.get_vec("x0");
  if (static_cast<int>(run.x0.size()) != e.dyn.n)
    throw config_error("config: x0 dimension mismatch for system " + e.system);
  run.R = c.get_double("R");
  run.r = c.get_double("r");
  run.delta = c.get_double("delta");
  run.substeps = static_cast<int>(c.get_long("substeps", 10));
  run.horizon_samples = c.get_long("horizon");

  run.params.alpha = c.get_double("controller.alpha", 0.1);
  run.params.eps_target = c.get_double("controller.eps", 0.0);
  run.params.eta_target = c.get_double("controller.eta", 0.0);
  run.params.chi = c.get_double("controller.chi", 1e-3);
  run.params.seed = static_cast<std::uint64_t>(c.get_long("controller.seed", 1));
  run.params.input_set = box;

  run.meas_noise = NoiseModel(parse_noise_kind(c.get_string("noise.meas.kind", "uniform_ball")),
                              c.get_double("noise.meas.bound", 0.0),
                              static_cast<std::uint64_t>(c.get_long("noise.meas.seed", 11)));
  run.dist_noise = NoiseModel(parse_noise_kind(c.get_string("noise.dist.kind", "uniform_ball")),
                              c.get_double("noise.dist.bound", 0.0),
                              static_cast<std::uint64_t>(c.get_long("noise.dist.seed", 12)));

  run.env_opts.lattice_points_per_axis = static_cast<int>(c.get_long("envelope.lattice", 5));
  run.env_opts.descent_starts = static_cast<int>(c.get_long("envelope.starts", 4));
  run.env_opts.solver_floor = c.get_double("envelope.floor", 1e-9);
  run.env_opts.v_bar = c.get_double("envelope.v_bar", 0.0);
  if (run.env_opts.v_bar <= 0.0) {
    // working supremum of V over the measured-state ball, sampled
    const double rad = run.R + run.meas_noise.bound + run.dist_noise.bound;
    double sup = 0.0;
    for (int i = 0; i < 2048; ++i)
      sup = std::max(sup, e.clf(halton_ball_point(static_cast<std::uint64_t>(i), e.dyn.n, rad,
                                                  0xba11ULL)));
    run.env_opts.v_bar = 1.1 * sup;
  }

  run.audit_stride = static_cast<int>(c.get_long("audit.stride", 10));
  run.audit_grid_step = c.get_double("audit.grid_step", 1e-3);
  run.log_v_alpha = c.get_bool("log.v_alpha", true);

  e.est.samples = static_cast<int>(c.get_long("bounds.samples", 3000));
  e.est.sup_safety = c.get_double("bounds.sup_safety", 1.1);
  e.est.inf_safety = c.get_double("bounds.inf_safety", 0.8);
  e.est.lip_safety = c.get_double("bounds.lip_safety", 1.25);
  e.est.theta_headroom = c.get_double("bounds.theta_headroom", 1.05);
  e.est.region_cap = c.get_double("bounds.region_cap",
                                  std::numeric_limits<double>::infinity());
  e.est.seed = static_cast<std::uint64_t>(c.get_long("bounds.seed", 7));

  if (const auto s = env_seed_override()) {
    run.params.seed = *s;
    run.meas_noise = NoiseModel(run.meas_noise.kind, run.meas_noise.bound, mix_seed(*s, 101));
    run.dist_noise = NoiseModel(run.dist_noise.kind, run.dist_noise.bound, mix_seed(*s, 102));
    e.est.seed = *s;
  }

  return e;
}

// Sweep parameter targets.
enum class SweepParam { eps, eta, eps_and_eta, e_bar, q_bar, e_and_q };

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "eps") return SweepParam::eps;
  if (s == "eta") return SweepParam::eta;
  if (s == "eps_and_eta") return SweepParam::eps_and_eta;
  if (s == "e_bar") return SweepParam::e_bar;
  if (s == "q_bar") return SweepParam::q_bar;
  if (s == "e_and_q") return SweepParam::e_and_q;
  throw config_error("unknown sweep parameter: " + s);
}

inline void apply_sweep_value(ShRunConfig& run, SweepParam p, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw parameter_error("sweep values must be positive");
  switch (p) {
    case SweepParam::eps:
      run.params.eps_target = v;
      break;
    case SweepParam::eta:
      run.params.eta_target = v;
      break;
    case SweepParam::eps_and_eta:
      run.params.eps_target = v;
      run.params.eta_target = v;
      break;
    case SweepParam::e_bar:
      run.meas_noise = NoiseModel(run.meas_noise.kind, v, run.meas_noise.seed);
      break;
    case SweepParam::q_bar:
      run.dist_noise = NoiseModel(run.dist_noise.kind, v, run.dist_noise.seed);
      break;
    case SweepParam::e_and_q:
      run.meas_noise = NoiseModel(run.meas_noise.kind, v, run.meas_noise.seed);
      run.dist_noise = NoiseModel(run.dist_noise.kind, v, run.dist_noise.seed);
      break;
  }
}

}  // namespace uinfc
