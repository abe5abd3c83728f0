#pragma once

#include <functional>

#include "uinfc/core.hpp"

namespace uinfc {

struct Dynamics {
  int n = 0;
  int m = 0;
  std::function<Vec(const Vec&, const Vec&)> rhs;
  bool control_affine = false;

  Vec operator()(const Vec& x, const Vec& u) const {
    if (static_cast<int>(x.size()) != n || static_cast<int>(u.size()) != m)
      throw parameter_error("Dynamics: state/control dimension mismatch");
    Vec out = rhs(x, u);
    require_finite(out, "Dynamics::rhs");
    return out;
  }
};

// Extended nonholonomic dynamic integrator: three-wheel robot with dynamic
// steering and throttle. x = (phi1, phi2, phi3, eta1, eta2), u = (u1, u2).
inline Vec endi_rhs(const Vec& x, const Vec& u) {
  if (x.size() != 5 || u.size() != 2) throw parameter_error("endi_rhs: expects n=5, m=2");
  return {x[3], x[4], x[0] * x[4] - x[3] * x[1], u[0], u[1]};
}

// Brockett's nonholonomic integrator: phi' = g1(phi) w1 + g2(phi) w2.
inline Vec ni_rhs(const Vec& phi, const Vec& omega) {
  if (phi.size() != 3 || omega.size() != 2) throw parameter_error("ni_rhs: expects n=3, m=2");
  return {omega[0], omega[1], -phi[1] * omega[0] + phi[0] * omega[1]};
}

inline Dynamics make_endi_dynamics() {
  Dynamics d;
  d.n = 5;
  d.m = 2;
  d.rhs = endi_rhs;
  d.control_affine = true;
  return d;
}

inline Dynamics make_ni_dynamics() {
  Dynamics d;
  d.n = 3;
  d.m = 2;
  d.rhs = ni_rhs;
  d.control_affine = true;
  return d;
}

// Single integrator on the line: x' = u.
inline Dynamics make_integrator_1d() {
  Dynamics d;
  d.n = 1;
  d.m = 1;
  d.rhs = [](const Vec&, const Vec& u) { return Vec{u[0]}; };
  d.control_affine = true;
  return d;
}

// ---- bounded noise -----------------------------------------------------------

enum class NoiseKind { zero, uniform_ball, worst_case_sine };

// Bounded noise realization. The uniform_ball kind draws a fresh vector from
// the ball on every call and therefore carries generator state: one instance
// per run, not shared across threads. zero and worst_case_sine are pure in t.
struct NoiseModel {
  NoiseKind kind = NoiseKind::zero;
  double bound = 0.0;
  std::uint64_t seed = 0;

  NoiseModel() = default;
  NoiseModel(NoiseKind k, double b, std::uint64_t s) : kind(k), bound(b), seed(s), rng_(make_rng(s)) {
    if (b < 0.0) throw parameter_error("NoiseModel: bound must be nonnegative");
  }

  void reset() { rng_ = make_rng(seed); }

  bool deterministic() const { return kind != NoiseKind::uniform_ball; }

  Vec emit(double t, int n) {
    if (n < 1) throw parameter_error("NoiseModel: dimension must be >= 1");
    Vec v(static_cast<std::size_t>(n), 0.0);
    if (bound == 0.0 || kind == NoiseKind::zero) return v;
    switch (kind) {
      case NoiseKind::uniform_ball: {
        std::normal_distribution<double> nd(0.0, 1.0);
        double nn = 0.0;
        for (int i = 0; i < n; ++i) {
          v[static_cast<std::size_t>(i)] = nd(rng_);
          nn += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        nn = std::sqrt(nn);
        if (nn == 0.0) {
          v[0] = 1.0;
          nn = 1.0;
        }
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        const double r = bound * std::pow(ud(rng_), 1.0 / n);
        for (double& c : v) c *= r / nn;
        return v;
      }
      case NoiseKind::worst_case_sine: {
        // Phase-staggered cosines rotate the vector through the coordinates
        // with period 1; sum of squared staggered cosines is n/2, so the norm
        // is exactly `bound` at every t.
        constexpr double pi = 3.14159265358979323846;
        if (n == 1) {
          v[0] = bound * std::cos(2.0 * pi * t);
          return v;
        }
        const double amp = bound * std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i)
          v[static_cast<std::size_t>(i)] =
              amp * std::cos(2.0 * pi * t - pi * static_cast<double>(i) / n);
        return v;
      }
      default:
        return v;
    }
  }

 private:
  std::mt19937_64 rng_{0};
};

inline Vec emit_noise(NoiseModel& model, double t, int n) { return model.emit(t, n); }

}  // namespace uinfc
