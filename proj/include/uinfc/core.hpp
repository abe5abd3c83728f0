#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace uinfc {

using Vec = std::vector<double>;

// ---- error taxonomy ---------------------------------------------------------

struct parameter_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct evaluation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct regularization_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct infeasibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- small dense-vector helpers ---------------------------------------------

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_diff(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec sub(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vec scale(Vec a, double s) {
  for (double& v : a) v *= s;
  return a;
}

// a + s*b
inline Vec axpy(Vec a, double s, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
  return a;
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void require_finite(const Vec& a, const char* what) {
  if (!all_finite(a)) throw evaluation_error(std::string(what) + ": nonfinite component");
}

// ---- deterministic seeding ---------------------------------------------------

// splitmix64, used to derive independent per-step/per-purpose seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t salt = 0) {
  return std::mt19937_64(mix_seed(seed, salt));
}

// ---- quasi-random sampling ---------------------------------------------------

inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline constexpr std::uint64_t kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

// Low-discrepancy point in the unit cube [0,1)^n.
inline Vec halton_point(std::uint64_t index, int n) {
  Vec p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = halton(index + 1, kHaltonPrimes[i % 10]);
  return p;
}

// Seeded quasi-random point in a centered annulus r_in <= ||x|| <= r_out
// (ball when r_in = 0). The direction comes from a seeded gaussian stream,
// the radius from the Halton radical inverse, so consecutive indices cover
// the shell evenly and the whole stream is reproducible given (seed, index).
inline Vec halton_annulus_point(std::uint64_t index, int n, double r_in, double r_out,
                                std::uint64_t seed = 0x5eedba11ULL) {
  Vec dir(static_cast<std::size_t>(n));
  std::mt19937_64 g = make_rng(seed, index);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < n; ++i) dir[static_cast<std::size_t>(i)] = nd(g);
  double dn = norm(dir);
  if (dn == 0.0) dir[0] = dn = 1.0;
  const double u = halton(index + 1, 2);
  const double lo = std::pow(r_in, n), hi = std::pow(r_out, n);
  const double r = std::pow(lo + u * (hi - lo), 1.0 / n);
  return scale(dir, r / dn);
}

inline Vec halton_ball_point(std::uint64_t index, int n, double radius,
                             std::uint64_t seed = 0x5eedba11ULL) {
  return halton_annulus_point(index, n, 0.0, radius, seed);
}

// ---- 1-D golden-section minimization -----------------------------------------

template <typename F>
double golden_min(F&& f, double a, double b, int iters) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace uinfc
