#pragma once

// Reproducible sampling law for the identity sweeps. The bit-level recipe is
// fixed so that a given seed yields the same matrices everywhere:
//   uniform(): top 53 bits of mt19937_64, scaled to [0, 1)
//   normal():  Box-Muller on two uniforms (cosine branch only)
//   rotation:  unit quaternion from three uniforms (Shoemake)
//   SPD draw:  Q diag(l) Q^T, log10(l_i) uniform in [log10 lo, log10 hi]

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "viscoflow/spectral.hpp"
#include "viscoflow/tensor.hpp"

namespace viscoflow {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline Mat3 random_rotation(Rng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2.0 * std::numbers::pi * u2);
  const double x = a * std::cos(2.0 * std::numbers::pi * u2);
  const double y = b * std::sin(2.0 * std::numbers::pi * u3);
  const double z = b * std::cos(2.0 * std::numbers::pi * u3);
  Mat3 r;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - z * w);
  r(0, 2) = 2 * (x * z + y * w);
  r(1, 0) = 2 * (x * y + z * w);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - x * w);
  r(2, 0) = 2 * (x * z - y * w);
  r(2, 1) = 2 * (y * z + x * w);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return r;
}

/// Q diag(values) Q^T, assembled directly into symmetric storage.
inline SymTensor3 rotate_diagonal(const Mat3& q, const std::array<double, 3>& values) {
  Spectrum3 s;
  s.values = values;
  s.vectors = q;
  return apply_spectral(s, [](double l) { return l; });
}

inline SymTensor3 random_spd(Rng& rng, double lo = 1e-3, double hi = 1e3) {
  const double a = std::log10(lo), b = std::log10(hi);
  std::array<double, 3> l;
  for (auto& x : l) x = std::pow(10.0, rng.uniform(a, b));
  return rotate_diagonal(random_rotation(rng), l);
}

/// SPD draw whose two largest eigenvalues agree to a relative 1e-12.
inline SymTensor3 random_near_degenerate_spd(Rng& rng, double lo = 1e-3, double hi = 1e3) {
  const double a = std::log10(lo), b = std::log10(hi);
  const double l0 = std::pow(10.0, rng.uniform(a, b));
  const double l1 = std::pow(10.0, rng.uniform(a, b));
  const double l2 = l1 * (1.0 + 1e-12 * rng.uniform());
  return rotate_diagonal(random_rotation(rng), {l0, l1, l2});
}

inline SymTensor3 random_symmetric(Rng& rng, double scale = 1.0) {
  SymTensor3 t;
  for (auto& x : t.c) x = scale * rng.normal();
  return t;
}

inline SymTensor3 random_trace_free(Rng& rng, double scale = 1.0) {
  SymTensor3 t = random_symmetric(rng, scale);
  const double m = t.trace() / 3.0;
  t.c[0] -= m;
  t.c[1] -= m;
  t.c[2] -= m;
  return t;
}

inline Mat3 random_matrix(Rng& rng, double scale = 1.0) {
  Mat3 m;
  for (auto& x : m.a) x = scale * rng.normal();
  return m;
}

}  // namespace viscoflow
