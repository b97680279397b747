#pragma once

// Spectral kernels for symmetric 3x3 matrices: eigen-decomposition, minimal
// eigenvalue, inverse, fractional powers, matrix logarithm and exponential.
// Every matrix function here goes through the eigen-decomposition.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "viscoflow/errors.hpp"
#include "viscoflow/tensor.hpp"

namespace viscoflow {

/// Eigenvalues in ascending order; column k of `vectors` is the unit
/// eigenvector belonging to `values[k]`.
struct Spectrum3 {
  std::array<double, 3> values{};
  Mat3 vectors = Mat3::identity();

  Vec3 vector(int k) const { return {vectors(0, k), vectors(1, k), vectors(2, k)}; }
};

namespace detail {

inline Spectrum3 sorted(std::array<std::pair<double, Vec3>, 3> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  Spectrum3 s;
  for (int k = 0; k < 3; ++k) {
    s.values[k] = pairs[k].first;
    for (int i = 0; i < 3; ++i) s.vectors(i, k) = pairs[k].second[i];
  }
  return s;
}

/// Cyclic Jacobi iteration; used when the closed form is ill-conditioned.
inline Spectrum3 jacobi_eig(const SymTensor3& t) {
  Mat3 a = t.full();
  Mat3 v = Mat3::identity();
  const double scale = std::max(norm(a), 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (std::sqrt(off) <= 1e-18 * scale) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double tt = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double s = tt * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::array<std::pair<double, Vec3>, 3> pairs;
  for (int k = 0; k < 3; ++k) pairs[k] = {a(k, k), Vec3{v(0, k), v(1, k), v(2, k)}};
  return sorted(pairs);
}

inline bool is_diagonal(const SymTensor3& a) { return a.c[3] == 0.0 && a.c[4] == 0.0 && a.c[5] == 0.0; }

inline Spectrum3 diagonal_eig(const SymTensor3& a) {
  std::array<std::pair<double, Vec3>, 3> pairs = {
      std::pair{a.c[0], Vec3{1, 0, 0}}, std::pair{a.c[1], Vec3{0, 1, 0}}, std::pair{a.c[2], Vec3{0, 0, 1}}};
  return sorted(pairs);
}

struct CubicRoots {
  double lo, mid, hi;
  double r;            // normalized cubic invariant, in [-1, 1]
  double sqrt_disc;    // |(l1-l2)(l2-l3)(l1-l3)| of the scaled matrix
  double scaled_norm;  // Frobenius norm of the scaled matrix
};

// Trigonometric solution of the characteristic cubic of a scaled matrix.
inline CubicRoots cubic_roots(const SymTensor3& a) {
  const double q = a.trace() / 3.0;
  SymTensor3 b = a;
  b.c[0] -= q;
  b.c[1] -= q;
  b.c[2] -= q;
  const double p = std::sqrt(norm2(b) / 6.0);
  CubicRoots out{q, q, q, 0.0, 0.0, norm(a)};
  if (p == 0.0) return out;
  const double r = std::clamp(b.det() / (2.0 * p * p * p), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  out.hi = q + 2.0 * p * std::cos(phi);
  out.lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  out.mid = 3.0 * q - out.hi - out.lo;
  out.r = r;
  out.sqrt_disc = std::sqrt(108.0) * p * p * p * std::sqrt(std::max(0.0, 1.0 - r * r));
  return out;
}

inline double max_abs_entry(const SymTensor3& a) {
  double m = 0.0;
  for (double x : a.c) m = std::max(m, std::abs(x));
  return m;
}

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Unit eigenvector of a for an isolated eigenvalue, from the largest cross
// product of rows of (a - lambda I).
inline Vec3 isolated_eigenvector(const SymTensor3& a, double lambda) {
  const Vec3 r0{a(0, 0) - lambda, a(0, 1), a(0, 2)};
  const Vec3 r1{a(1, 0), a(1, 1) - lambda, a(1, 2)};
  const Vec3 r2{a(2, 0), a(2, 1), a(2, 2) - lambda};
  const Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
  const double d01 = dot(c01, c01), d02 = dot(c02, c02), d12 = dot(c12, c12);
  if (d01 >= d02 && d01 >= d12) return normalized(c01);
  if (d02 >= d12) return normalized(c02);
  return normalized(c12);
}

inline std::pair<Vec3, Vec3> orthogonal_complement(const Vec3& w) {
  Vec3 u;
  if (std::abs(w[0]) > std::abs(w[1])) {
    const double inv = 1.0 / std::sqrt(w[0] * w[0] + w[2] * w[2]);
    u = {-w[2] * inv, 0.0, w[0] * inv};
  } else {
    const double inv = 1.0 / std::sqrt(w[1] * w[1] + w[2] * w[2]);
    u = {0.0, w[2] * inv, -w[1] * inv};
  }
  return {u, cross(w, u)};
}

inline double quadratic_form(const SymTensor3& a, const Vec3& x, const Vec3& y) { return dot(x, a.full() * y); }

inline double reconstruction_error(const SymTensor3& a, const Spectrum3& s) {
  Mat3 err = a.full();
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) err(i, j) -= s.values[k] * s.vectors(i, k) * s.vectors(j, k);
  return norm(err);
}

}  // namespace detail

/// Eigen-decomposition of a symmetric 3x3 matrix. Closed form with a cyclic
/// Jacobi fallback for nearly repeated eigenvalues; exact for diagonal input.
inline Spectrum3 eig_sym3(const SymTensor3& a) {
  if (detail::is_diagonal(a)) return detail::diagonal_eig(a);
  const double scale = detail::max_abs_entry(a);
  const SymTensor3 as = a * (1.0 / scale);
  const detail::CubicRoots roots = detail::cubic_roots(as);
  const double n3 = roots.scaled_norm * roots.scaled_norm * roots.scaled_norm;
  if (roots.sqrt_disc < 1e-14 * n3) return detail::jacobi_eig(a);

  // The eigenvalue farther from the middle one is well separated.
  const double isolated = roots.r >= 0.0 ? roots.hi : roots.lo;
  const Vec3 w = detail::isolated_eigenvector(as, isolated);
  const auto [u, v] = detail::orthogonal_complement(w);
  const double m00 = detail::quadratic_form(as, u, u);
  const double m01 = detail::quadratic_form(as, u, v);
  const double m11 = detail::quadratic_form(as, v, v);
  const double theta = 0.5 * std::atan2(2.0 * m01, m00 - m11);
  const double c = std::cos(theta), s = std::sin(theta);
  const Vec3 e1{c * u[0] + s * v[0], c * u[1] + s * v[1], c * u[2] + s * v[2]};
  const Vec3 e2{-s * u[0] + c * v[0], -s * u[1] + c * v[1], -s * u[2] + c * v[2]};
  const double mu1 = c * c * m00 + 2.0 * c * s * m01 + s * s * m11;
  const double mu2 = s * s * m00 - 2.0 * c * s * m01 + c * c * m11;
  const double mu0 = detail::quadratic_form(as, w, w);

  Spectrum3 out = detail::sorted({std::pair{mu0 * scale, w}, std::pair{mu1 * scale, e1}, std::pair{mu2 * scale, e2}});
  if (detail::reconstruction_error(a, out) > 1e-13 * (1.0 + norm(a))) return detail::jacobi_eig(a);
  return out;
}

/// Eigenvalues only, ascending. Same closed form as `eig_sym3`.
inline std::array<double, 3> eigenvalues_sym3(const SymTensor3& a) {
  if (detail::is_diagonal(a)) {
    std::array<double, 3> d{a.c[0], a.c[1], a.c[2]};
    std::sort(d.begin(), d.end());
    return d;
  }
  const double scale = detail::max_abs_entry(a);
  const detail::CubicRoots roots = detail::cubic_roots(a * (1.0 / scale));
  const double n3 = roots.scaled_norm * roots.scaled_norm * roots.scaled_norm;
  if (roots.sqrt_disc < 1e-14 * n3) return eig_sym3(a).values;
  return {roots.lo * scale, roots.mid * scale, roots.hi * scale};
}

/// Minimal eigenvalue of a symmetric matrix.
inline double lambda_min(const SymTensor3& a) { return eigenvalues_sym3(a)[0]; }

/// Q diag(f(lambda)) Q^T.
template <class F>
SymTensor3 apply_spectral(const Spectrum3& s, F&& f) {
  SymTensor3 r;
  for (int k = 0; k < 3; ++k) {
    const double fk = f(s.values[k]);
    const Vec3 q = s.vector(k);
    r.c[0] += fk * q[0] * q[0];
    r.c[1] += fk * q[1] * q[1];
    r.c[2] += fk * q[2] * q[2];
    r.c[3] += fk * q[0] * q[1];
    r.c[4] += fk * q[0] * q[2];
    r.c[5] += fk * q[1] * q[2];
  }
  return r;
}

namespace detail {
inline std::string describe(const SymTensor3& a) {
  std::ostringstream os;
  os.precision(17);
  os << a;
  return os.str();
}
inline void require_positive(const Spectrum3& s, const SymTensor3& a, const char* op) {
  if (!(s.values[0] > 0.0))
    throw SingularMatrix(std::string(op) + " needs a positive definite matrix, lambda_min = " +
                         std::to_string(s.values[0]) + " for " + describe(a));
}
}  // namespace detail

inline SymTensor3 inv(const SymTensor3& a) {
  const Spectrum3 s = eig_sym3(a);
  detail::require_positive(s, a, "inv");
  return apply_spectral(s, [](double l) { return 1.0 / l; });
}

/// Spectral power A^p. Non-integer exponents need a positive definite A.
inline SymTensor3 pow_sym(const SymTensor3& a, double p) {
  if (p == 0.0) return SymTensor3::identity();
  if (p == 1.0) return a;
  const Spectrum3 s = eig_sym3(a);
  const bool integer = std::floor(p) == p;
  if (!integer || p < 0.0) detail::require_positive(s, a, "pow_sym");
  return apply_spectral(s, [p](double l) { return std::pow(l, p); });
}

/// Hencky logarithm: the symmetric L with exp(L) = A.
inline SymTensor3 hencky_log(const SymTensor3& a) {
  const Spectrum3 s = eig_sym3(a);
  detail::require_positive(s, a, "hencky_log");
  return apply_spectral(s, [](double l) { return std::log(l); });
}

inline SymTensor3 exp_sym(const SymTensor3& a) {
  return apply_spectral(eig_sym3(a), [](double l) { return std::exp(l); });
}

}  // namespace viscoflow
