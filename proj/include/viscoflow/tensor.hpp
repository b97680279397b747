#pragma once

// Small fixed-size linear algebra: 3-vectors, full 3x3 matrices and the
// symmetric 3x3 tensor that carries the conformation tensor and its relatives.

#include <array>
#include <cmath>
#include <ostream>

namespace viscoflow {

using Vec3 = std::array<double, 3>;

/// Dense 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  constexpr double& operator()(int i, int j) { return a[3 * i + j]; }
  constexpr double operator()(int i, int j) const { return a[3 * i + j]; }

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }

  constexpr Mat3 transpose() const {
    Mat3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  constexpr double trace() const { return a[0] + a[4] + a[8]; }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (int k = 0; k < 9; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (int k = 0; k < 9; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }
};

constexpr Mat3 operator+(Mat3 l, const Mat3& r) { return l += r; }
constexpr Mat3 operator-(Mat3 l, const Mat3& r) { return l -= r; }
constexpr Mat3 operator*(Mat3 m, double s) { return m *= s; }
constexpr Mat3 operator*(double s, Mat3 m) { return m *= s; }

constexpr Mat3 operator*(const Mat3& l, const Mat3& r) {
  Mat3 p;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
      p(i, j) = s;
    }
  return p;
}

constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = m(i, 0) * v[0] + m(i, 1) * v[1] + m(i, 2) * v[2];
  return r;
}

constexpr double frob(const Mat3& x, const Mat3& y) {
  double s = 0.0;
  for (int k = 0; k < 9; ++k) s += x.a[k] * y.a[k];
  return s;
}

inline double norm(const Mat3& m) { return std::sqrt(frob(m, m)); }

constexpr double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
constexpr Vec3 cross(const Vec3& x, const Vec3& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Symmetric 3x3 real matrix. Only the six independent entries are stored,
/// in the order (a11, a22, a33, a12, a13, a23).
struct SymTensor3 {
  std::array<double, 6> c{};

  static constexpr int slot(int i, int j) {
    constexpr int map[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
    return map[i][j];
  }

  constexpr double operator()(int i, int j) const { return c[slot(i, j)]; }
  constexpr double& operator()(int i, int j) { return c[slot(i, j)]; }

  static constexpr SymTensor3 zero() { return {}; }
  static constexpr SymTensor3 identity() { return {{1.0, 1.0, 1.0, 0.0, 0.0, 0.0}}; }
  static constexpr SymTensor3 diag(double x, double y, double z) { return {{x, y, z, 0.0, 0.0, 0.0}}; }

  /// (M + M^T) / 2.
  static constexpr SymTensor3 sym_part(const Mat3& m) {
    return {{m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
             0.5 * (m(1, 2) + m(2, 1))}};
  }

  constexpr Mat3 full() const {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  constexpr double trace() const { return c[0] + c[1] + c[2]; }
  constexpr double det() const {
    return c[0] * (c[1] * c[2] - c[5] * c[5]) - c[3] * (c[3] * c[2] - c[5] * c[4]) +
           c[4] * (c[3] * c[5] - c[1] * c[4]);
  }

  constexpr SymTensor3& operator+=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c[k] += o.c[k];
    return *this;
  }
  constexpr SymTensor3& operator-=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c[k] -= o.c[k];
    return *this;
  }
  constexpr SymTensor3& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend constexpr bool operator==(const SymTensor3&, const SymTensor3&) = default;
};

constexpr SymTensor3 operator+(SymTensor3 l, const SymTensor3& r) { return l += r; }
constexpr SymTensor3 operator-(SymTensor3 l, const SymTensor3& r) { return l -= r; }
constexpr SymTensor3 operator-(SymTensor3 t) { return t *= -1.0; }
constexpr SymTensor3 operator*(SymTensor3 t, double s) { return t *= s; }
constexpr SymTensor3 operator*(double s, SymTensor3 t) { return t *= s; }

/// Frobenius product sum_ij A_ij B_ij.
constexpr double frob(const SymTensor3& x, const SymTensor3& y) {
  return x.c[0] * y.c[0] + x.c[1] * y.c[1] + x.c[2] * y.c[2] +
         2.0 * (x.c[3] * y.c[3] + x.c[4] * y.c[4] + x.c[5] * y.c[5]);
}
constexpr double frob(const SymTensor3& x, const Mat3& y) { return frob(x.full(), y); }
constexpr double frob(const Mat3& x, const SymTensor3& y) { return frob(x, y.full()); }

constexpr double norm2(const SymTensor3& t) { return frob(t, t); }
inline double norm(const SymTensor3& t) { return std::sqrt(frob(t, t)); }

/// Symmetric part of the product A*B of two symmetric matrices.
constexpr SymTensor3 sym_product(const SymTensor3& x, const SymTensor3& y) {
  return SymTensor3::sym_part(x.full() * y.full());
}

constexpr SymTensor3 square(const SymTensor3& x) { return sym_product(x, x); }

inline std::ostream& operator<<(std::ostream& os, const SymTensor3& t) {
  os << "[[" << t(0, 0) << ", " << t(0, 1) << ", " << t(0, 2) << "], [" << t(1, 0) << ", " << t(1, 1)
     << ", " << t(1, 2) << "], [" << t(2, 0) << ", " << t(2, 1) << ", " << t(2, 2) << "]]";
  return os;
}

}  // namespace viscoflow
