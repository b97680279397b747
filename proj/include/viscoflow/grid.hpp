#pragma once

// Box grid with per-face boundary tags and the staggered field layout.
//
// Cell (i,j,k) has its center at ((i+1/2)hx, (j+1/2)hy, (k+1/2)hz) and linear
// index i + nx (j + ny k). Velocity component d is stored on the lower
// d-face of every cell, so its value at index c sits at x_d = c_d h_d. On a
// wall direction the face with c_d = 0 lies on the wall and is held at zero;
// the upper wall face (index n_d) is not stored and is zero as well.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "viscoflow/errors.hpp"
#include "viscoflow/tensor.hpp"

namespace viscoflow {

enum class Bc { periodic, navier_slip, no_slip };

inline const char* to_string(Bc b) {
  switch (b) {
    case Bc::periodic: return "periodic";
    case Bc::navier_slip: return "navier_slip";
    case Bc::no_slip: return "no_slip";
  }
  return "unknown";
}

using Index3 = std::array<int, 3>;

struct Grid {
  Index3 n{16, 16, 16};
  Vec3 h{1.0 / 16, 1.0 / 16, 1.0 / 16};
  /// bc[d][0] is the lower face normal to axis d, bc[d][1] the upper one.
  std::array<std::array<Bc, 2>, 3> bc{};
  /// Tangential velocity of each wall (moving-lid forcing); the normal entry is ignored.
  std::array<std::array<Vec3, 2>, 3> wall_velocity{};

  static Grid cube(int cells, double length, Bc tag) {
    Grid g;
    g.n = {cells, cells, cells};
    g.h = {length / cells, length / cells, length / cells};
    for (auto& f : g.bc) f = {tag, tag};
    return g;
  }

  bool periodic(int d) const { return bc[d][0] == Bc::periodic; }
  bool wall(int d) const { return !periodic(d); }
  double length(int d) const { return n[d] * h[d]; }
  double cell_volume() const { return h[0] * h[1] * h[2]; }
  std::size_t cells() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }

  std::size_t idx(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
  }
  std::size_t idx(const Index3& c) const { return idx(c[0], c[1], c[2]); }
  Index3 coords(std::size_t id) const {
    const int i = static_cast<int>(id % n[0]);
    const std::size_t r = id / n[0];
    return {i, static_cast<int>(r % n[1]), static_cast<int>(r / n[1])};
  }

  Vec3 cell_center(const Index3& c) const {
    return {(c[0] + 0.5) * h[0], (c[1] + 0.5) * h[1], (c[2] + 0.5) * h[2]};
  }
  /// Position of the stored velocity component d at face index c.
  Vec3 face_center(int d, const Index3& c) const {
    Vec3 x = cell_center(c);
    x[d] = c[d] * h[d];
    return x;
  }

  /// Throws ValidationError unless the grid satisfies its invariants.
  void validate() const {
    for (int d = 0; d < 3; ++d) {
      const std::string axis(1, "xyz"[d]);
      if (!(h[d] > 0.0) || !std::isfinite(h[d])) throw ValidationError("h" + axis, "must be positive");
      if ((bc[d][0] == Bc::periodic) != (bc[d][1] == Bc::periodic))
        throw ValidationError("bc_" + axis, "periodic tags must come in matching face pairs");
      if (n[d] == 1 && !periodic(d))
        throw ValidationError("n" + axis, "a single-cell (unresolved) direction must be periodic");
      if (n[d] != 1 && n[d] < 4) throw ValidationError("n" + axis, "must be >= 4 in a resolved direction");
    }
  }

  /// FNV-1a hash of the geometry and boundary description.
  std::uint64_t hash() const {
    std::uint64_t x = 1469598103934665603ull;
    auto mix = [&x](const void* p, std::size_t len) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < len; ++i) {
        x ^= b[i];
        x *= 1099511628211ull;
      }
    };
    mix(n.data(), sizeof(n));
    mix(h.data(), sizeof(h));
    for (const auto& f : bc)
      for (Bc t : f) {
        const int v = static_cast<int>(t);
        mix(&v, sizeof(v));
      }
    for (const auto& f : wall_velocity)
      for (const Vec3& u : f) mix(u.data(), sizeof(u));
    return x;
  }
};

using ScalarField = std::vector<double>;
using TensorField = std::vector<SymTensor3>;

struct VelocityField {
  std::array<std::vector<double>, 3> c;

  VelocityField() = default;
  explicit VelocityField(const Grid& g) {
    for (auto& v : c) v.assign(g.cells(), 0.0);
  }
  friend bool operator==(const VelocityField&, const VelocityField&) = default;
};

inline TensorField make_tensor_field(const Grid& g, const SymTensor3& value = SymTensor3::identity()) {
  return TensorField(g.cells(), value);
}

/// Reference to a stored velocity value, possibly through a boundary ghost:
/// value = coeff * u[idx] + offset, with idx = npos when only the offset remains.
struct FaceRef {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t idx = npos;
  double coeff = 0.0;
  double offset = 0.0;

  double value(const std::vector<double>& u) const { return (idx == npos ? 0.0 : coeff * u[idx]) + offset; }
};

/// Coefficients of the tangential wall ghost u_g = alpha u_0 + beta U for the
/// wall across which direction e points; `upper` selects the face.
struct GhostRule {
  double alpha, beta;
};

inline GhostRule tangential_ghost(const Grid& g, int e, bool upper, double nu, double sigma) {
  const Bc tag = g.bc[e][upper ? 1 : 0];
  if (tag == Bc::no_slip) return {-1.0, 2.0};
  // Robin closure of nu du/dn = -sigma (u - U) with the wall midway between
  // the ghost and the first interior value.
  const double r = sigma * g.h[e] / (2.0 * nu);
  return {(1.0 - r) / (1.0 + r), 2.0 * r / (1.0 + r)};
}

/// Boundary-aware lookup of the staggered velocity. Given component d and a
/// face index that may leave the stored range by one step along a single
/// axis, returns how the value is formed from stored data. `homogeneous`
/// drops the wall-velocity contribution.
class FaceLookup {
 public:
  FaceLookup(const Grid& g, double nu, double sigma) : g_(g) {
    for (int e = 0; e < 3; ++e)
      for (int s = 0; s < 2; ++s)
        rule_[e][s] = g.wall(e) ? tangential_ghost(g, e, s == 1, nu, sigma) : GhostRule{1.0, 0.0};
  }

  FaceRef operator()(int d, Index3 p, bool homogeneous = false) const {
    double coeff = 1.0, offset = 0.0;
    for (int e = 0; e < 3; ++e) {
      const int n = g_.n[e];
      if (p[e] >= 0 && p[e] < n) continue;
      if (g_.periodic(e)) {
        p[e] = (p[e] % n + n) % n;
        continue;
      }
      if (e == d) {
        // normal component: wall faces carry zero
        if (p[e] == n || p[e] == 0) return {};
        // one step beyond a wall face: odd reflection about it
        p[e] = p[e] < 0 ? -p[e] : 2 * n - p[e];
        coeff = -coeff;
        continue;
      }
      const bool upper = p[e] >= n;
      const GhostRule r = rule_[e][upper ? 1 : 0];
      p[e] = upper ? n - 1 : 0;
      if (!homogeneous) offset += coeff * r.beta * g_.wall_velocity[e][upper ? 1 : 0][d];
      coeff *= r.alpha;
    }
    if (g_.wall(d) && p[d] == 0) return {};
    return {g_.idx(p), coeff, offset};
  }

  const GhostRule& rule(int e, bool upper) const { return rule_[e][upper ? 1 : 0]; }

 private:
  const Grid& g_;
  std::array<std::array<GhostRule, 2>, 3> rule_;
};

/// Neighbor cell for the tensor field with mirror (homogeneous Neumann) or
/// periodic closure; `shift` may be any offset with |shift| <= n.
inline int wrap_cell(const Grid& g, int d, int p) {
  const int n = g.n[d];
  if (p >= 0 && p < n) return p;
  if (g.periodic(d)) return ((p % n) + n) % n;
  return p < 0 ? -p - 1 : 2 * n - p - 1;
}

inline std::size_t neighbor_cell(const Grid& g, std::size_t id, int d, int shift) {
  Index3 c = g.coords(id);
  c[d] = wrap_cell(g, d, c[d] + shift);
  return g.idx(c);
}

}  // namespace viscoflow
