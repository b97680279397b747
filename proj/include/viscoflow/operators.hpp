#pragma once

// Discrete differential operators on the staggered grid.

#include <algorithm>
#include <cmath>
#include <utility>

#include "viscoflow/constitutive.hpp"
#include "viscoflow/grid.hpp"
#include "viscoflow/parallel.hpp"

namespace viscoflow {

using GradientField = std::vector<Mat3>;

/// Visits every term of the cell-centered velocity gradient at `cell`:
/// G(d,e) = sum over visits of weight * ref.value(u_d), with G(d,e) = du_d/dx_e.
/// Diagonal entries are the face difference across the cell; off-diagonal
/// entries average the centered differences at the two d-faces of the cell.
template <class Visit>
void gradient_stencil(const Grid& g, const FaceLookup& look, std::size_t cell, bool homogeneous, Visit&& visit) {
  const Index3 c = g.coords(cell);
  for (int d = 0; d < 3; ++d) {
    Index3 up = c;
    ++up[d];
    const double hd = 1.0 / g.h[d];
    visit(d, d, look(d, up, homogeneous), hd);
    visit(d, d, look(d, c, homogeneous), -hd);
    for (int e = 0; e < 3; ++e) {
      if (e == d) continue;
      const double w = 0.25 / g.h[e];
      for (const Index3& f : {c, up}) {
        Index3 fp = f, fm = f;
        ++fp[e];
        --fm[e];
        visit(d, e, look(d, fp, homogeneous), w);
        visit(d, e, look(d, fm, homogeneous), -w);
      }
    }
  }
}

inline Mat3 cell_gradient(const Grid& g, const FaceLookup& look, const VelocityField& v, std::size_t cell,
                          bool homogeneous = false) {
  Mat3 m;
  gradient_stencil(g, look, cell, homogeneous,
                   [&](int d, int e, const FaceRef& r, double w) { m(d, e) += w * r.value(v.c[d]); });
  return m;
}

/// Second-order cell-centered velocity gradient, exact for affine fields
/// compatible with the boundary tags.
inline GradientField grad_velocity(const VelocityField& v, const Grid& g, const ModelParams& p) {
  const FaceLookup look(g, p.nu, p.sigma);
  GradientField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) { out[c] = cell_gradient(g, look, v, c); });
  return out;
}

/// Part of the gradient contributed by moving walls alone (zero velocity inside).
inline GradientField wall_gradient(const Grid& g, const ModelParams& p) {
  const FaceLookup look(g, p.nu, p.sigma);
  GradientField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) {
    Mat3 m;
    gradient_stencil(g, look, c, false, [&](int d, int e, const FaceRef& r, double w) { m(d, e) += w * r.offset; });
    out[c] = m;
  });
  return out;
}

/// D = (G + G^T)/2 and W = (G - G^T)/2.
inline std::pair<SymTensor3, Mat3> sym_antisym_split(const Mat3& grad) {
  const SymTensor3 d = SymTensor3::sym_part(grad);
  Mat3 w;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w(i, j) = 0.5 * (grad(i, j) - grad(j, i));
  return {d, w};
}

/// Objective-derivative source a(DB + BD) + (WB - BW).
inline SymTensor3 objective_source(const SymTensor3& b, const Mat3& grad, double a) {
  const auto [d, w] = sym_antisym_split(grad);
  const Mat3 bf = b.full(), df = d.full();
  const Mat3 m = a * (df * bf + bf * df) + (w * bf - bf * w);
  return SymTensor3::sym_part(m);
}

/// Componentwise 7-point Laplacian with mirror (Neumann) or periodic closure.
inline TensorField laplacian_tensor(const TensorField& b, const Grid& g) {
  TensorField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) {
    SymTensor3 s;
    for (int d = 0; d < 3; ++d) {
      const SymTensor3& lo = b[neighbor_cell(g, c, d, -1)];
      const SymTensor3& hi = b[neighbor_cell(g, c, d, +1)];
      s += ((hi - b[c]) - (b[c] - lo)) * (1.0 / (g.h[d] * g.h[d]));
    }
    out[c] = s;
  });
  return out;
}

namespace detail {
inline double minmod(double x, double y) {
  if (x * y <= 0.0) return 0.0;
  return std::abs(x) < std::abs(y) ? x : y;
}

// Upwind MUSCL value at the face between cells lo and hi for face velocity u.
inline SymTensor3 muscl_face(const TensorField& b, std::size_t lolo, std::size_t lo, std::size_t hi,
                             std::size_t hihi, double u) {
  SymTensor3 f;
  for (int k = 0; k < 6; ++k) {
    if (u >= 0.0)
      f.c[k] = b[lo].c[k] + 0.5 * minmod(b[hi].c[k] - b[lo].c[k], b[lo].c[k] - b[lolo].c[k]);
    else
      f.c[k] = b[hi].c[k] - 0.5 * minmod(b[hihi].c[k] - b[hi].c[k], b[hi].c[k] - b[lo].c[k]);
  }
  return f;
}
}  // namespace detail

/// (v.grad) B by upwind MUSCL fluxes with minmod limiting, written as the
/// flux divergence minus B div v so that constant fields are annihilated exactly.
inline TensorField advect_tensor(const VelocityField& v, const TensorField& b, const Grid& g) {
  const FaceLookup look(g, 1.0, 0.0);
  TensorField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) {
    const Index3 ci = g.coords(c);
    SymTensor3 s;
    for (int d = 0; d < 3; ++d) {
      if (g.n[d] == 1) continue;
      const std::size_t m2 = neighbor_cell(g, c, d, -2), m1 = neighbor_cell(g, c, d, -1);
      const std::size_t p1 = neighbor_cell(g, c, d, +1), p2 = neighbor_cell(g, c, d, +2);
      Index3 up = ci;
      ++up[d];
      const double u_lo = look(d, ci).value(v.c[d]);
      const double u_hi = look(d, up).value(v.c[d]);
      const double inv_h = 1.0 / g.h[d];
      if (u_hi != 0.0) s += (u_hi * inv_h) * (detail::muscl_face(b, m1, c, p1, p2, u_hi) - b[c]);
      if (u_lo != 0.0) s -= (u_lo * inv_h) * (detail::muscl_face(b, m2, m1, c, p1, u_lo) - b[c]);
    }
    out[c] = s;
  });
  return out;
}

/// Cell divergence of the staggered velocity.
inline ScalarField divergence(const VelocityField& v, const Grid& g) {
  const FaceLookup look(g, 1.0, 0.0);
  ScalarField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) {
    const Index3 ci = g.coords(c);
    double s = 0.0;
    for (int d = 0; d < 3; ++d) {
      Index3 up = ci;
      ++up[d];
      s += (look(d, up).value(v.c[d]) - look(d, ci).value(v.c[d])) / g.h[d];
    }
    out[c] = s;
  });
  return out;
}

/// True for faces that carry an unknown (not pinned to a wall).
inline bool active_face(const Grid& g, int d, const Index3& f) { return !(g.wall(d) && f[d] == 0); }

/// Componentwise Laplacian of the staggered velocity with the slip or no-slip
/// ghost closure. `homogeneous` drops the moving-wall contribution.
inline VelocityField laplacian_velocity(const VelocityField& v, const Grid& g, const FaceLookup& look,
                                        bool homogeneous = false) {
  VelocityField out(g);
  for (int d = 0; d < 3; ++d)
    parallel_for(g.cells(), [&](std::size_t id) {
      const Index3 f = g.coords(id);
      if (!active_face(g, d, f)) return;
      const double u0 = v.c[d][id];
      double s = 0.0;
      for (int e = 0; e < 3; ++e) {
        if (g.n[e] == 1) continue;
        Index3 fp = f, fm = f;
        ++fp[e];
        --fm[e];
        s += ((look(d, fp, homogeneous).value(v.c[d]) - u0) - (u0 - look(d, fm, homogeneous).value(v.c[d]))) /
             (g.h[e] * g.h[e]);
      }
      out.c[d][id] = s;
    });
  return out;
}

/// Second-order central advection (div(v v))_d in divergence form on the MAC grid.
inline VelocityField advect_velocity(const VelocityField& v, const Grid& g, const FaceLookup& look) {
  VelocityField out(g);
  for (int d = 0; d < 3; ++d)
    parallel_for(g.cells(), [&](std::size_t id) {
      const Index3 f = g.coords(id);
      if (!active_face(g, d, f)) return;
      const auto& ud = v.c[d];
      auto val = [&](int comp, Index3 p) { return look(comp, p).value(v.c[comp]); };
      double s = 0.0;
      {
        Index3 fp = f, fm = f;
        ++fp[d];
        --fm[d];
        const double c_hi = 0.5 * (ud[id] + val(d, fp));
        const double c_lo = 0.5 * (val(d, fm) + ud[id]);
        s += (c_hi * c_hi - c_lo * c_lo) / g.h[d];
      }
      for (int e = 0; e < 3; ++e) {
        if (e == d || g.n[e] == 1) continue;
        Index3 fe = f, fd = f, fde = f, fme = f;
        ++fe[e];
        --fd[d];
        --fde[d];
        ++fde[e];
        --fme[e];
        const double ue_hi = 0.5 * (val(e, fe) + val(e, fde));
        const double ud_hi = 0.5 * (ud[id] + val(d, fe));
        const double ue_lo = 0.5 * (val(e, f) + val(e, fd));
        const double ud_lo = 0.5 * (val(d, fme) + ud[id]);
        s += (ue_hi * ud_hi - ue_lo * ud_lo) / g.h[e];
      }
      out.c[d][id] = s;
    });
  return out;
}

/// Face force -G^T tau: the exact negative adjoint of the homogeneous
/// cell-gradient, so that sum_faces F.u = -sum_cells tau : G(u) for every u.
inline VelocityField stress_divergence(const TensorField& tau, const Grid& g, const FaceLookup& look) {
  VelocityField out(g);
  thread_pool().run(3, [&](std::size_t dd) {
    const int comp = static_cast<int>(dd);
    auto& f = out.c[comp];
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const SymTensor3& t = tau[c];
      gradient_stencil(g, look, c, true, [&](int d, int e, const FaceRef& r, double w) {
        if (d == comp && r.idx != FaceRef::npos) f[r.idx] -= w * r.coeff * t(d, e);
      });
    }
  });
  return out;
}

/// Wall ghost values produced by the slip closure with the elastic traction:
/// ghost[e][side][d] is indexed like the adjacent interior face layer.
struct WallGhosts {
  std::array<std::array<std::array<std::vector<double>, 3>, 2>, 3> tangential;
  std::array<std::array<std::array<std::vector<double>, 3>, 2>, 3> normal;
};

/// Ghost-layer fill for walls tagged navier_slip: the normal component is
/// reflected with a sign change so v.n = 0 on the wall, and the tangential
/// ghost enforces ((2 nu D + 2 a mu S(B)) n)_t = -sigma (v - U)_t to first
/// order. Wall layers of other tags are left empty.
inline WallGhosts apply_navier_slip(const VelocityField& v, const TensorField& b, const ModelParams& p,
                                    const Grid& g) {
  WallGhosts out;
  for (int e = 0; e < 3; ++e) {
    for (int side = 0; side < 2; ++side) {
      if (g.bc[e][side] != Bc::navier_slip) continue;
      const int layer = side == 0 ? 0 : g.n[e] - 1;
      const double r = p.sigma * g.h[e] / (2.0 * p.nu);
      const double sign = side == 0 ? 1.0 : -1.0;  // (S n)_t = -S_de on the lower wall
      for (int d = 0; d < 3; ++d) {
        auto& tg = out.tangential[e][side][d];
        auto& ng = out.normal[e][side][d];
        tg.assign(g.cells(), 0.0);
        ng.assign(g.cells(), 0.0);
        for (std::size_t id = 0; id < g.cells(); ++id) {
          const Index3 f = g.coords(id);
          if (f[e] != layer) continue;
          if (d == e) {
            // the face one step outside mirrors the first interior face
            Index3 mirror = f;
            mirror[e] = side == 0 ? 1 : g.n[e] - 1;
            ng[id] = -v.c[d][g.idx(mirror)];
            continue;
          }
          if (!active_face(g, d, f)) continue;
          const double u0 = v.c[d][id];
          const std::size_t left = neighbor_cell(g, g.idx(f), d, -1);
          const double s = 0.5 * (stress_S(b[id], p)(d, e) + stress_S(b[left], p)(d, e));
          const double wall_u = g.wall_velocity[e][side][d];
          tg[id] = (u0 * (1.0 - r) + 2.0 * r * wall_u + sign * 2.0 * p.a * p.mu * s * g.h[e] / p.nu) / (1.0 + r);
        }
      }
    }
  }
  return out;
}

}  // namespace viscoflow
