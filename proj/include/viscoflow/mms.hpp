#pragma once

// Manufactured solution on the periodic unit square (one periodic cell in z):
//   v = g(t) (sin kx cos ky, -cos kx sin ky, 0),  k = 2 pi
//   B = I + beta g(t) M(x, y)
// with M11 = sin kx sin ky, M12 = cos kx sin ky, M22 = cos kx cos ky,
// M33 = sin kx cos ky. Every entry satisfies Lap M = -2 k^2 M and
// lambda_min(B) >= 1 - 2 beta |g|. The forcing of both equations is
// evaluated analytically and injected pointwise.

#include <cmath>
#include <numbers>
#include <vector>

#include "viscoflow/stepper.hpp"

namespace viscoflow {

struct MmsSolution {
  double beta = 0.25;
  bool stationary = true;  // g = 1, otherwise g = cos t
  ModelParams params;

  static constexpr double k = 2.0 * std::numbers::pi;

  double g(double t) const { return stationary ? 1.0 : std::cos(t); }
  double dg(double t) const { return stationary ? 0.0 : -std::sin(t); }

  Vec3 velocity(double x, double y, double t) const {
    return {g(t) * std::sin(k * x) * std::cos(k * y), -g(t) * std::cos(k * x) * std::sin(k * y), 0.0};
  }
  /// Analytic velocity gradient, G(d, e) = d v_d / d x_e.
  Mat3 velocity_gradient(double x, double y, double t) const {
    Mat3 gr{};
    const double sx = std::sin(k * x), cx = std::cos(k * x), sy = std::sin(k * y), cy = std::cos(k * y);
    gr(0, 0) = g(t) * k * cx * cy;
    gr(0, 1) = -g(t) * k * sx * sy;
    gr(1, 0) = g(t) * k * sx * sy;
    gr(1, 1) = -g(t) * k * cx * cy;
    return gr;
  }

  static SymTensor3 m(double x, double y) {
    const double sx = std::sin(k * x), cx = std::cos(k * x), sy = std::sin(k * y), cy = std::cos(k * y);
    return {{sx * sy, cx * cy, sx * cy, cx * sy, 0.0, 0.0}};
  }
  static SymTensor3 m_x(double x, double y) {
    const double sx = std::sin(k * x), cx = std::cos(k * x), sy = std::sin(k * y), cy = std::cos(k * y);
    return {{k * cx * sy, -k * sx * cy, k * cx * cy, -k * sx * sy, 0.0, 0.0}};
  }
  static SymTensor3 m_y(double x, double y) {
    const double sx = std::sin(k * x), cx = std::cos(k * x), sy = std::sin(k * y), cy = std::cos(k * y);
    return {{k * sx * cy, -k * cx * sy, -k * sx * sy, k * cx * cy, 0.0, 0.0}};
  }

  SymTensor3 conformation(double x, double y, double t) const {
    return SymTensor3::identity() + (beta * g(t)) * m(x, y);
  }

  /// f_v = dv/dt + (v.grad)v - nu Lap v - div(2 a mu S(B)).
  Vec3 velocity_force(double x, double y, double t) const {
    const ModelParams& p = params;
    const double sx = std::sin(k * x), cx = std::cos(k * x), sy = std::sin(k * y), cy = std::cos(k * y);
    const Vec3 shape{sx * cy, -cx * sy, 0.0};
    const double gt = g(t);
    // S = beta g M + gamma beta^2 g^2 M^2, differentiated by the product rule
    const double bh = beta * gt;
    const Mat3 mm = m(x, y).full(), mx = m_x(x, y).full(), my = m_y(x, y).full();
    const Mat3 sxd = bh * mx + (p.gamma * bh * bh) * (mx * mm + mm * mx);
    const Mat3 syd = bh * my + (p.gamma * bh * bh) * (my * mm + mm * my);
    Vec3 f{};
    for (int i = 0; i < 2; ++i) {
      const double div_s = sxd(i, 0) + syd(i, 1);
      f[i] = dg(t) * shape[i] + 2.0 * p.nu * k * k * gt * shape[i] - 2.0 * p.a * p.mu * div_s;
    }
    f[0] += gt * gt * 0.5 * k * std::sin(2 * k * x);
    f[1] += gt * gt * 0.5 * k * std::sin(2 * k * y);
    f[2] = -2.0 * p.a * p.mu * (sxd(2, 0) + syd(2, 1));
    return f;
  }

  /// f_B = dB/dt + (v.grad)B - (objective source - R(B)) - lambda Lap B.
  SymTensor3 tensor_force(double x, double y, double t) const {
    const ModelParams& p = params;
    const Vec3 v = velocity(x, y, t);
    const SymTensor3 b = conformation(x, y, t);
    const SymTensor3 mm = m(x, y);
    SymTensor3 f = (beta * dg(t)) * mm + (beta * g(t)) * (v[0] * m_x(x, y) + v[1] * m_y(x, y));
    f -= objective_source(b, velocity_gradient(x, y, t), p.a) - relax_R(b, p);
    f += (2.0 * p.lambda_diff * k * k * beta * g(t)) * mm;
    return f;
  }

  VelocityField sample_velocity(const Grid& grid, double t) const {
    VelocityField v(grid);
    for (int d = 0; d < 2; ++d)
      for (std::size_t id = 0; id < grid.cells(); ++id) {
        const Vec3 x = grid.face_center(d, grid.coords(id));
        v.c[d][id] = velocity(x[0], x[1], t)[d];
      }
    return v;
  }
  TensorField sample_conformation(const Grid& grid, double t) const {
    TensorField b(grid.cells());
    for (std::size_t id = 0; id < grid.cells(); ++id) {
      const Vec3 x = grid.cell_center(grid.coords(id));
      b[id] = conformation(x[0], x[1], t);
    }
    return b;
  }

  Forcing forcing() const {
    Forcing f;
    f.velocity = [this](double t, const Grid& grid, VelocityField& out) {
      for (int d = 0; d < 3; ++d)
        for (std::size_t id = 0; id < grid.cells(); ++id) {
          const Vec3 x = grid.face_center(d, grid.coords(id));
          out.c[d][id] = velocity_force(x[0], x[1], t)[d];
        }
    };
    f.tensor = [this](double t, const Grid& grid, TensorField& out) {
      for (std::size_t id = 0; id < grid.cells(); ++id) {
        const Vec3 x = grid.cell_center(grid.coords(id));
        out[id] = tensor_force(x[0], x[1], t);
      }
    };
    return f;
  }
};

inline Grid mms_grid(int n) {
  Grid g;
  g.n = {n, n, 1};
  g.h = {1.0 / n, 1.0 / n, 1.0 / n};
  for (auto& f : g.bc) f = {Bc::periodic, Bc::periodic};
  return g;
}

/// Discrete L2 norms of velocity and conformation differences.
inline double l2_velocity(const VelocityField& a, const VelocityField& b, const Grid& g) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < g.cells(); ++i) s += (a.c[d][i] - b.c[d][i]) * (a.c[d][i] - b.c[d][i]);
  return std::sqrt(s * g.cell_volume());
}
inline double l2_tensor(const TensorField& a, const TensorField& b, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) s += norm2(a[i] - b[i]);
  return std::sqrt(s * g.cell_volume());
}

struct MmsLevel {
  int n = 0;
  double h = 0.0;
  double dt = 0.0;
  double err_v = 0.0;
  double err_b = 0.0;
};

struct MmsTemporal {
  double dt = 0.0;
  double diff_v = 0.0;  // |u_dt - u_dt/2|
  double diff_b = 0.0;
};

struct MmsReport {
  std::vector<MmsLevel> spatial;
  std::vector<double> order_v, order_b;
  std::vector<MmsTemporal> temporal;
  std::vector<double> temporal_order_v, temporal_order_b;
  double one_step_err[2] = {0.0, 0.0};  // errors after one step from the exact state, dt and dt/2

  double min_spatial_order() const {
    double m = 1e300;
    for (double o : order_v) m = std::min(m, o);
    for (double o : order_b) m = std::min(m, o);
    return m;
  }
  double min_temporal_order() const {
    double m = 1e300;
    for (double o : temporal_order_v) m = std::min(m, o);
    for (double o : temporal_order_b) m = std::min(m, o);
    return m;
  }
};

struct MmsSettings {
  int n0 = 16;
  int levels = 3;
  double beta = 0.25;
  double t_end = 1.5;
  double cfl = 0.4;
  int temporal_n = 32;
  double temporal_t_end = 0.25;
  double temporal_dt = 0.005;
  int temporal_levels = 4;
};

/// Spatial ladder with the stationary pair, dt ladder with the time-dependent
/// pair (self-convergence at fixed h), and the single-step consistency check.
inline MmsReport verify_mms(const MmsSettings& o, const ModelParams& p) {
  MmsReport rep;
  MmsSolution sol;
  sol.beta = o.beta;
  sol.params = p;

  for (int l = 0; l < o.levels; ++l) {
    const int n = o.n0 << l;
    const Grid g = mms_grid(n);
    SimState s = init_state(sol.sample_velocity(g, 0.0), sol.sample_conformation(g, 0.0), p, g);
    Stepper st(g, p);
    MmsLevel lev;
    lev.n = n;
    lev.h = g.h[0];
    lev.dt = o.cfl * g.h[0];
    run(st, s, o.t_end, lev.dt, {}, sol.forcing());
    lev.err_v = l2_velocity(s.v, sol.sample_velocity(g, s.t), g);
    lev.err_b = l2_tensor(s.B, sol.sample_conformation(g, s.t), g);
    rep.spatial.push_back(lev);
  }
  for (std::size_t l = 1; l < rep.spatial.size(); ++l) {
    rep.order_v.push_back(std::log2(rep.spatial[l - 1].err_v / rep.spatial[l].err_v));
    rep.order_b.push_back(std::log2(rep.spatial[l - 1].err_b / rep.spatial[l].err_b));
  }

  MmsSolution unsteady = sol;
  unsteady.stationary = false;
  const Grid g = mms_grid(o.temporal_n);
  std::vector<SimState> finals;
  for (int l = 0; l < o.temporal_levels; ++l) {
    const double dt = o.temporal_dt / (1 << l);
    SimState s = init_state(unsteady.sample_velocity(g, 0.0), unsteady.sample_conformation(g, 0.0), p, g);
    Stepper st(g, p);
    run(st, s, o.temporal_t_end, dt, {}, unsteady.forcing());
    finals.push_back(std::move(s));
  }
  for (int l = 0; l + 1 < o.temporal_levels; ++l)
    rep.temporal.push_back({o.temporal_dt / (1 << l), l2_velocity(finals[l].v, finals[l + 1].v, g),
                            l2_tensor(finals[l].B, finals[l + 1].B, g)});
  for (std::size_t l = 1; l < rep.temporal.size(); ++l) {
    rep.temporal_order_v.push_back(std::log2(rep.temporal[l - 1].diff_v / rep.temporal[l].diff_v));
    rep.temporal_order_b.push_back(std::log2(rep.temporal[l - 1].diff_b / rep.temporal[l].diff_b));
  }

  for (int l = 0; l < 2; ++l) {
    const double dt = o.temporal_dt / (1 << l);
    SimState s = init_state(unsteady.sample_velocity(g, 0.0), unsteady.sample_conformation(g, 0.0), p, g);
    Stepper st(g, p);
    st.step(s, dt, unsteady.forcing());
    rep.one_step_err[l] = l2_velocity(s.v, unsteady.sample_velocity(g, dt), g) +
                          l2_tensor(s.B, unsteady.sample_conformation(g, dt), g);
  }
  return rep;
}

}  // namespace viscoflow
