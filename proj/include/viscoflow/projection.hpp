#pragma once

// Discrete Helmholtz projection onto divergence-free staggered fields.

#include <utility>

#include "viscoflow/fft_solver.hpp"
#include "viscoflow/operators.hpp"

namespace viscoflow {

struct Projection {
  VelocityField v;
  ScalarField p;
  int sweeps = 0;
};

/// v = v* - dt grad p with div v = 0; p has zero mean. Wall faces keep v.n = 0.
inline Projection pressure_project(const VelocityField& v_star, const Grid& g, double dt,
                                   const SpectralSolver& solver) {
  Projection out{v_star, ScalarField(g.cells(), 0.0), 0};
  const ScalarField div = divergence(v_star, g);
  ScalarField phi;
  out.sweeps = solver.solve(div, phi, 0.0, -1.0);
  bool any = false;
  for (double x : phi) any = any || x != 0.0;
  if (!any) return out;
  for (int d = 0; d < 3; ++d)
    parallel_for(g.cells(), [&](std::size_t id) {
      const Index3 f = g.coords(id);
      if (!active_face(g, d, f)) return;
      const std::size_t lo = neighbor_cell(g, id, d, -1);
      out.v.c[d][id] -= (phi[id] - phi[lo]) / g.h[d];
    });
  for (std::size_t i = 0; i < phi.size(); ++i) out.p[i] = phi[i] / dt;
  return out;
}

inline Projection pressure_project(const VelocityField& v_star, const Grid& g, double dt) {
  const SpectralSolver solver(g);
  return pressure_project(v_star, g, dt, solver);
}

}  // namespace viscoflow
