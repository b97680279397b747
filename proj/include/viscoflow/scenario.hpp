#pragma once

// Built-in initial/boundary data: rest_state, taylor_green, lid_slip_cavity
// and shear_decay. Velocities are sampled at face centers and tensors at cell
// centers of the given grid.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "viscoflow/stepper.hpp"

namespace viscoflow {

struct ScenarioParams {
  std::string name = "rest_state";
  double amplitude = 1.0;      // velocity amplitude (taylor_green, shear_decay)
  double lid_velocity = 1.0;   // tangential speed of the upper y wall (lid_slip_cavity)
  double b0_amplitude = 0.25;  // conformation perturbation (shear_decay)
  double b0_dip = 0.0;         // if > 0: lambda_min of B0 is pulled toward this value near the center
  bool defect = false;         // if true: the center cell of B0 is diag(-1, 1, 1)
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"rest_state", "taylor_green", "lid_slip_cavity", "shear_decay"};
  return names;
}

struct Scenario {
  Grid grid;
  VelocityField v0;
  TensorField b0;
  Forcing forcing;
};

/// Boundary tags a scenario imposes on top of the configured grid.
inline Grid scenario_grid(const ScenarioParams& sp, Grid g) {
  g.wall_velocity = {};
  if (sp.name == "taylor_green") {
    for (auto& f : g.bc) f = {Bc::periodic, Bc::periodic};
  } else if (sp.name == "lid_slip_cavity") {
    for (int d = 0; d < 3; ++d)
      if (g.n[d] > 1) g.bc[d] = {Bc::navier_slip, Bc::navier_slip};
    g.wall_velocity[1][1] = {sp.lid_velocity, 0.0, 0.0};
  } else if (sp.name == "shear_decay") {
    g.bc[0] = {Bc::periodic, Bc::periodic};
    g.bc[1] = {Bc::navier_slip, Bc::navier_slip};
    g.bc[2] = {Bc::periodic, Bc::periodic};
  } else if (sp.name != "rest_state") {
    throw ValidationError("scenario.name", "unknown scenario '" + sp.name + "'");
  }
  return g;
}

/// Builds the scenario. The returned B0 is not checked here; init_state
/// rejects or regularizes inadmissible data.
inline Scenario make_scenario(const ScenarioParams& sp, const Grid& base) {
  constexpr double pi = std::numbers::pi;
  Scenario s;
  s.grid = scenario_grid(sp, base);
  const Grid& g = s.grid;
  s.v0 = VelocityField(g);
  s.b0 = make_tensor_field(g);
  const double lx = g.length(0), ly = g.length(1), lz = g.length(2);

  if (sp.name == "taylor_green") {
    const double kx = 2 * pi / lx, ky = 2 * pi / ly, kz = g.n[2] > 1 ? 2 * pi / lz : 0.0;
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Index3 c = g.coords(id);
      Vec3 x = g.face_center(0, c);
      s.v0.c[0][id] = sp.amplitude * std::sin(kx * x[0]) * std::cos(ky * x[1]) * std::cos(kz * x[2]);
      x = g.face_center(1, c);
      s.v0.c[1][id] = -sp.amplitude * std::cos(kx * x[0]) * std::sin(ky * x[1]) * std::cos(kz * x[2]);
    }
  } else if (sp.name == "shear_decay") {
    const SymTensor3 e{{1.0, -0.5, 0.25, 0.5, 0.0, 0.0}};
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Index3 c = g.coords(id);
      s.v0.c[0][id] = sp.amplitude * std::cos(pi * g.face_center(0, c)[1] / ly);
      s.b0[id] = SymTensor3::identity() + (sp.b0_amplitude * std::cos(pi * g.cell_center(c)[1] / ly)) * e;
    }
  }

  if (sp.b0_dip > 0.0) {
    // congruence B -> P B P with P = diag(sqrt(m), 1, 1) keeps symmetry and
    // definiteness; m dips to b0_dip at the domain center
    const double w = 0.15 * std::min({lx, ly, g.n[2] > 1 ? lz : lx});
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Vec3 x = g.cell_center(g.coords(id));
      double r2 = 0.0;
      for (int d = 0; d < 3; ++d)
        if (g.n[d] > 1) r2 += (x[d] - 0.5 * g.length(d)) * (x[d] - 0.5 * g.length(d));
      const double m = 1.0 - (1.0 - sp.b0_dip) * std::exp(-r2 / (w * w));
      const double q = std::sqrt(m);
      SymTensor3& b = s.b0[id];
      b.c[0] *= m;
      b.c[3] *= q;
      b.c[4] *= q;
    }
  }
  if (sp.defect) s.b0[g.idx(g.n[0] / 2, g.n[1] / 2, g.n[2] / 2)] = SymTensor3::diag(-1.0, 1.0, 1.0);
  return s;
}

}  // namespace viscoflow
