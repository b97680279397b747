#pragma once

// Discrete energy budget of a state: kinetic and free energy, every
// dissipation channel, external work, and the running budget residual.
//
// Each dissipation term is the exact discrete counterpart of the operator the
// stepper applies: the viscous and slip terms pair the staggered velocity with
// its Laplacian, the diffusion terms pair face differences of B and B^-1, so
// that the budget residual of a run measures only the time discretization.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "viscoflow/constitutive.hpp"
#include "viscoflow/operators.hpp"
#include "viscoflow/stepper.hpp"

namespace viscoflow {

struct EnergyBudget {
  double t = 0.0;
  double kinetic = 0.0;
  double free_energy = 0.0;
  double viscous_diss = 0.0;
  double slip_diss = 0.0;
  double diff_diss_gamma = 0.0;
  double diff_diss_inv = 0.0;
  double relax_diss_1 = 0.0;
  double relax_diss_2 = 0.0;
  double relax_diss_3 = 0.0;
  double work = 0.0;
  double residual = 0.0;
  double residual_positive = 0.0;

  double energy() const { return kinetic + free_energy; }
  double dissipation() const {
    return viscous_diss + slip_diss + diff_diss_gamma + diff_diss_inv + relax_diss_1 + relax_diss_2 + relax_diss_3;
  }
};

/// Budget of the state s. `force` holds face values of the body force (may be
/// null). Throws SingularMatrix if B is not positive definite somewhere.
inline EnergyBudget compute_budget(const SimState& s, const VelocityField* force = nullptr) {
  const Grid& g = s.grid;
  const ModelParams& p = s.params;
  const double vol = g.cell_volume();
  const std::size_t n = g.cells();
  const FaceLookup look(g, p.nu, p.sigma);
  EnergyBudget b;
  b.t = s.t;

  // kinetic energy, viscous and wall terms
  double kin = 0.0, visc = 0.0, slip = 0.0, work = 0.0;
  for (int d = 0; d < 3; ++d) {
    const auto& u = s.v.c[d];
    kin += parallel_sum(n, [&](std::size_t i) { return u[i] * u[i]; });
    for (int e = 0; e < 3; ++e) {
      if (g.n[e] == 1) continue;
      const double w = 1.0 / (g.h[e] * g.h[e]);
      visc += w * parallel_sum(n, [&](std::size_t id) {
        Index3 q = g.coords(id);
        ++q[e];
        if (q[e] == g.n[e] && e != d && g.wall(e)) return 0.0;  // wall handled below
        const double du = look(d, q, true).value(u) - u[id];
        return du * du;
      });
      if (e == d || g.periodic(e)) continue;
      for (int side = 0; side < 2; ++side) {
        const int layer = side == 0 ? 0 : g.n[e] - 1;
        const double wall_u = g.wall_velocity[e][side][d];
        const Bc tag = g.bc[e][side];
        const double r = p.sigma * g.h[e] / (2.0 * p.nu);
        const auto sums = parallel_reduce(
            n, std::array<double, 2>{0.0, 0.0},
            [&](std::size_t id) {
              const Index3 f = g.coords(id);
              if (f[e] != layer || !active_face(g, d, f)) return std::array<double, 2>{0.0, 0.0};
              const double rel = u[id] - wall_u;
              return std::array<double, 2>{rel * rel, wall_u * rel};
            },
            [](std::array<double, 2> a, const std::array<double, 2>& x) {
              a[0] += x[0];
              a[1] += x[1];
              return a;
            });
        if (tag == Bc::no_slip) {
          visc += 2.0 * w * sums[0];
          work -= 2.0 * p.nu * w * sums[1] * vol;
        } else {
          slip += p.sigma / (1.0 + r) / g.h[e] * sums[0];
          work -= p.sigma / (1.0 + r) / g.h[e] * sums[1] * vol;
        }
      }
    }
    if (force && !force->c[d].empty())
      work += vol * parallel_sum(n, [&](std::size_t i) { return force->c[d][i] * u[i]; });
  }
  b.kinetic = 0.5 * kin * vol;
  b.viscous_diss = p.nu * visc * vol;
  b.slip_diss = slip * vol;

  // elastic power delivered by moving walls through the stress coupling
  bool moving = false;
  for (const auto& face : g.wall_velocity)
    for (const Vec3& u : face) moving = moving || u[0] != 0.0 || u[1] != 0.0 || u[2] != 0.0;
  std::vector<double> rho(n);
  parallel_for(n, [&](std::size_t c) { rho[c] = cutoff_rho(s.B[c], p.eps); });
  if (moving) {
    const GradientField gu = wall_gradient(g, p);
    work += vol * parallel_sum(n, [&](std::size_t c) {
              return 2.0 * p.a * p.mu * rho[c] * frob(stress_S(s.B[c], p), SymTensor3::sym_part(gu[c]));
            });
  }
  b.work = work;

  // free energy and relaxation
  std::vector<SymTensor3> b_inv(n);
  const auto cell = parallel_reduce(
      n, std::array<double, 4>{},
      [&](std::size_t c) {
        b_inv[c] = inv(s.B[c]);
        const auto l = eigenvalues_sym3(s.B[c]);
        const EntropyTerms t = relaxation_dissipation(l, p);
        return std::array<double, 4>{free_energy(s.B[c], p), rho[c] * t.relax_1, rho[c] * t.relax_2, rho[c] * t.relax_3};
      },
      [](std::array<double, 4> a, const std::array<double, 4>& x) {
        for (int k = 0; k < 4; ++k) a[k] += x[k];
        return a;
      });
  b.free_energy = cell[0] * vol;
  b.relax_diss_1 = cell[1] * vol;
  b.relax_diss_2 = cell[2] * vol;
  b.relax_diss_3 = cell[3] * vol;

  // stress diffusion through interior (and periodic) cell faces
  double dg = 0.0, di = 0.0;
  for (int e = 0; e < 3; ++e) {
    if (g.n[e] == 1) continue;
    const double w = 1.0 / (g.h[e] * g.h[e]);
    const auto sums = parallel_reduce(
        n, std::array<double, 2>{},
        [&](std::size_t c) {
          const Index3 ci = g.coords(c);
          if (ci[e] + 1 == g.n[e] && g.wall(e)) return std::array<double, 2>{0.0, 0.0};
          const std::size_t q = neighbor_cell(g, c, e, 1);
          const SymTensor3 db = s.B[q] - s.B[c];
          return std::array<double, 2>{norm2(db), -frob(db, b_inv[q] - b_inv[c])};
        },
        [](std::array<double, 2> a, const std::array<double, 2>& x) {
          a[0] += x[0];
          a[1] += x[1];
          return a;
        });
    dg += w * sums[0];
    di += w * sums[1];
  }
  b.diff_diss_gamma = p.mu * p.lambda_diff * p.gamma * dg * vol;
  b.diff_diss_inv = p.mu * p.lambda_diff * (1.0 - p.gamma) * di * vol;
  return b;
}

/// residual_n = E_n - E_0 + sum_{m=1..n} dt_m (dissipation_m - work_m), with
/// dt_m = t_m - t_{m-1}. Fills `residual` and `residual_positive` in place.
inline void budget_residual(std::vector<EnergyBudget>& history) {
  if (history.size() < 2) return;
  double acc = 0.0;
  history[0].residual = history[0].residual_positive = 0.0;
  for (std::size_t m = 1; m < history.size(); ++m) {
    const double dt = history[m].t - history[m - 1].t;
    acc += dt * (history[m].dissipation() - history[m].work);
    history[m].residual = history[m].energy() - history[0].energy() + acc;
    history[m].residual_positive = std::max(0.0, history[m].residual);
  }
}

/// Same with a uniform step size.
inline std::vector<double> budget_residual(const std::vector<EnergyBudget>& history, double dt) {
  std::vector<double> out(history.size(), 0.0);
  double acc = 0.0;
  for (std::size_t m = 1; m < history.size(); ++m) {
    acc += dt * (history[m].dissipation() - history[m].work);
    out[m] = history[m].energy() - history[0].energy() + acc;
  }
  return out;
}

struct PositivityReport {
  double min_lambda = 0.0;
  std::size_t argmin = 0;
  double min_det = 0.0;
  /// Counts of lambda_min per decade: bin k holds 10^(k-9) <= lambda < 10^(k-8);
  /// bin 0 also collects everything below 1e-8 (including nonpositive values)
  /// and the last bin everything from 1e3 up.
  std::array<std::size_t, 12> histogram{};
  /// lambda_min >= eps - 1e-10 (always true when eps = 0).
  bool floor_satisfied = true;
};

inline PositivityReport positivity_report(const TensorField& b, double eps = 0.0) {
  PositivityReport r;
  const PositivityStats st = positivity_stats(b);
  r.min_lambda = st.min_lambda;
  r.argmin = st.argmin;
  r.min_det = st.min_det;
  for (const SymTensor3& t : b) {
    const double l = lambda_min(t);
    int k = l > 0.0 ? static_cast<int>(std::floor(std::log10(l))) + 9 : 0;
    k = std::clamp(k, 0, 11);
    ++r.histogram[k];
  }
  r.floor_satisfied = eps <= 0.0 || st.min_lambda >= eps - 1e-10;
  return r;
}

/// |sum_faces phi . (dv/dt + (v.grad)v - div tau - nu Lap v - f) h^3| for two
/// consecutive states, with the time levels the stepper uses: explicit terms
/// at `prev`, viscous term at `cur`. phi must be divergence-free and vanish on
/// wall faces.
inline double weak_residual(const SimState& prev, const SimState& cur, const VelocityField& phi,
                            const VelocityField* force = nullptr) {
  const Grid& g = cur.grid;
  const ModelParams& p = cur.params;
  for (int d = 0; d < 3; ++d)
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const double x = phi.c[d][id];
      if (!std::isfinite(x)) throw InvalidTestField("test velocity is not finite");
      if (!active_face(g, d, g.coords(id)) && std::abs(x) > 1e-8)
        throw InvalidTestField("test velocity has a normal component on a wall");
    }
  for (double dv : divergence(phi, g))
    if (std::abs(dv) > 1e-8) throw InvalidTestField("test velocity is not divergence-free");
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) throw ValidationError("dt", "states must be ordered in time");
  const FaceLookup look(g, p.nu, p.sigma);
  ScalarField rho(g.cells());
  for (std::size_t c = 0; c < g.cells(); ++c) rho[c] = cutoff_rho(prev.B[c], p.eps);
  TensorField tau(g.cells());
  for (std::size_t c = 0; c < g.cells(); ++c) tau[c] = 2.0 * p.a * p.mu * rho[c] * stress_S(prev.B[c], p);
  const VelocityField el = stress_divergence(tau, g, look);
  const VelocityField adv = advect_velocity(prev.v, g, look);
  const VelocityField lap = laplacian_velocity(cur.v, g, look, false);
  double s = 0.0;
  for (int d = 0; d < 3; ++d)
    for (std::size_t id = 0; id < g.cells(); ++id) {
      if (!active_face(g, d, g.coords(id))) continue;
      double r = (cur.v.c[d][id] - prev.v.c[d][id]) / dt + adv.c[d][id] - el.c[d][id] - p.nu * lap.c[d][id];
      if (force && !force->c[d].empty()) r -= force->c[d][id];
      s += phi.c[d][id] * r;
    }
  return std::abs(s * g.cell_volume());
}

/// Tensor counterpart: |sum_cells A : (dB/dt + (v.grad)B - sources - lambda Lap B - f_B) h^3|
/// with transport and sources at `prev` and diffusion at `cur`.
inline double weak_residual(const SimState& prev, const SimState& cur, const TensorField& test,
                            const TensorField* force = nullptr) {
  const Grid& g = cur.grid;
  const ModelParams& p = cur.params;
  for (const SymTensor3& a : test)
    for (double x : a.c)
      if (!std::isfinite(x)) throw InvalidTestField("test tensor is not finite");
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) throw ValidationError("dt", "states must be ordered in time");
  const GradientField gr = grad_velocity(prev.v, g, p);
  const TensorField adv = advect_tensor(prev.v, prev.B, g);
  const TensorField lap = laplacian_tensor(cur.B, g);
  double s = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    SymTensor3 r = (cur.B[c] - prev.B[c]) * (1.0 / dt) + adv[c] -
                   b_source(prev.B[c], gr[c], p, cutoff_rho(prev.B[c], p.eps)) - p.lambda_diff * lap[c];
    if (force && !force->empty()) r -= (*force)[c];
    s += frob(test[c], r);
  }
  return std::abs(s * g.cell_volume());
}

}  // namespace viscoflow
