#pragma once

// Semi-implicit, first-order, operator-split time stepping of the coupled
// velocity / conformation system.

#include <chrono>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "viscoflow/constitutive.hpp"
#include "viscoflow/fft_solver.hpp"
#include "viscoflow/krylov.hpp"
#include "viscoflow/operators.hpp"
#include "viscoflow/projection.hpp"

namespace viscoflow {

struct SimState {
  Grid grid;
  ModelParams params;
  double t = 0.0;
  long step = 0;
  VelocityField v;
  TensorField B;
  ScalarField p;
};

struct StepReport {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double cfl = 0.0;
  int poisson_sweeps = 0;
  int viscous_iterations = 0;
  double min_lambda = 0.0;
  std::size_t argmin_cell = 0;
  double min_det = 0.0;
  double max_norm = 0.0;
  double wall_seconds = 0.0;
};

/// Body forces: `velocity` fills face values of f at time t, `tensor` fills a
/// cell source added to the right side of the B equation. Either may be empty.
struct Forcing {
  std::function<void(double t, const Grid&, VelocityField&)> velocity;
  std::function<void(double t, const Grid&, TensorField&)> tensor;
};

/// Minimal eigenvalue statistics of a tensor field.
struct PositivityStats {
  double min_lambda = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  double min_det = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
};

inline PositivityStats positivity_stats(const TensorField& b) {
  return parallel_reduce(
      b.size(), PositivityStats{},
      [&](std::size_t c) {
        PositivityStats s;
        s.min_lambda = lambda_min(b[c]);
        s.argmin = c;
        s.min_det = b[c].det();
        s.max_norm = norm(b[c]);
        return s;
      },
      [](PositivityStats a, const PositivityStats& x) {
        if (x.min_lambda < a.min_lambda) {
          a.min_lambda = x.min_lambda;
          a.argmin = x.argmin;
        }
        a.min_det = std::min(a.min_det, x.min_det);
        a.max_norm = std::max(a.max_norm, x.max_norm);
        return a;
      });
}

/// B0^eps: cells whose minimal eigenvalue is <= eps are replaced by I.
inline TensorField regularize_initial_B(const TensorField& b0, double eps) {
  TensorField out = b0;
  parallel_for(out.size(), [&](std::size_t c) {
    if (lambda_min(out[c]) <= eps) out[c] = SymTensor3::identity();
  });
  return out;
}

inline double cfl_number(const VelocityField& v, const Grid& g, double dt) {
  double cfl = 0.0;
  for (int d = 0; d < 3; ++d) {
    double m = 0.0;
    for (double x : v.c[d]) m = std::max(m, std::abs(x));
    cfl = std::max(cfl, m * dt / g.h[d]);
  }
  return cfl;
}

/// Builds the initial state: projects v0 onto discretely divergence-free
/// fields and checks (or, with eps > 0, regularizes) B0.
inline SimState init_state(const VelocityField& v0, const TensorField& b0, const ModelParams& p, const Grid& g) {
  g.validate();
  p.validate();
  SimState s;
  s.grid = g;
  s.params = p;
  TensorField b = b0;
  if (p.eps > 0.0) {
    b = regularize_initial_B(b0, p.eps);
  } else {
    const PositivityStats st = positivity_stats(b0);
    if (!(st.min_lambda > 0.0))
      throw InadmissibleInitialData(
          "initial conformation tensor is not positive definite, lambda_min = " + std::to_string(st.min_lambda),
          static_cast<long>(st.argmin));
  }
  s.B = std::move(b);
  const Projection pr = pressure_project(v0, g, 1.0);
  s.v = pr.v;
  s.p.assign(g.cells(), 0.0);
  return s;
}

struct StepperOptions {
  double cfl_max = 0.5;
  double viscous_tol = 1e-12;
  int viscous_max_iter = 5000;
};

/// Cell-local right side of the B equation without transport and diffusion:
/// rho_eps(B) (a(DB + BD) + WB - BW - R(B)).
inline SymTensor3 b_source(const SymTensor3& b, const Mat3& grad, const ModelParams& p, double rho) {
  if (rho == 0.0) return SymTensor3::zero();
  return rho * (objective_source(b, grad, p.a) - relax_R(b, p));
}

class Stepper {
 public:
  Stepper(const Grid& g, const ModelParams& p, StepperOptions opt = {})
      : g_(g), p_(p), opt_(opt), look_(g_, p.nu, p.sigma), solver_(g_) {
    g_.validate();
    p_.validate();
    for (int d = 0; d < 3; ++d) viscous_stencil_[d] = build_stencil(d);
  }
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  const Grid& grid() const { return g_; }
  const ModelParams& params() const { return p_; }
  const FaceLookup& lookup() const { return look_; }
  const SpectralSolver& solver() const { return solver_; }
  void set_options(const StepperOptions& o) { opt_ = o; }

  /// Cut-off factor per cell.
  ScalarField cutoff_field(const TensorField& b) const {
    ScalarField rho(b.size());
    parallel_for(b.size(), [&](std::size_t c) { rho[c] = cutoff_rho(b[c], p_.eps); });
    return rho;
  }

  /// Cell sources of the B equation for the current state.
  TensorField b_sources(const SimState& s) const {
    const GradientField gr = grad_velocity(s.v, g_, p_);
    const ScalarField rho = cutoff_field(s.B);
    TensorField out(g_.cells());
    parallel_for(g_.cells(), [&](std::size_t c) { out[c] = b_source(s.B[c], gr[c], p_, rho[c]); });
    return out;
  }

  /// Elastic stress 2 a mu rho_eps(B) S(B) per cell.
  TensorField elastic_stress(const TensorField& b, const ScalarField& rho) const {
    TensorField tau(g_.cells());
    const double k = 2.0 * p_.a * p_.mu;
    parallel_for(g_.cells(), [&](std::size_t c) {
      tau[c] = rho[c] == 0.0 ? SymTensor3::zero() : (k * rho[c]) * stress_S(b[c], p_);
    });
    return tau;
  }

  /// Advances s by dt. On error s is left unchanged.
  StepReport step(SimState& s, double dt, const Forcing& f = {}) const {
    const auto start = std::chrono::steady_clock::now();
    if (!(dt > 0.0)) throw ValidationError("dt", "must be positive");
    StepReport rep;
    rep.dt = dt;
    rep.cfl = cfl_number(s.v, g_, dt);
    if (rep.cfl > opt_.cfl_max)
      throw CFLViolation("CFL number " + std::to_string(rep.cfl) + " exceeds " + std::to_string(opt_.cfl_max),
                         rep.cfl);
    const std::size_t n = g_.cells();

    // conformation tensor
    const GradientField gr = grad_velocity(s.v, g_, p_);
    const ScalarField rho = cutoff_field(s.B);
    const TensorField adv_b = advect_tensor(s.v, s.B, g_);
    TensorField fb;
    if (f.tensor) {
      fb.assign(n, SymTensor3::zero());
      f.tensor(s.t, g_, fb);
    }
    TensorField b_new(n);
    parallel_for(n, [&](std::size_t c) {
      SymTensor3 rhs = b_source(s.B[c], gr[c], p_, rho[c]) - adv_b[c];
      if (!fb.empty()) rhs += fb[c];
      b_new[c] = s.B[c] + dt * rhs;
    });
    diffuse(b_new, dt);

    // velocity
    const TensorField tau = elastic_stress(s.B, rho);
    const VelocityField force = stress_divergence(tau, g_, look_);
    const VelocityField adv_v = advect_velocity(s.v, g_, look_);
    VelocityField fv;
    if (f.velocity) {
      fv = VelocityField(g_);
      f.velocity(s.t, g_, fv);
    }
    VelocityField v_star(g_);
    for (int d = 0; d < 3; ++d)
      parallel_for(n, [&](std::size_t id) {
        if (!active_face(g_, d, g_.coords(id))) return;
        double rhs = force.c[d][id] - adv_v.c[d][id];
        if (!fv.c[d].empty()) rhs += fv.c[d][id];
        v_star.c[d][id] = s.v.c[d][id] + dt * rhs;
      });
    rep.viscous_iterations = viscous_solve(v_star, dt);
    Projection pr = pressure_project(v_star, g_, dt, solver_);
    rep.poisson_sweeps = pr.sweeps;

    const PositivityStats st = positivity_stats(b_new);
    rep.min_lambda = st.min_lambda;
    rep.argmin_cell = st.argmin;
    rep.min_det = st.min_det;
    rep.max_norm = st.max_norm;
    if (!(st.min_lambda > 0.0) || !std::isfinite(st.max_norm))
      throw PositivityLoss("conformation tensor lost positive definiteness, lambda_min = " +
                               std::to_string(st.min_lambda) + " at cell " + std::to_string(st.argmin),
                           static_cast<long>(st.argmin), st.min_lambda);

    s.B = std::move(b_new);
    s.v = std::move(pr.v);
    s.p = std::move(pr.p);
    s.t += dt;
    ++s.step;
    rep.step = s.step;
    rep.t = s.t;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }

  /// Implicit stress diffusion (I - dt lambda Laplacian) B_new = B, in increment form.
  void diffuse(TensorField& b, double dt) const {
    const double k = dt * p_.lambda_diff;
    const TensorField lap = laplacian_tensor(b, g_);
    ScalarField rhs(g_.cells()), x;
    for (int comp = 0; comp < 6; ++comp) {
      for (std::size_t c = 0; c < rhs.size(); ++c) rhs[c] = k * lap[c].c[comp];
      solver_.solve(rhs, x, 1.0, k);
      for (std::size_t c = 0; c < rhs.size(); ++c) b[c].c[comp] += x[c];
    }
  }

  /// Implicit viscous solve (I - dt nu Laplacian) v_new = v in increment form.
  int viscous_solve(VelocityField& v, double dt) const {
    const double k = dt * p_.nu;
    const VelocityField lap = laplacian_velocity(v, g_, look_, false);
    int iters = 0;
    for (int d = 0; d < 3; ++d) {
      std::vector<double> rhs(g_.cells());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = k * lap.c[d][i];
      std::vector<double> x(g_.cells(), 0.0);
      std::vector<double> diag(g_.cells());
      for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = 1.0 - k * viscous_stencil_[d].self[i];
      auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        laplacian_component(d, in, out);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - k * out[i];
      };
      const CgResult r = conjugate_gradient(apply, diag, rhs, x, opt_.viscous_tol, opt_.viscous_max_iter);
      iters += r.iterations;
      for (std::size_t i = 0; i < x.size(); ++i) v.c[d][i] += x[i];
    }
    return iters;
  }

  /// Homogeneous velocity Laplacian of one component (pinned faces map to 0).
  void laplacian_component(int d, const std::vector<double>& u, std::vector<double>& out) const {
    out.assign(u.size(), 0.0);
    const Stencil& st = viscous_stencil_[d];
    parallel_for(g_.cells(), [&](std::size_t id) {
      if (st.self[id] == 0.0) return;
      double s = st.self[id] * u[id];
      for (int k = 0; k < 6; ++k) {
        const std::size_t j = st.idx[6 * id + k];
        if (j != FaceRef::npos) s += st.coeff[6 * id + k] * u[j];
      }
      out[id] = s;
    });
  }

 private:
  // Seven-point stencil of the homogeneous velocity Laplacian; neighbor
  // entries that fold back onto the face itself are merged into `self`.
  struct Stencil {
    std::vector<double> self;
    std::vector<std::size_t> idx;
    std::vector<double> coeff;
  };

  Stencil build_stencil(int d) const {
    Stencil st;
    const std::size_t n = g_.cells();
    st.self.assign(n, 0.0);
    st.idx.assign(6 * n, FaceRef::npos);
    st.coeff.assign(6 * n, 0.0);
    for (std::size_t id = 0; id < n; ++id) {
      const Index3 f = g_.coords(id);
      if (!active_face(g_, d, f)) continue;
      double self = 0.0;
      for (int e = 0; e < 3; ++e) {
        if (g_.n[e] == 1) continue;
        const double w = 1.0 / (g_.h[e] * g_.h[e]);
        self -= 2.0 * w;
        for (int side = 0; side < 2; ++side) {
          Index3 q = f;
          q[e] += side == 0 ? -1 : 1;
          const FaceRef r = look_(d, q, true);
          if (r.idx == FaceRef::npos) continue;
          if (r.idx == id) {
            self += r.coeff * w;
          } else {
            st.idx[6 * id + 2 * e + side] = r.idx;
            st.coeff[6 * id + 2 * e + side] = r.coeff * w;
          }
        }
      }
      st.self[id] = self;
    }
    return st;
  }

  Grid g_;
  ModelParams p_;
  StepperOptions opt_;
  FaceLookup look_;
  SpectralSolver solver_;
  std::array<Stencil, 3> viscous_stencil_;
};

/// Observer invoked after every successful step.
using Monitor = std::function<void(const SimState&, const StepReport&)>;

/// Steps s until t_end (the last step is shortened to land on t_end). On error
/// s holds the last valid state and the error carries the failing step index.
inline void run(const Stepper& stepper, SimState& s, double t_end, double dt, const Monitor& monitor = {},
                const Forcing& f = {}) {
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (s.t < t_end - tol) {
    const double h = std::min(dt, t_end - s.t);
    try {
      const StepReport rep = stepper.step(s, h, f);
      if (monitor) monitor(s, rep);
    } catch (Error& e) {
      e.set_step(s.step + 1);
      throw;
    }
  }
}

}  // namespace viscoflow
