#pragma once

// Direct solvers for the cell-centered 7-point Laplacian with periodic or
// homogeneous-Neumann closure per axis. The operator is diagonalized by a
// separable real transform: a real DFT (halfcomplex) along periodic axes and
// a DCT-II along Neumann axes.

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "viscoflow/errors.hpp"
#include "viscoflow/grid.hpp"
#include "viscoflow/parallel.hpp"

namespace viscoflow {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Scalar 7-point Laplacian with the same closure as the transform solver.
inline ScalarField laplacian_scalar(const ScalarField& x, const Grid& g) {
  ScalarField out(g.cells());
  parallel_for(g.cells(), [&](std::size_t c) {
    double s = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double lo = x[neighbor_cell(g, c, d, -1)], hi = x[neighbor_cell(g, c, d, +1)];
      s += ((hi - x[c]) - (x[c] - lo)) / (g.h[d] * g.h[d]);
    }
    out[c] = s;
  });
  return out;
}

class SpectralSolver {
 public:
  explicit SpectralSolver(const Grid& g) : g_(g), eig_(g.cells()) {
    int dims[3] = {g.n[2], g.n[1], g.n[0]};
    fftw_r2r_kind fwd[3], bwd[3];
    norm_ = 1.0;
    std::array<std::vector<double>, 3> lam;
    for (int d = 0; d < 3; ++d) {
      const int n = g.n[d];
      lam[d].resize(n);
      const bool per = g.periodic(d);
      for (int k = 0; k < n; ++k) {
        const double theta = per ? 2.0 * std::numbers::pi * k / n : std::numbers::pi * k / n;
        lam[d][k] = (2.0 * std::cos(theta) - 2.0) / (g.h[d] * g.h[d]);
      }
      fwd[2 - d] = per ? FFTW_R2HC : FFTW_REDFT10;
      bwd[2 - d] = per ? FFTW_HC2R : FFTW_REDFT01;
      norm_ *= per ? n : 2 * n;
    }
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Index3 k = g.coords(id);
      eig_[id] = lam[0][k[0]] + lam[1][k[1]] + lam[2][k[2]];
    }
    std::vector<double> buf(g.cells());
    std::lock_guard lock(fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_r2r(3, dims, buf.data(), buf.data(), fwd, flags);
    backward_ = fftw_plan_r2r(3, dims, buf.data(), buf.data(), bwd, flags);
    if (!forward_ || !backward_) throw SolverDivergence("transform planning failed");
  }
  ~SpectralSolver() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  const Grid& grid() const { return g_; }

  /// Solves (shift I - scale L) x = rhs. With shift = 0 the constant mode is
  /// removed (zero-mean solution of the singular Poisson problem).
  /// Returns the number of refinement sweeps; throws SolverDivergence if the
  /// relative residual stays above `tol`.
  int solve(const ScalarField& rhs, ScalarField& x, double shift, double scale, double tol = 1e-10) const {
    x.assign(g_.cells(), 0.0);
    double rhs_norm = 0.0;
    for (double r : rhs) rhs_norm = std::max(rhs_norm, std::abs(r));
    if (rhs_norm == 0.0) return 0;
    ScalarField r = rhs;
    if (shift == 0.0) remove_mean(r);
    ScalarField dx;
    for (int sweep = 1; sweep <= 4; ++sweep) {
      apply_inverse(r, dx, shift, scale);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
      const ScalarField ax = apply(x, shift, scale);
      double res = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        r[i] = rhs[i] - ax[i];
        res = std::max(res, std::abs(r[i]));
      }
      if (shift == 0.0) {
        remove_mean(r);
        res = 0.0;
        for (double v : r) res = std::max(res, std::abs(v));
      }
      if (res <= tol * rhs_norm) return sweep;
    }
    throw SolverDivergence("spectral solve did not reach relative residual " + std::to_string(tol));
  }

  ScalarField apply(const ScalarField& x, double shift, double scale) const {
    ScalarField out = laplacian_scalar(x, g_);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = shift * x[i] - scale * out[i];
    return out;
  }

 private:
  static void remove_mean(ScalarField& r) {
    double m = 0.0;
    for (double v : r) m += v;
    m /= static_cast<double>(r.size());
    for (double& v : r) v -= m;
  }

  void apply_inverse(const ScalarField& rhs, ScalarField& out, double shift, double scale) const {
    out = rhs;
    fftw_execute_r2r(forward_, out.data(), out.data());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double m = shift - scale * eig_[i];
      out[i] = m == 0.0 ? 0.0 : out[i] / (m * norm_);
    }
    fftw_execute_r2r(backward_, out.data(), out.data());
  }

  Grid g_;
  std::vector<double> eig_;
  double norm_ = 1.0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace viscoflow
