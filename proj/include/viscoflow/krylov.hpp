#pragma once

// Jacobi-preconditioned conjugate gradients for symmetric positive definite
// operators given as callbacks.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "viscoflow/errors.hpp"
#include "viscoflow/parallel.hpp"

namespace viscoflow {

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

using LinearOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

/// Solves A x = b from the initial guess in x. `diag` is the diagonal of A.
inline CgResult conjugate_gradient(const LinearOp& apply, const std::vector<double>& diag,
                                   const std::vector<double>& b, std::vector<double>& x, double tol = 1e-12,
                                   int max_iter = 2000) {
  const std::size_t n = b.size();
  auto dotp = [n](const std::vector<double>& u, const std::vector<double>& v) {
    return parallel_sum(n, [&](std::size_t i) { return u[i] * v[i]; });
  };
  const double bnorm = std::sqrt(dotp(b, b));
  CgResult res;
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return res;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double rnorm = std::sqrt(dotp(r, r));
  if (rnorm <= tol * bnorm) {
    res.relative_residual = rnorm / bnorm;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dotp(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double alpha = rz / dotp(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rnorm = std::sqrt(dotp(r, r));
    res.iterations = it;
    res.relative_residual = rnorm / bnorm;
    if (rnorm <= tol * bnorm) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dotp(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverDivergence("conjugate gradients stalled at relative residual " + std::to_string(res.relative_residual));
}

}  // namespace viscoflow
