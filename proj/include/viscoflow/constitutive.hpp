#pragma once

// Closed-form constitutive maps: free energy and its derivative, elastic
// stress and relaxation, Cauchy stress, entropy production and the
// regularizing cut-off.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "viscoflow/errors.hpp"
#include "viscoflow/spectral.hpp"
#include "viscoflow/tensor.hpp"

namespace viscoflow {

/// Material parameters and the cut-off level.
struct ModelParams {
  double nu = 1.0;           // kinematic viscosity
  double mu = 1.0;           // elastic modulus
  double lambda_diff = 1.0;  // stress diffusion
  double sigma = 1.0;        // slip friction
  double delta1 = 1.0;       // linear relaxation rate
  double delta2 = 0.0;       // quadratic relaxation rate
  double a = 1.0;            // objective-derivative parameter
  double gamma = 0.5;        // free-energy interpolation
  double eps = 0.0;          // cut-off level, 0 disables the cut-off
  /// Allows gamma = 0 (classical Oldroyd-B free energy) for diagnostics.
  bool classical_diagnostics = false;

  static ModelParams oldroyd_b() { return {}; }
  static ModelParams giesekus() {
    ModelParams p;
    p.delta1 = 0.0;
    p.delta2 = 1.0;
    return p;
  }

  /// |a| > 1 lies outside the Gordon-Schowalter family; runs are allowed.
  bool extrapolated_regime() const { return std::abs(a) > 1.0; }

  void validate() const {
    auto positive = [](const char* key, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be positive");
    };
    auto nonnegative = [](const char* key, double v) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be nonnegative");
    };
    positive("nu", nu);
    positive("mu", mu);
    positive("lambda", lambda_diff);
    nonnegative("sigma", sigma);
    nonnegative("delta1", delta1);
    nonnegative("delta2", delta2);
    if (!std::isfinite(a)) throw ValidationError("a", "must be finite");
    if (classical_diagnostics) {
      if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma", "must lie in [0,1)");
    } else if (!(gamma > 0.0 && gamma < 1.0)) {
      throw ValidationError("gamma", "must lie in (0,1)");
    }
    if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("eps", "must lie in [0,1)");
  }
};

namespace detail {
inline std::array<double, 3> positive_eigenvalues(const SymTensor3& b, const char* op) {
  const auto l = eigenvalues_sym3(b);
  if (!(l[0] > 0.0))
    throw SingularMatrix(std::string(op) + " needs a positive definite B, lambda_min = " + std::to_string(l[0]));
  return l;
}
}  // namespace detail

/// mu (tr B - 3 - ln det B), with ln det B summed from the spectrum.
inline double free_energy_log(const SymTensor3& b, double mu) {
  const auto l = detail::positive_eigenvalues(b, "free_energy_log");
  double s = 0.0;
  for (double x : l) s += (x - 1.0) - std::log(x);
  return mu * s;
}

/// mu |B - I|^2 / 2.
inline double free_energy_quadratic(const SymTensor3& b, double mu) {
  return 0.5 * mu * norm2(b - SymTensor3::identity());
}

/// Helmholtz free energy psi(B).
inline double free_energy(const SymTensor3& b, const ModelParams& p) {
  return (1.0 - p.gamma) * free_energy_log(b, p.mu) + p.gamma * free_energy_quadratic(b, p.mu);
}

/// J = d psi / dB = mu (1-gamma)(I - B^-1) + mu gamma (B - I).
inline SymTensor3 free_energy_deriv(const SymTensor3& b, const ModelParams& p) {
  const SymTensor3 id = SymTensor3::identity();
  return p.mu * (1.0 - p.gamma) * (id - inv(b)) + p.mu * p.gamma * (b - id);
}

/// S(B) = (1-gamma)(B - I) + gamma (B^2 - B). Satisfies B J = mu S(B).
inline SymTensor3 stress_S(const SymTensor3& b, const ModelParams& p) {
  const SymTensor3 id = SymTensor3::identity();
  return (1.0 - p.gamma) * (b - id) + p.gamma * (square(b) - b);
}

/// R(B) = delta1 (B - I) + delta2 (B^2 - B).
inline SymTensor3 relax_R(const SymTensor3& b, const ModelParams& p) {
  const SymTensor3 id = SymTensor3::identity();
  return p.delta1 * (b - id) + p.delta2 * (square(b) - b);
}

/// T = -p I + 2 nu D + 2 a mu S(B). D must be trace-free.
inline SymTensor3 cauchy_stress(const SymTensor3& b, const SymTensor3& d, double pressure, const ModelParams& p) {
  if (std::abs(d.trace()) > 1e-10) throw ValidationError("D", "must be trace-free");
  SymTensor3 t = 2.0 * p.nu * d + 2.0 * p.a * p.mu * stress_S(b, p);
  t.c[0] -= pressure;
  t.c[1] -= pressure;
  t.c[2] -= pressure;
  return t;
}

/// The individual nonnegative contributions to the entropy production.
struct EntropyTerms {
  double diffusion_gamma = 0.0;  // mu lambda gamma |grad B|^2
  double diffusion_inv = 0.0;    // mu lambda (1-gamma) |B^-1/2 grad B B^-1/2|^2
  double viscous = 0.0;          // 2 nu |D|^2
  double relax_1 = 0.0;          // mu (1-gamma) delta1 |B^1/2 - B^-1/2|^2
  double relax_2 = 0.0;          // mu gamma delta2 |B^3/2 - B^1/2|^2
  double relax_3 = 0.0;          // mu ((1-gamma) delta2 + gamma delta1) |B - I|^2

  double total() const { return diffusion_gamma + diffusion_inv + viscous + relax_1 + relax_2 + relax_3; }
};

/// Relaxation dissipation densities (the last three entropy terms), from the spectrum.
inline EntropyTerms relaxation_dissipation(const std::array<double, 3>& l, const ModelParams& p) {
  EntropyTerms t;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (double x : l) {
    const double r = std::sqrt(x);
    s1 += (r - 1.0 / r) * (r - 1.0 / r);
    s2 += (x * r - r) * (x * r - r);
    s3 += (x - 1.0) * (x - 1.0);
  }
  t.relax_1 = p.mu * (1.0 - p.gamma) * p.delta1 * s1;
  t.relax_2 = p.mu * p.gamma * p.delta2 * s2;
  t.relax_3 = p.mu * ((1.0 - p.gamma) * p.delta2 + p.gamma * p.delta1) * s3;
  return t;
}

/// Entropy production (theta = 1) split into its terms. `grad_b[k]` is the
/// partial derivative of B along axis k.
inline EntropyTerms entropy_terms(const SymTensor3& b, const std::array<SymTensor3, 3>& grad_b, const SymTensor3& d,
                                  const ModelParams& p) {
  const Spectrum3 s = eig_sym3(b);
  if (!(s.values[0] > 0.0)) throw SingularMatrix("entropy_production needs a positive definite B");
  EntropyTerms t = relaxation_dissipation(s.values, p);
  double g2 = 0.0, w2 = 0.0;
  for (const SymTensor3& gk : grad_b) {
    g2 += norm2(gk);
    // |B^-1/2 M B^-1/2|^2 = sum_ij (Q^T M Q)_ij^2 / (l_i l_j)
    const Mat3 m = s.vectors.transpose() * gk.full() * s.vectors;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w2 += m(i, j) * m(i, j) / (s.values[i] * s.values[j]);
  }
  t.diffusion_gamma = p.mu * p.lambda_diff * p.gamma * g2;
  t.diffusion_inv = p.mu * p.lambda_diff * (1.0 - p.gamma) * w2;
  t.viscous = 2.0 * p.nu * norm2(d);
  return t;
}

/// theta xi: the nonnegative entropy production rate.
inline double entropy_production(const SymTensor3& b, const std::array<SymTensor3, 3>& grad_b, const SymTensor3& d,
                                 const ModelParams& p) {
  return entropy_terms(b, grad_b, d, p).total();
}

/// rho_eps(A) = max(0, L - eps) / (L (1 + eps |A|^3)), L the minimal
/// eigenvalue; zero whenever L <= eps (including L <= 0).
inline double cutoff_rho(const SymTensor3& a, double eps) {
  const double l = lambda_min(a);
  if (!(l > eps) || l <= 0.0) return 0.0;
  const double n = norm(a);
  return (l - eps) / (l * (1.0 + eps * n * n * n));
}

/// Absolute and relative residuals of the pointwise dissipation identities.
struct IdentityResiduals {
  double relax_linear = 0.0;     // (B - I).J  vs  mu(1-g)|B^1/2 - B^-1/2|^2 + mu g |B - I|^2
  double relax_quadratic = 0.0;  // (B^2 - B).J  vs  mu(1-g)|B - I|^2 + mu g |B^3/2 - B^1/2|^2
  double coupling = 0.0;         // a(BD + DB).J  vs  2 a mu S(B).D
  double product = 0.0;          // |B J - mu S(B)|
  double relax_linear_rel = 0.0;
  double relax_quadratic_rel = 0.0;
  double coupling_rel = 0.0;
  double product_rel = 0.0;

  double max_relative() const { return std::max({relax_linear_rel, relax_quadratic_rel, coupling_rel, product_rel}); }
  double max_absolute() const { return std::max({relax_linear, relax_quadratic, coupling, product}); }
};

/// Evaluates both sides of each identity by independent routes: the left
/// through matrix products with J, the right through spectral powers.
/// `d` is the trace-free rate used for the coupling identity.
inline IdentityResiduals dissipation_identities_check(const SymTensor3& b, const ModelParams& p, const SymTensor3& d) {
  const SymTensor3 id = SymTensor3::identity();
  const SymTensor3 j = free_energy_deriv(b, p);
  const SymTensor3 b_half = pow_sym(b, 0.5);
  const SymTensor3 b_mhalf = pow_sym(b, -0.5);
  const SymTensor3 b_3half = pow_sym(b, 1.5);
  const SymTensor3 bmi = b - id;
  const SymTensor3 b2mb = square(b) - b;
  const double g = p.gamma, mu = p.mu;

  IdentityResiduals r;
  {
    const double lhs = frob(bmi, j);
    const double rhs = mu * (1.0 - g) * norm2(b_half - b_mhalf) + mu * g * norm2(bmi);
    r.relax_linear = std::abs(lhs - rhs);
    r.relax_linear_rel = r.relax_linear / (1.0 + std::max({std::abs(lhs), rhs, norm(bmi) * norm(j)}));
  }
  {
    const double lhs = frob(b2mb, j);
    const double rhs = mu * (1.0 - g) * norm2(bmi) + mu * g * norm2(b_3half - b_half);
    r.relax_quadratic = std::abs(lhs - rhs);
    r.relax_quadratic_rel = r.relax_quadratic / (1.0 + std::max({std::abs(lhs), rhs, norm(b2mb) * norm(j)}));
  }
  {
    const SymTensor3 bd = SymTensor3::sym_part(b.full() * d.full() + d.full() * b.full());
    const SymTensor3 s = stress_S(b, p);
    const double lhs = p.a * frob(bd, j);
    const double rhs = 2.0 * p.a * mu * frob(s, d);
    r.coupling = std::abs(lhs - rhs);
    const double scale = std::abs(p.a) * std::max(norm(bd) * norm(j), 2.0 * mu * norm(s) * norm(d));
    r.coupling_rel = r.coupling / (1.0 + scale);
  }
  {
    const Mat3 bj = b.full() * j.full();
    const Mat3 ms = mu * stress_S(b, p).full();
    r.product = norm(bj - ms);
    r.product_rel = r.product / (1.0 + std::max(norm(b) * norm(j), norm(ms)));
  }
  return r;
}

/// Residual of grad B . grad J = mu g |grad B|^2 + mu (1-g)|B^-1/2 grad B B^-1/2|^2,
/// with grad J assembled by the chain rule d(B^-1) = -B^-1 (dB) B^-1.
struct DiffusionIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double absolute() const { return std::abs(lhs - rhs); }
  double relative() const { return absolute() / (1.0 + std::max(std::abs(lhs), std::abs(rhs))); }
};

inline DiffusionIdentity diffusion_identity_check(const SymTensor3& b, const std::array<SymTensor3, 3>& grad_b,
                                                  const ModelParams& p) {
  const SymTensor3 b_inv = inv(b);
  const SymTensor3 b_mhalf = pow_sym(b, -0.5);
  DiffusionIdentity out;
  for (const SymTensor3& gk : grad_b) {
    const SymTensor3 dinv = SymTensor3::sym_part(b_inv.full() * gk.full() * b_inv.full());
    const SymTensor3 dj = p.mu * (1.0 - p.gamma) * dinv + p.mu * p.gamma * gk;
    out.lhs += frob(gk, dj);
    const SymTensor3 w = SymTensor3::sym_part(b_mhalf.full() * gk.full() * b_mhalf.full());
    out.rhs += p.mu * p.gamma * norm2(gk) + p.mu * (1.0 - p.gamma) * norm2(w);
  }
  return out;
}

}  // namespace viscoflow
