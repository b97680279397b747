#pragma once

// Randomized sweeps over the pointwise constitutive identities, entropy
// production sign, convexity of the free energies, the Hencky expansion
// and the cut-off function.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "viscoflow/constitutive.hpp"
#include "viscoflow/random.hpp"

namespace viscoflow {

enum class Mutation { none, negate_gamma_term };

inline std::string serialize(const SymTensor3& b) {
  std::string out = "[";
  char buf[40];
  for (int k = 0; k < 6; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", b.c[k]);
    out += (k ? ", " : "") + std::string(buf);
  }
  return out + "] (11,22,33,12,13,23)";
}

struct IdentitySweepOptions {
  std::uint64_t seed = 42;
  long samples = 100000;
  long convexity_samples = 10000;
  double identity_tol = 1e-10;
  double entropy_tol = -1e-12;
  double convexity_tol = -1e-12;
  Mutation mutation = Mutation::none;
};

struct IdentitySweepReport {
  long samples = 0;
  double max_identity_rel = 0.0;
  double max_diffusion_rel = 0.0;
  double min_entropy = 0.0;
  double min_convexity_slack = 0.0;  // min over psi, psi_1, psi_2 (relative to 1 + |psi(A)| + |psi(B)|)
  std::vector<double> hencky_ratios;  // per gamma and decade
  double min_hencky_ratio = 0.0;
};

namespace detail {
// Product identity B J = mu S(B) evaluated with a sign-flipped gamma term in J.
inline double mutated_product_residual(const SymTensor3& b, const ModelParams& p) {
  const SymTensor3 id = SymTensor3::identity();
  const SymTensor3 j = p.mu * (1.0 - p.gamma) * (id - inv(b)) - p.mu * p.gamma * (b - id);
  const Mat3 ms = p.mu * stress_S(b, p).full();
  return norm(b.full() * j.full() - ms) / (1.0 + std::max(norm(b) * norm(j), norm(ms)));
}

inline double midpoint_slack(double fa, double fb, double fm) {
  return (0.5 * (fa + fb) - fm) / (1.0 + std::abs(fa) + std::abs(fb));
}
}  // namespace detail

/// Largest |psi(exp L)/mu - |L|^2/2| over `dirs` scaled to norm h.
inline double hencky_residual(const std::vector<SymTensor3>& dirs, double h, const ModelParams& p) {
  double res = 0.0;
  for (const SymTensor3& d : dirs) {
    const SymTensor3 l = h * d;
    res = std::max(res, std::abs(free_energy(exp_sym(l), p) / p.mu - 0.5 * norm2(l)));
  }
  return res;
}

/// Runs every pointwise check. Throws IdentityViolation (carrying the
/// offending matrix) at the first sample beyond tolerance.
inline IdentitySweepReport check_identity_suite(const IdentitySweepOptions& o) {
  IdentitySweepReport r;
  Rng rng(o.seed);
  r.min_entropy = r.min_convexity_slack = std::numeric_limits<double>::infinity();
  for (long n = 0; n < o.samples; ++n) {
    ModelParams p;
    p.gamma = rng.uniform(0.01, 0.99);
    p.a = rng.uniform(-1.0, 1.0);
    p.delta1 = rng.uniform();
    p.delta2 = rng.uniform();
    const SymTensor3 b = (n % 10 == 9) ? random_near_degenerate_spd(rng) : random_spd(rng);
    const SymTensor3 d = random_trace_free(rng);
    const std::array<SymTensor3, 3> gb{random_symmetric(rng), random_symmetric(rng), random_symmetric(rng)};

    double rel = dissipation_identities_check(b, p, d).max_relative();
    if (o.mutation == Mutation::negate_gamma_term) rel = std::max(rel, detail::mutated_product_residual(b, p));
    r.max_identity_rel = std::max(r.max_identity_rel, rel);
    if (!(rel <= o.identity_tol))
      throw IdentityViolation("dissipation identity residual " + std::to_string(rel) + " at sample " +
                                  std::to_string(n),
                              serialize(b));
    const double drel = diffusion_identity_check(b, gb, p).relative();
    r.max_diffusion_rel = std::max(r.max_diffusion_rel, drel);
    if (!(drel <= o.identity_tol))
      throw IdentityViolation("diffusion identity residual " + std::to_string(drel), serialize(b));

    const EntropyTerms t = entropy_terms(b, gb, d, p);
    const double xi = std::min({t.diffusion_gamma, t.diffusion_inv, t.viscous, t.relax_1, t.relax_2, t.relax_3});
    r.min_entropy = std::min(r.min_entropy, xi);
    if (!(xi >= o.entropy_tol)) throw IdentityViolation("negative entropy production term", serialize(b));
    ++r.samples;
  }

  for (long n = 0; n < o.convexity_samples; ++n) {
    ModelParams p;
    p.gamma = rng.uniform(0.01, 0.99);
    const SymTensor3 a = random_spd(rng), b = random_spd(rng);
    const SymTensor3 m = 0.5 * (a + b);
    const double s = std::min({detail::midpoint_slack(free_energy(a, p), free_energy(b, p), free_energy(m, p)),
                               detail::midpoint_slack(free_energy_log(a, 1.0), free_energy_log(b, 1.0),
                                                      free_energy_log(m, 1.0)),
                               detail::midpoint_slack(free_energy_quadratic(a, 1.0), free_energy_quadratic(b, 1.0),
                                                      free_energy_quadratic(m, 1.0))});
    r.min_convexity_slack = std::min(r.min_convexity_slack, s);
    if (!(s >= o.convexity_tol)) throw IdentityViolation("midpoint convexity fails", serialize(a) + " / " + serialize(b));
  }

  // Hencky expansion: residual per h is the maximum over fixed directions.
  std::vector<SymTensor3> dirs;
  for (int n = 0; n < 200; ++n) {
    const SymTensor3 h = random_symmetric(rng);
    dirs.push_back(h * (1.0 / norm(h)));
  }
  r.min_hencky_ratio = std::numeric_limits<double>::infinity();
  for (double g : {0.1, 0.5, 0.9}) {
    ModelParams p;
    p.gamma = g;
    double prev = -1.0;
    for (double h : {1e-1, 1e-2, 1e-3}) {
      const double res = hencky_residual(dirs, h, p);
      if (prev > 0.0) {
        r.hencky_ratios.push_back(prev / res);
        r.min_hencky_ratio = std::min(r.min_hencky_ratio, prev / res);
      }
      prev = res;
    }
  }
  if (!(r.min_hencky_ratio >= 500.0))
    throw IdentityViolation("Hencky residual ratio " + std::to_string(r.min_hencky_ratio) + " below 500", "");
  return r;
}

struct CutoffReport {
  bool range_ok = true;      // rho in [0, 1]
  bool zero_iff_ok = true;   // rho == 0 exactly iff lambda_min <= eps
  bool monotone_ok = true;   // 1 - rho decreases along the eps ladder
  double max_defect_finest = 0.0;  // max (1 - rho) at the smallest eps
};

/// Cut-off properties over `samples` random SPD tensors and the ladder eps = 1e-1..1e-4.
inline CutoffReport check_cutoff(std::uint64_t seed, long samples) {
  CutoffReport r;
  Rng rng(seed);
  const double ladder[] = {1e-1, 1e-2, 1e-3, 1e-4};
  for (long n = 0; n < samples; ++n) {
    const SymTensor3 b = random_spd(rng, 1e-3, 1e1);
    const double l = lambda_min(b);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : ladder) {
      const double rho = cutoff_rho(b, eps);
      r.range_ok = r.range_ok && rho >= 0.0 && rho <= 1.0;
      r.zero_iff_ok = r.zero_iff_ok && ((rho == 0.0) == (l <= eps));
      const double defect = 1.0 - rho;
      r.monotone_ok = r.monotone_ok && defect <= prev;
      prev = defect;
    }
    r.max_defect_finest = std::max(r.max_defect_finest, prev);
  }
  return r;
}

}  // namespace viscoflow
