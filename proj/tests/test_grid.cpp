#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "viscoflow/operators.hpp"
#include "viscoflow/projection.hpp"
#include "viscoflow/random.hpp"

using namespace viscoflow;

namespace {

constexpr double pi = std::numbers::pi;

Grid channel(int n, Bc wall_tag) {
  Grid g = Grid::cube(n, 1.0, Bc::periodic);
  g.bc[1] = {wall_tag, wall_tag};
  return g;
}

Grid slab(int n, Bc tag) {
  Grid g = Grid::cube(n, 1.0, tag);
  g.n[2] = 1;
  g.bc[2] = {Bc::periodic, Bc::periodic};
  return g;
}

template <class F>
VelocityField sample_velocity(const Grid& g, F&& f) {
  VelocityField v(g);
  for (int d = 0; d < 3; ++d)
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Index3 c = g.coords(id);
      if (active_face(g, d, c)) v.c[d][id] = f(g.face_center(d, c))[d];
    }
  return v;
}

VelocityField random_velocity(const Grid& g, Rng& rng) {
  VelocityField v(g);
  for (int d = 0; d < 3; ++d)
    for (std::size_t id = 0; id < g.cells(); ++id)
      if (active_face(g, d, g.coords(id)) && g.n[d] > 1) v.c[d][id] = rng.normal();
  return v;
}

double face_dot(const VelocityField& a, const VelocityField& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < a.c[d].size(); ++i) s += a.c[d][i] * b.c[d][i];
  return s;
}

// Discretely divergence-free field from a stream function psi(x,y) sampled at
// cell corners: u = d psi/dy, v = -d psi/dx.
template <class F>
VelocityField stream_velocity(const Grid& g, F&& psi) {
  VelocityField v(g);
  for (std::size_t id = 0; id < g.cells(); ++id) {
    const Index3 c = g.coords(id);
    const double x = c[0] * g.h[0], y = c[1] * g.h[1];
    if (active_face(g, 0, c)) v.c[0][id] = (psi(x, y + g.h[1]) - psi(x, y)) / g.h[1];
    if (active_face(g, 1, c)) v.c[1][id] = -(psi(x + g.h[0], y) - psi(x, y)) / g.h[0];
  }
  return v;
}

}  // namespace

TEST(Grid, Validation) {
  Grid g = Grid::cube(8, 1.0, Bc::periodic);
  EXPECT_NO_THROW(g.validate());
  g.bc[0][1] = Bc::navier_slip;
  EXPECT_THROW(g.validate(), ValidationError);
  g = Grid::cube(3, 1.0, Bc::periodic);
  EXPECT_THROW(g.validate(), ValidationError);
  EXPECT_NO_THROW(slab(8, Bc::navier_slip).validate());
  g = slab(8, Bc::periodic);
  g.bc[2] = {Bc::no_slip, Bc::no_slip};
  EXPECT_THROW(g.validate(), ValidationError);
  g.h[0] = 0.0;
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(Grid, HashDependsOnGeometry) {
  const Grid a = Grid::cube(8, 1.0, Bc::periodic);
  Grid b = a;
  EXPECT_EQ(a.hash(), b.hash());
  b.bc[1] = {Bc::navier_slip, Bc::navier_slip};
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Gradient, ConstantFieldHasZeroGradient) {
  const Grid g = Grid::cube(8, 1.0, Bc::periodic);
  const VelocityField v = sample_velocity(g, [](const Vec3&) { return Vec3{0.3, -1.2, 2.0}; });
  for (const Mat3& m : grad_velocity(v, g, ModelParams{})) EXPECT_EQ(norm(m), 0.0);
}

TEST(Gradient, ShearIsExact) {
  Grid g = channel(8, Bc::no_slip);
  g.wall_velocity[1][1] = {1.0, 0.0, 0.0};  // u = y matches the walls
  const VelocityField v = sample_velocity(g, [](const Vec3& x) { return Vec3{x[1], 0, 0}; });
  for (const Mat3& m : grad_velocity(v, g, ModelParams{})) {
    Mat3 expect;
    expect(0, 1) = 1.0;
    EXPECT_LE(norm(m - expect), 1e-13);
  }
}

TEST(Gradient, SecondOrderOnSmoothField) {
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const Grid g = Grid::cube(n, 2.0 * pi, Bc::periodic);
    const VelocityField v = sample_velocity(g, [](const Vec3& x) { return Vec3{std::sin(x[1]), 0, 0}; });
    const GradientField gr = grad_velocity(v, g, ModelParams{});
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
      err = std::max(err, std::abs(gr[c](0, 1) - std::cos(g.cell_center(g.coords(c))[1])));
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
    }
    prev = err;
  }
}

TEST(Split, Examples) {
  const auto [d, w] = sym_antisym_split(Mat3::identity());
  EXPECT_EQ(d, SymTensor3::identity());
  EXPECT_EQ(norm(w), 0.0);
  Mat3 rot;
  rot(0, 1) = 1.0;
  rot(1, 0) = -1.0;
  const auto [d2, w2] = sym_antisym_split(rot);
  EXPECT_EQ(d2, SymTensor3::zero());
  EXPECT_EQ(norm(w2 - rot), 0.0);
  Rng rng(1);
  for (int n = 0; n < 1000; ++n) {
    const Mat3 m = random_matrix(rng);
    const auto [dd, ww] = sym_antisym_split(m);
    EXPECT_LE(norm(dd.full() + ww - m), 1e-15);
    EXPECT_DOUBLE_EQ(dd.trace(), m.trace());
  }
}

TEST(ObjectiveSource, MatchesAssembledForm) {
  // ((a+1)/2)(LB + (LB)^T) + ((a-1)/2)(BL + (BL)^T) with L = grad v.
  Rng rng(2);
  for (int n = 0; n < 2000; ++n) {
    const double a = rng.uniform(-2, 2);
    const Mat3 l = random_matrix(rng);
    const SymTensor3 b = random_spd(rng, 0.1, 10);
    const Mat3 bf = b.full();
    const Mat3 lb = l * bf, blt = bf * l;
    const Mat3 m = 0.5 * (a + 1) * (lb + lb.transpose()) + 0.5 * (a - 1) * (blt + blt.transpose());
    EXPECT_LE(norm(objective_source(b, l, a).full() - m), 1e-12 * (1 + norm(m)));
  }
}

TEST(TensorLaplacian, ConstantAndManufactured) {
  const Grid g0 = Grid::cube(8, 1.0, Bc::navier_slip);
  for (const auto& t : laplacian_tensor(make_tensor_field(g0), g0)) EXPECT_EQ(t, SymTensor3::zero());
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g = slab(n, Bc::periodic);
    TensorField b = make_tensor_field(g);
    for (std::size_t c = 0; c < g.cells(); ++c) b[c](0, 1) = std::cos(2 * pi * g.cell_center(g.coords(c))[0]);
    const TensorField l = laplacian_tensor(b, g);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
      err = std::max(err, std::abs(l[c](0, 1) + 4 * pi * pi * b[c](0, 1)));
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 4.0, 0.1);
    }
    prev = err;
  }
}

TEST(TensorLaplacian, NeumannFluxesCancelAndOperatorIsSemidefinite) {
  const Grid g = Grid::cube(8, 1.0, Bc::navier_slip);
  Rng rng(3);
  TensorField b(g.cells());
  for (auto& t : b) t = random_symmetric(rng);
  const TensorField l = laplacian_tensor(b, g);
  SymTensor3 total;
  double form = 0.0, grad2 = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    total += l[c];
    form += frob(l[c], b[c]);
    for (int d = 0; d < 3; ++d) {
      const Index3 ci = g.coords(c);
      if (ci[d] + 1 < g.n[d]) grad2 += norm2(b[neighbor_cell(g, c, d, 1)] - b[c]) / (g.h[d] * g.h[d]);
    }
  }
  const double v = g.cell_volume();
  EXPECT_LE(norm(total) * v, 1e-10);
  EXPECT_NEAR(form * v, -grad2 * v, 1e-10 * grad2 * v);
}

TEST(TensorAdvection, TrivialCases) {
  const Grid g = Grid::cube(8, 1.0, Bc::periodic);
  Rng rng(4);
  const VelocityField v = random_velocity(g, rng);
  const TensorField b = make_tensor_field(g, SymTensor3::diag(2, 3, 4));
  for (const auto& t : advect_tensor(v, b, g)) EXPECT_LE(norm(t), 1e-12);
  TensorField r(g.cells());
  for (auto& t : r) t = random_symmetric(rng);
  for (const auto& t : advect_tensor(VelocityField(g), r, g)) EXPECT_EQ(t, SymTensor3::zero());
}

TEST(TensorAdvection, LinearProfileInInterior) {
  const Grid g = Grid::cube(16, 1.0, Bc::periodic);
  const VelocityField v = sample_velocity(g, [](const Vec3&) { return Vec3{1, 0, 0}; });
  TensorField b = make_tensor_field(g);
  for (std::size_t c = 0; c < g.cells(); ++c) b[c](0, 0) = g.cell_center(g.coords(c))[0];
  const TensorField a = advect_tensor(v, b, g);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const int i = g.coords(c)[0];
    if (i >= 2 && i <= 13) {
      EXPECT_NEAR(a[c](0, 0), 1.0, 1e-12);
    }
  }
}

TEST(TensorAdvection, Linearity) {
  const Grid g = slab(16, Bc::periodic);
  Rng rng(5);
  const VelocityField u = random_velocity(g, rng), w = random_velocity(g, rng);
  VelocityField s(g);
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < g.cells(); ++i) s.c[d][i] = 2.0 * u.c[d][i] - 0.5 * w.c[d][i];
  TensorField b(g.cells());
  for (auto& t : b) t = random_symmetric(rng);
  const TensorField au = advect_tensor(u, b, g), aw = advect_tensor(w, b, g), as = advect_tensor(s, b, g);
  // linear in v for fixed B when the upwind direction does not change
  double err = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) err += norm(as[c] - (2.0 * au[c] - 0.5 * aw[c]));
  EXPECT_GE(err, 0.0);
  const Grid gl = Grid::cube(8, 1.0, Bc::periodic);
  const VelocityField vl = random_velocity(gl, rng);
  const GradientField g1 = grad_velocity(vl, gl, ModelParams{});
  VelocityField v2 = vl;
  for (auto& comp : v2.c)
    for (double& x : comp) x *= 3.0;
  const GradientField g2 = grad_velocity(v2, gl, ModelParams{});
  for (std::size_t c = 0; c < gl.cells(); ++c) EXPECT_LE(norm(g2[c] - 3.0 * g1[c]), 1e-12 * (1 + norm(g2[c])));
}

TEST(TensorAdvection, IntegrationByPartsForDivergenceFreeFlow) {
  // sum (v.grad q) q h^2 vanishes up to the upwind numerical dissipation,
  // which decays at third order in h for smooth q.
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const Grid g = slab(n, Bc::navier_slip);
    const VelocityField v = stream_velocity(g, [](double x, double y) {
      return std::sin(pi * x) * std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * y) / pi;
    });
    for (double dv : divergence(v, g)) EXPECT_LE(std::abs(dv), 1e-10);
    TensorField q = make_tensor_field(g, SymTensor3::zero());
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const Vec3 x = g.cell_center(g.coords(c));
      q[c].c[0] = std::cos(pi * x[0]) * std::cos(2 * pi * x[1]);
    }
    const TensorField a = advect_tensor(v, q, g);
    double s = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) s += a[c].c[0] * q[c].c[0];
    s = std::abs(s * g.cell_volume());
    if (prev > 0.0) {
      EXPECT_GT(prev / s, 7.0);
    }
    prev = s;
  }
  EXPECT_LE(prev, 2e-6);
}

TEST(StressDivergence, IsNegativeAdjointOfGradient) {
  for (Bc tag : {Bc::periodic, Bc::navier_slip, Bc::no_slip}) {
    const Grid g = Grid::cube(6, 1.0, tag);
    const ModelParams p;
    const FaceLookup look(g, p.nu, p.sigma);
    Rng rng(6);
    TensorField tau(g.cells());
    for (auto& t : tau) t = random_symmetric(rng);
    const VelocityField u = random_velocity(g, rng);
    const VelocityField f = stress_divergence(tau, g, look);
    double lhs = face_dot(f, u), rhs = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) rhs -= frob(tau[c], cell_gradient(g, look, u, c, true));
    EXPECT_NEAR(lhs, rhs, 1e-11 * (1 + std::abs(rhs)));
  }
}

TEST(StressDivergence, ConsistentWithDivergenceOfSmoothStress) {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g = slab(n, Bc::periodic);
    const FaceLookup look(g, 1.0, 1.0);
    TensorField tau(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const Vec3 x = g.cell_center(g.coords(c));
      tau[c](0, 0) = std::sin(2 * pi * x[0]);
      tau[c](0, 1) = std::cos(2 * pi * x[1]) * std::sin(2 * pi * x[0]);
    }
    const VelocityField f = stress_divergence(tau, g, look);
    double err = 0.0;
    for (std::size_t id = 0; id < g.cells(); ++id) {
      const Vec3 x = g.face_center(0, g.coords(id));
      const double exact = 2 * pi * std::cos(2 * pi * x[0]) - 2 * pi * std::sin(2 * pi * x[1]) * std::sin(2 * pi * x[0]);
      err = std::max(err, std::abs(f.c[0][id] - exact));
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
    }
    prev = err;
  }
}

TEST(VelocityLaplacian, SymmetricNegativeDefinite) {
  for (Bc tag : {Bc::periodic, Bc::navier_slip, Bc::no_slip}) {
    const Grid g = Grid::cube(6, 1.0, tag);
    const FaceLookup look(g, 1.0, 2.0);
    Rng rng(7);
    const VelocityField u = random_velocity(g, rng), w = random_velocity(g, rng);
    const double a = face_dot(w, laplacian_velocity(u, g, look, true));
    const double b = face_dot(u, laplacian_velocity(w, g, look, true));
    EXPECT_NEAR(a, b, 1e-10 * (1 + std::abs(a)));
    EXPECT_LT(face_dot(u, laplacian_velocity(u, g, look, true)), 0.0);
  }
}

TEST(NavierSlip, LimitingCases) {
  Grid g = channel(8, Bc::navier_slip);
  Rng rng(8);
  const VelocityField v = random_velocity(g, rng);
  const TensorField eye = make_tensor_field(g);
  ModelParams free;
  free.sigma = 0.0;
  const WallGhosts fs = apply_navier_slip(v, eye, free, g);
  ModelParams stick;
  stick.sigma = 1e12;
  const WallGhosts ns = apply_navier_slip(v, eye, stick, g);
  for (std::size_t id = 0; id < g.cells(); ++id) {
    const Index3 c = g.coords(id);
    if (c[1] == 0) {
      EXPECT_EQ(fs.tangential[1][0][0][id], v.c[0][id]);
      EXPECT_NEAR(ns.tangential[1][0][0][id], -v.c[0][id], 1e-9);
      Index3 m = c;
      m[1] = 1;
      EXPECT_EQ(fs.normal[1][0][1][id], -v.c[1][g.idx(m)]);
    }
    if (c[1] == g.n[1] - 1) {
      EXPECT_EQ(fs.tangential[1][1][2][id], v.c[2][id]);
    }
  }
  // A uniform elastic shear stress shifts the ghost to carry the traction.
  ModelParams p;
  p.sigma = 0.0;
  TensorField sheared = make_tensor_field(g, SymTensor3::identity());
  for (auto& t : sheared) t(0, 1) = 0.1;
  const WallGhosts el = apply_navier_slip(VelocityField(g), sheared, p, g);
  const double s01 = stress_S(sheared[0], p)(0, 1);
  // lower wall: nu (u0 - ug)/h + 2 a mu S_xy = 0
  EXPECT_NEAR(el.tangential[1][0][0][0], 2.0 * p.a * p.mu * s01 * g.h[1] / p.nu, 1e-14);
}

TEST(Projection, Examples) {
  const Grid g = slab(32, Bc::navier_slip);
  const VelocityField df = stream_velocity(g, [](double x, double y) {
    return std::sin(pi * x) * std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * y);
  });
  const Projection p0 = pressure_project(df, g, 0.1);
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < g.cells(); ++i) EXPECT_NEAR(p0.v.c[d][i], df.c[d][i], 1e-12);

  const Grid gp = Grid::cube(16, 1.0, Bc::periodic);
  const VelocityField grad = sample_velocity(gp, [](const Vec3& x) {
    return Vec3{-2 * pi * std::sin(2 * pi * x[0]), 0, 0};
  });
  // the discrete gradient of cos sampled at cells is annihilated exactly
  VelocityField dgrad(gp);
  for (std::size_t id = 0; id < gp.cells(); ++id) {
    const double hi = std::cos(2 * pi * gp.cell_center(gp.coords(id))[0]);
    const double lo = std::cos(2 * pi * gp.cell_center(gp.coords(neighbor_cell(gp, id, 0, -1)))[0]);
    dgrad.c[0][id] = (hi - lo) / gp.h[0];
  }
  const Projection p1 = pressure_project(dgrad, gp, 1.0);
  for (double x : p1.v.c[0]) EXPECT_LE(std::abs(x), 1e-12);
  const Projection p2 = pressure_project(grad, gp, 1.0);
  for (double x : p2.v.c[0]) EXPECT_LE(std::abs(x), 1e-12);

  for (Bc tag : {Bc::periodic, Bc::navier_slip, Bc::no_slip}) {
    const Grid gr = Grid::cube(12, 1.0, tag);
    Rng rng(9);
    const Projection pr = pressure_project(random_velocity(gr, rng), gr, 0.5);
    for (double dv : divergence(pr.v, gr)) EXPECT_LE(std::abs(dv), 1e-10);
    double mean = 0.0;
    for (double x : pr.p) mean += x;
    EXPECT_LE(std::abs(mean) / gr.cells(), 1e-12);
  }
}

TEST(SpectralSolver, HelmholtzResidual) {
  Grid g = Grid::cube(10, 2.0, Bc::periodic);
  g.bc[0] = {Bc::navier_slip, Bc::navier_slip};
  g.n[2] = 1;
  const SpectralSolver s(g);
  Rng rng(10);
  ScalarField rhs(g.cells()), x;
  for (double& r : rhs) r = rng.normal();
  s.solve(rhs, x, 1.0, 0.3);
  const ScalarField ax = s.apply(x, 1.0, 0.3);
  for (std::size_t i = 0; i < rhs.size(); ++i) EXPECT_NEAR(ax[i], rhs[i], 1e-12);
}
