#include <gtest/gtest.h>

#include <cmath>

#include "viscoflow/random.hpp"
#include "viscoflow/spectral.hpp"

using namespace viscoflow;

namespace {

SymTensor3 example_block() {
  SymTensor3 a = SymTensor3::diag(2, 2, 5);
  a(0, 1) = 1.0;
  return a;
}

double rel_err(const SymTensor3& x, const SymTensor3& y) { return norm(x - y) / (1.0 + norm(y)); }

double orthonormality_error(const Mat3& q) { return norm(q.transpose() * q - Mat3::identity()); }

}  // namespace

TEST(Frob, HandValues) {
  EXPECT_DOUBLE_EQ(frob(SymTensor3::identity(), SymTensor3::identity()), 3.0);
  EXPECT_DOUBLE_EQ(frob(SymTensor3::diag(1, 2, 3), SymTensor3::identity()), 6.0);
  SymTensor3 a, b;
  a(0, 1) = 1.0;
  b(0, 1) = 2.0;
  EXPECT_DOUBLE_EQ(frob(a, b), 4.0);
}

TEST(Eig, DiagonalIsExact) {
  const Spectrum3 s = eig_sym3(SymTensor3::diag(3, 1, 2));
  EXPECT_EQ(s.values, (std::array<double, 3>{1, 2, 3}));
  EXPECT_EQ(s.vector(0), (Vec3{0, 1, 0}));
  EXPECT_EQ(s.vector(1), (Vec3{0, 0, 1}));
  EXPECT_EQ(s.vector(2), (Vec3{1, 0, 0}));
  const Spectrum3 i = eig_sym3(SymTensor3::identity());
  EXPECT_EQ(i.values, (std::array<double, 3>{1, 1, 1}));
}

TEST(Eig, BlockMatrixRootsOfCharacteristicPolynomial) {
  // (2-l)^2 - 1 = 0 gives 1 and 3; the decoupled entry gives 5.
  const Spectrum3 s = eig_sym3(example_block());
  EXPECT_NEAR(s.values[0], 1.0, 1e-14);
  EXPECT_NEAR(s.values[1], 3.0, 1e-14);
  EXPECT_NEAR(s.values[2], 5.0, 1e-14);
  EXPECT_NEAR(lambda_min(example_block()), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.vector(0)[0]), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(s.vector(0)[0], -s.vector(0)[1], 1e-14);
}

TEST(Eig, RandomReconstructionAndOrthonormality) {
  Rng rng(7);
  for (int n = 0; n < 20000; ++n) {
    const SymTensor3 a = (n % 3 == 0) ? random_symmetric(rng, std::pow(10.0, rng.uniform(-3, 3)))
                         : (n % 3 == 1) ? random_spd(rng)
                                        : random_near_degenerate_spd(rng);
    const Spectrum3 s = eig_sym3(a);
    EXPECT_LE(detail::reconstruction_error(a, s), 1e-12 * (1.0 + norm(a)));
    EXPECT_LE(orthonormality_error(s.vectors), 1e-12);
    EXPECT_LE(s.values[0], s.values[1]);
    EXPECT_LE(s.values[1], s.values[2]);
  }
}

TEST(Eig, RepeatedEigenvaluesUseFallback) {
  Rng rng(11);
  for (int n = 0; n < 1000; ++n) {
    const Mat3 q = random_rotation(rng);
    const SymTensor3 a = rotate_diagonal(q, {2.0, 2.0, 2.0 + 1e-15 * n});
    const Spectrum3 s = eig_sym3(a);
    EXPECT_LE(detail::reconstruction_error(a, s), 1e-12 * (1.0 + norm(a)));
    EXPECT_LE(orthonormality_error(s.vectors), 1e-12);
  }
}

TEST(LambdaMin, MatchesRayleighQuotientLowerBound) {
  Rng rng(3);
  for (int n = 0; n < 2000; ++n) {
    const SymTensor3 a = random_symmetric(rng);
    const double l = lambda_min(a);
    for (int k = 0; k < 5; ++k) {
      const Vec3 z{rng.normal(), rng.normal(), rng.normal()};
      EXPECT_GE(dot(z, a.full() * z) / dot(z, z), l - 1e-12 * (1.0 + norm(a)));
    }
  }
}

TEST(LambdaMin, AgreesWithSylvesterCriterion) {
  Rng rng(5);
  int pd = 0;
  for (int n = 0; n < 20000; ++n) {
    const SymTensor3 a = random_symmetric(rng) + SymTensor3::identity() * 1.5;
    const double m1 = a(0, 0);
    const double m2 = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
    const double m3 = a.det();
    const bool sylvester = m1 > 0 && m2 > 0 && m3 > 0;
    const double l = lambda_min(a);
    if (std::abs(l) < 1e-9) continue;
    EXPECT_EQ(l > 0.0, sylvester);
    pd += sylvester;
  }
  EXPECT_GT(pd, 1000);
}

TEST(Inverse, DiagonalAndMultiplyBack) {
  EXPECT_EQ(inv(SymTensor3::identity()), SymTensor3::identity());
  EXPECT_LE(rel_err(inv(SymTensor3::diag(4, 1, 1)), SymTensor3::diag(0.25, 1, 1)), 1e-16);
  Rng rng(9);
  for (int n = 0; n < 5000; ++n) {
    const SymTensor3 a = random_spd(rng, 1e-2, 1e2);
    const Mat3 p = a.full() * inv(a).full();
    EXPECT_LE(norm(p - Mat3::identity()), 1e-10);
  }
}

TEST(Inverse, ThrowsOnIndefinite) {
  EXPECT_THROW(inv(SymTensor3::diag(-1, 1, 1)), SingularMatrix);
  EXPECT_THROW(inv(SymTensor3::diag(0, 1, 1)), SingularMatrix);
}

TEST(Power, DiagonalAndSquareBack) {
  EXPECT_LE(rel_err(pow_sym(SymTensor3::diag(4, 1, 1), 0.5), SymTensor3::diag(2, 1, 1)), 1e-16);
  EXPECT_LE(rel_err(pow_sym(SymTensor3::identity(), -0.5), SymTensor3::identity()), 1e-16);
  EXPECT_EQ(pow_sym(example_block(), 1.0), example_block());
  EXPECT_EQ(pow_sym(example_block(), 0.0), SymTensor3::identity());
  Rng rng(13);
  for (int n = 0; n < 5000; ++n) {
    // condition number at most 1e6
    const SymTensor3 a = random_spd(rng, 1e-3, 1e3);
    const SymTensor3 r = pow_sym(a, 0.5);
    EXPECT_LE(rel_err(square(r), a), 1e-12);
    EXPECT_LE(rel_err(pow_sym(r, 2.0), a), 1e-12);
  }
  EXPECT_THROW(pow_sym(SymTensor3::diag(-1, 1, 1), 0.5), SingularMatrix);
  EXPECT_NO_THROW(pow_sym(SymTensor3::diag(-1, 1, 1), 2.0));
}

TEST(Hencky, DiagonalExpRoundTripAndInverse) {
  EXPECT_EQ(hencky_log(SymTensor3::identity()), SymTensor3::zero());
  EXPECT_LE(norm(hencky_log(SymTensor3::diag(std::exp(1.0), 1, 1)) - SymTensor3::diag(1, 0, 0)), 1e-15);
  Rng rng(17);
  for (int n = 0; n < 5000; ++n) {
    const SymTensor3 a = random_spd(rng);
    EXPECT_LE(rel_err(exp_sym(hencky_log(a)), a), 1e-12);
  }
  // The small eigenvalues of inv(A) carry an absolute error of eps |A^-1|, so
  // the log symmetry is checked at condition numbers up to 1e4.
  for (int n = 0; n < 5000; ++n) {
    const SymTensor3 a = random_spd(rng, 1e-2, 1e2);
    EXPECT_LE(norm(hencky_log(inv(a)) + hencky_log(a)), 1e-12 * (1.0 + norm(hencky_log(a))));
  }
  EXPECT_THROW(hencky_log(SymTensor3::diag(1, 0, 1)), SingularMatrix);
}

TEST(Frob, CommutatorWithCommutingPairVanishes) {
  Rng rng(19);
  for (int n = 0; n < 2000; ++n) {
    const Mat3 q = random_rotation(rng);
    const SymTensor3 a = rotate_diagonal(q, {rng.normal(), rng.normal(), rng.normal()});
    const SymTensor3 b = rotate_diagonal(q, {rng.normal(), rng.normal(), rng.normal()});
    const Mat3 m = random_matrix(rng);
    const Mat3 w = 0.5 * (m - m.transpose());
    const Mat3 c = w * b.full() - b.full() * w;
    EXPECT_LE(std::abs(frob(a.full(), c)), 1e-13 * (1.0 + norm(a) * norm(b) * norm(w)));
  }
}

TEST(Random, SamplingLawIsReproducible) {
  Rng a(42), b(42);
  for (int n = 0; n < 100; ++n) EXPECT_EQ(random_spd(a), random_spd(b));
  Rng c(42);
  const double u = c.uniform();
  EXPECT_GE(u, 0.0);
  EXPECT_LT(u, 1.0);
  Rng d(1);
  for (int n = 0; n < 1000; ++n) {
    const auto l = eigenvalues_sym3(random_spd(d));
    EXPECT_GE(l[0], 1e-3 * (1 - 1e-12));
    EXPECT_LE(l[2], 1e3 * (1 + 1e-12));
  }
}
