#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ringeq/linsys.hpp"
#include "ringeq/roots.hpp"

using namespace ringeq;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

RingSystem shifted_pair_system(int n, double x) {
  return RingSystem(n, {{x, Phase::Shifted}, {1.0, Phase::Aligned}});
}

// Root of delta^2 - k(x, pi/n) k(1/x, pi/n) nearest to 1, found independently
// of the solver module.
double shifted_pair_root(const RingKernel& k) {
  auto f = [&](double x) {
    return k.delta() * k.delta() - k.k(x, Phase::Shifted) * k.k_inv(x, Phase::Shifted);
  };
  const auto roots = find_roots(f, unit_interval_grid());
  if (roots.empty()) throw NoRootError("no shifted pair root");
  return roots.back();
}

std::vector<double> geometric(double x, const std::vector<double>& alphas) {
  std::vector<double> r{x};
  for (double a : alphas) r.push_back(std::pow(x, a));
  r.push_back(1.0);
  return r;
}

}  // namespace

TEST(Assemble, SingleRing) {
  const InteractionMatrix m = assemble(RingSystem::aligned(17, {1.0}));
  ASSERT_EQ(m.k(), 1);
  EXPECT_EQ(m(0, 0), delta_exact(17));
  EXPECT_EQ(determinant(m), delta_exact(17));
}

TEST(Assemble, TwoAlignedRings) {
  const RingKernel k(50);
  for (double x : {0.1, 0.5, 0.9}) {
    const InteractionMatrix m = assemble(RingSystem::aligned(50, {x, 1.0}), k);
    EXPECT_EQ(m(0, 1), k.k(1.0 / x));
    EXPECT_EQ(m(1, 0), k.k(x));
    const double expected = k.delta() * k.delta() - k.k(x) * k.k(1.0 / x);
    EXPECT_NEAR(determinant(m), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Assemble, ShiftedPairNearZeroRadius) {
  const RingKernel k(300);
  const InteractionMatrix m = assemble(shifted_pair_system(300, 1e-6), k);
  EXPECT_NEAR(determinant(m), k.delta() * k.delta(), 1e-9);
}

TEST(Assemble, EqualRadiusDistinctPhases) {
  const RingKernel k(30);
  const RingSystem s(30, {{0.4, Phase::Aligned}, {1.0, Phase::Shifted}, {1.0, Phase::Aligned}});
  const InteractionMatrix m = assemble(s, k);
  EXPECT_EQ(m(1, 2), k.k(1.0, Phase::Shifted));
  EXPECT_EQ(m(2, 1), k.k(1.0, Phase::Shifted));
  EXPECT_EQ(m(1, 0), k.k(0.4, Phase::Shifted));
  EXPECT_EQ(m(0, 1), k.k(2.5, Phase::Shifted));
  for (int j = 0; j < 3; ++j) EXPECT_EQ(m(j, j), k.delta());
}

TEST(RingSystemInvariants, Rejected) {
  EXPECT_THROW(RingSystem::aligned(10, {0.5, 0.4, 1.0}), DomainError);
  EXPECT_THROW(RingSystem::aligned(10, {0.5, 0.9}), DomainError);
  EXPECT_THROW(RingSystem::aligned(10, {0.5, 0.5, 1.0}), DomainError);
  EXPECT_THROW(RingSystem(10, {{1.0, Phase::Shifted}}), DomainError);
  EXPECT_THROW(RingSystem::aligned(1, {1.0}), DomainError);
  EXPECT_THROW(RingSystem::aligned(10, {}), DomainError);
  EXPECT_THROW(RingSystem::aligned(10, {-0.1, 1.0}), DomainError);
}

TEST(Determinant, ReferenceValue) {
  // 40-digit evaluation of the 3x3 determinant
  const InteractionMatrix m = assemble(RingSystem::aligned(20, {0.25, 0.5, 1.0}));
  EXPECT_NEAR(determinant(m), -0.42337849113345713, 1e-13);
}

TEST(Determinant, SignSpotChecks) {
  for (int n = 456; n <= 472; ++n) {
    const double x = 0.098;
    ASSERT_GT(determinant(assemble(RingSystem::aligned(n, {x, std::sqrt(x), 1.0}))), 0) << n;
  }
  for (int n = 473; n <= 874; n += 1) {
    const double x = 0.97;
    ASSERT_LT(determinant(assemble(RingSystem::aligned(n, {x, std::sqrt(x), 1.0}))), 0) << n;
  }
}

TEST(Determinant, ScaledKeepsSign) {
  const InteractionMatrix m = assemble(RingSystem::aligned(500, {0.3, 0.6, 1.0}));
  const double d = determinant(m), s = scaled_determinant(m);
  EXPECT_EQ(std::signbit(d), std::signbit(s));
  EXPECT_LE(std::abs(s), 1.0);
}

TEST(PQ, ReconstructsDeterminant) {
  const RingKernel k(500);
  for (double x : {0.05, 0.25, 0.6, 0.9}) {
    const double x2 = std::sqrt(x);
    const PQDecomposition pq = pq_decompose(k, x, x2);
    const double det = determinant(assemble(RingSystem::aligned(500, {x, x2, 1.0}), k));
    EXPECT_NEAR(pq.determinant(), det, 1e-12 * std::max(1.0, std::abs(det))) << x;
  }
  EXPECT_THROW(pq_decompose(k, 0.5, 0.4), DomainError);
  EXPECT_THROW(pq_decompose(k, 0.5, 1.0), DomainError);
}

TEST(PQ, ExponentReflection) {
  const RingKernel k(500);
  const double x = 0.3, a = 0.3;
  const PQDecomposition lo = pq_decompose(k, x, std::pow(x, 1 - a));
  const PQDecomposition hi = pq_decompose(k, x, std::pow(x, a));
  EXPECT_NEAR(lo.p, hi.p, 1e-12 * std::abs(hi.p));
  EXPECT_NEAR(lo.q, hi.q, 1e-12 * std::abs(hi.q));
}

TEST(Determinant, ThreeRingReflectionGrid) {
  // Tolerance relative to the sum of |terms| of the 3x3 expansion: near
  // x -> 1 the entries reach 1e3 and det is a cancellation of much larger terms.
  const RingKernel k(500);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double x = (i + 0.5) / 20, a = (j + 0.5) / 20;
      if (a == 0.5) continue;
      const double xa = std::pow(x, a), xb = std::pow(x, 1 - a);
      const double d1 = determinant(assemble(RingSystem::aligned(500, {x, xa, 1.0}), k));
      const double d2 = determinant(assemble(RingSystem::aligned(500, {x, xb, 1.0}), k));
      const double scale = std::max(pq_decompose(k, x, std::max(xa, xb)).magnitude,
                                    pq_decompose(k, x, std::min(xa, xb)).magnitude);
      worst = std::max(worst, std::abs(d1 - d2) / std::max(1.0, scale));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Determinant, GeneralReflection) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const RingKernel k(300);
  for (int kk : {4, 5}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(kk - 2);
      for (double& v : a) v = u(rng);
      std::sort(a.rbegin(), a.rend());
      std::vector<double> mirrored;
      for (auto it = a.rbegin(); it != a.rend(); ++it) mirrored.push_back(1 - *it);
      std::sort(mirrored.rbegin(), mirrored.rend());
      const double x = u(rng);
      const double d1 = determinant(assemble(RingSystem::aligned(300, geometric(x, a)), k));
      const double d2 = determinant(assemble(RingSystem::aligned(300, geometric(x, mirrored)), k));
      ASSERT_LT(rel(d1, d2), 1e-11) << kk << " " << trial;
    }
  }
}

TEST(Determinant, AlignedPairNeverSingular) {
  for (int n : {10, 100, 472, 473, 1000}) {
    const RingKernel k(n);
    double first = 0.0;
    for (int i = 1; i < 10000; ++i) {
      const double x = i / 10000.0;
      const double d = k.delta() * k.delta() - k.k(x) * k.k(1.0 / x);
      ASSERT_GT(k.k(x), 0) << n << " " << x;
      ASSERT_LT(k.k(1.0 / x), 0) << n << " " << x;
      if (i == 1) first = d;
      ASSERT_EQ(std::signbit(d), std::signbit(first)) << n << " " << x;
      ASSERT_NE(d, 0.0);
    }
  }
}

TEST(Alpha, Shape) {
  const RingKernel k(300);
  EXPECT_EQ(alpha_ratio(k, 1.0), 0.0);
  EXPECT_GT(alpha_ratio(k, 1e-4), 1e100);
  EXPECT_THROW(alpha_ratio(k, 0.0), DomainError);
  double prev = log_abs_alpha_ratio(k, 0.005);
  for (int i = 2; i < 200; ++i) {
    const double r = i / 200.0;
    const double v = log_abs_alpha_ratio(k, r);
    ASSERT_LT(v, prev) << r;
    prev = v;
  }
  EXPECT_GT(alpha_ratio(k, 0.5), 0.0);
  EXPECT_LT(alpha_ratio(k, 1.5), 0.0);
  EXPECT_LT(alpha_ratio(k, 3.0), alpha_ratio(k, 1.5));
}

TEST(Compatibility, ShiftedPairClosedFormMatchesLeastSquares) {
  const RingKernel k(237);
  const double x = shifted_pair_root(k);
  EXPECT_NEAR(x, 0.9999957969233897, 1e-13);
  const RingSystem s = shifted_pair_system(237, x);
  const double closed = shifted_pair_total_mass(k, x);
  const double ls = compatibility_mass_least_squares(assemble(s, k), radius_powers(s));
  EXPECT_NEAR(closed, ls, 1e-10);
  EXPECT_NEAR(total_mass_for_compatibility(s, k), 0.99999323763617, 1e-12);
}

TEST(Compatibility, FarFromSingularLocus) {
  const RingSystem s = shifted_pair_system(300, 0.5);
  EXPECT_THROW(total_mass_for_compatibility(s), IncompatibleError);
  EXPECT_THROW(total_mass_for_compatibility(s), NotSingularError);
  EXPECT_THROW(compatibility_mass_least_squares(assemble(s), radius_powers(s)), NotSingularError);
}

TEST(MassLine, SingleRingIsUnique) {
  for (int n : {3, 5, 40}) {
    const RingSystem s = RingSystem::aligned(n, {1.0});
    const double M = 2.0;
    const MassLine line = solve_mass_line(s, M);
    EXPECT_EQ(line.rank_defect, 0);
    EXPECT_FALSE(line.perverse());
    EXPECT_EQ(line.direction[0], 0.0);
    // 1 - M = delta n m
    EXPECT_NEAR(line.particular[0], (1 - M) / (delta_exact(n) * n), 1e-14);
  }
}

TEST(MassLine, ShiftedPair) {
  for (int n : {237, 300}) {
    const RingKernel k(n);
    const double x = shifted_pair_root(k);
    const RingSystem s = shifted_pair_system(n, x);
    const double M = total_mass_for_compatibility(s, k);
    const MassLine line = solve_mass_line(s, k, M);
    ASSERT_EQ(line.rank_defect, 1);
    ASSERT_TRUE(line.has_positive());
    ASSERT_TRUE(line.t_range.bounded());
    const InteractionMatrix A = assemble(s, k);
    const auto powers = radius_powers(s);
    for (int i = 0; i < 10; ++i) {
      const double t = line.t_range.lo + (i + 0.5) / 10 * line.t_range.width();
      EXPECT_LE(mass_line_residual(A, powers, line, t), 1e-9);
      const Masses m = line.masses(t);
      EXPECT_GT(m.m[0], 0);
      EXPECT_GT(m.m[1], 0);
      EXPECT_GE(m.m0, 0);
      EXPECT_NEAR(m.total(n), M, 1e-14);
    }
    const auto t0 = line.m0_zero_t();
    ASSERT_TRUE(t0.has_value());
    EXPECT_NEAR(line.m0(*t0), 0.0, 1e-14);
  }
  // reference interval for n = 237
  const RingKernel k(237);
  const double x = shifted_pair_root(k);
  const MassLine line = solve_mass_line(shifted_pair_system(237, x), k,
                                        shifted_pair_total_mass(k, x));
  EXPECT_NEAR(line.M, 0.99999323763617, 1e-12);
  EXPECT_GT(line.t_range.width(), 0.0);
}

TEST(MassLine, IncompatibleTotalMass) {
  const RingKernel k(300);
  const double x = shifted_pair_root(k);
  EXPECT_THROW(solve_mass_line(shifted_pair_system(300, x), k, 0.5), IncompatibleError);
  EXPECT_THROW(solve_mass_line(shifted_pair_system(300, x), k, -1.0), DomainError);
}

TEST(IntervalOps, OpenAndClosedEnds) {
  Interval r;
  r.require(1.0, 1.0, true);    // t > -1
  r.require(2.0, -1.0, false);  // t <= 2
  EXPECT_FALSE(r.empty());
  EXPECT_FALSE(r.contains(-1.0));
  EXPECT_TRUE(r.contains(2.0));
  r.require(-3.0, 0.0, true);
  EXPECT_TRUE(r.empty());
  Interval point{0.0, 0.0, true, true};
  EXPECT_FALSE(point.empty());
}

TEST(Tolerance, EnvironmentOverride) {
  ::setenv("RING_EQ_TOL", "1e-3", 1);
  EXPECT_EQ(singular_tolerance(), 1e-3);
  ::setenv("RING_EQ_TOL", "garbage", 1);
  EXPECT_EQ(singular_tolerance(), 1e-10);
  ::unsetenv("RING_EQ_TOL");
  EXPECT_EQ(singular_tolerance(), 1e-10);
}
