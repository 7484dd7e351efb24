#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ringeq/oracle.hpp"

using namespace ringeq;

namespace {

// Regular n-gon of unit radius around a central mass m0: rigid rotation at
// omega = 1 needs m0 + m S_n / 4 = 1 with S_n = sum_{l=1}^{n-1} 1 / sin(pi l / n).
double single_ring_mass(int n, double m0) {
  double s = 0.0;
  for (int l = 1; l < n; ++l) s += 1.0 / std::sin(kPi * l / n);
  return (1.0 - m0) * 4.0 / s;
}

BodyList rotate(const BodyList& b, double angle) {
  BodyList out = b;
  for (auto& p : out.positions) p *= std::polar(1.0, angle);
  return out;
}

}  // namespace

TEST(Realize, Square) {
  const BodyList b = realize(RingSystem::aligned(4, {1.0}), Masses{0.0, {1.0}});
  ASSERT_EQ(b.size(), 4u);
  for (int l = 0; l < 4; ++l) {
    EXPECT_NEAR(b.positions[l].real(), std::cos(kPi * l / 2), 1e-15);
    EXPECT_NEAR(b.positions[l].imag(), std::sin(kPi * l / 2), 1e-15);
  }
}

TEST(Realize, ShiftedTriangles) {
  const RingSystem s(3, {{0.5, Phase::Shifted}, {1.0, Phase::Aligned}});
  const BodyList b = realize(s, Masses{0.0, {1.0, 1.0}});
  ASSERT_EQ(b.size(), 6u);
  for (int l = 0; l < 3; ++l) {
    EXPECT_NEAR(std::arg(b.positions[l] * std::polar(1.0, -kPi / 3 - 2 * kPi * l / 3)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b.positions[l]), 0.5, 1e-16);
    EXPECT_NEAR(std::arg(b.positions[3 + l] * std::polar(1.0, -2 * kPi * l / 3)), 0.0, 1e-15);
  }
}

TEST(Realize, CentralBodyOnlyWhenMassive) {
  const RingSystem s(5, {{0.4, Phase::Aligned}, {1.0, Phase::Shifted}, {1.0, Phase::Aligned}});
  EXPECT_EQ(realize(s, Masses{0.0, {1, 2, 3}}).size(), 15u);
  EXPECT_EQ(realize(s, Masses{0.5, {1, 2, 3}}).size(), 16u);
  EXPECT_THROW(realize(s, Masses{-0.5, {1, 2, 3}}), DomainError);
  EXPECT_THROW(realize(s, Masses{0.5, {1, -2, 3}}), DomainError);
  EXPECT_THROW(realize(s, Masses{0.5, {1, 2}}), DomainError);
}

TEST(Realize, CenterOfMassVanishes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const RingSystem s(37, {{0.3, Phase::Shifted}, {0.7, Phase::Aligned}, {1.0, Phase::Aligned}});
  for (int i = 0; i < 100; ++i) {
    const BodyList b = realize(s, Masses{u(rng), {u(rng), u(rng), u(rng)}});
    ASSERT_LE(std::abs(b.moment()), 1e-12 * b.max_radius() * b.total_mass());
  }
}

TEST(Residual, SingleRingEquilibrium) {
  for (int n : {3, 5, 12}) {
    const double m0 = 0.3;
    const BodyList b = realize(RingSystem::aligned(n, {1.0}), Masses{m0, {single_ring_mass(n, m0)}});
    EXPECT_LT(residual(b), 1e-13) << n;
  }
}

TEST(Residual, DetectsWrongMasses) {
  const int n = 5;
  const double m = single_ring_mass(n, 0.3);
  EXPECT_GT(residual(realize(RingSystem::aligned(n, {1.0}), Masses{0.3, {1.01 * m}})), 1e-4);
}

TEST(Residual, RotationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  const RingSystem s(9, {{0.6, Phase::Shifted}, {1.0, Phase::Aligned}});
  const BodyList b = realize(s, Masses{0.2, {0.03, 0.05}});
  const double r0 = residual(b);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(residual(rotate(b, u(rng))), r0, 1e-13);
}

TEST(Residual, NewtonianScaleCovariance) {
  const RingSystem s(9, {{0.6, Phase::Shifted}, {1.0, Phase::Aligned}});
  const BodyList b = realize(s, Masses{0.2, {0.03, 0.05}});
  BodyList c = b;
  const double lambda = 3.7;
  for (auto& p : c.positions) p *= lambda;
  for (auto& m : c.masses) m *= lambda * lambda * lambda;
  EXPECT_NEAR(residual(c), residual(b), 1e-12);
}

TEST(Residual, GeneralExponent) {
  // single ring under |d|^-(2 beta + 2): omega = 1 with a central mass
  const Exponent beta(1.0);
  const int n = 6;
  double s = 0.0;
  for (int l = 1; l < n; ++l) {
    const double d = 2 * std::sin(kPi * l / n);
    s += (1 - std::cos(2 * kPi * l / n)) / std::pow(d, 4);
  }
  const double m0 = 0.4, m = (1 - m0) / s;
  const BodyList b = realize(n, m0, {{1.0, Phase::Aligned, m}}, beta);
  EXPECT_LT(residual(b), 1e-13);
}

TEST(Residual, ThreadCountIndependent) {
  const RingSystem s(64, {{0.5, Phase::Shifted}, {1.0, Phase::Aligned}});
  const BodyList b = realize(s, Masses{0.1, {0.01, 0.02}});
  const auto r1 = residuals(b, 1), r4 = residuals(b, 4);
  for (std::size_t i = 0; i < r1.size(); ++i) ASSERT_EQ(r1[i], r4[i]);
}

TEST(Residual, CoincidentBodies) {
  BodyList b;
  b.positions = {{1, 0}, {1, 0}};
  b.masses = {1, 1};
  EXPECT_THROW(residual(b), SingularityError);
}

TEST(Convexity, Basics) {
  EXPECT_TRUE(convex_union(10, 1.0));
  EXPECT_FALSE(convex_union(10, 0.01));
  EXPECT_TRUE(convex_union(10, std::cos(kPi / 10) + 1e-9));
  EXPECT_FALSE(convex_union(10, std::cos(kPi / 10) - 1e-9));
  EXPECT_THROW(convex_union(10, 0.0), DomainError);
}

TEST(Integrate, SingleRingStaysRigid) {
  const int n = 5;
  const double m0 = 0.9;
  const BodyList b = realize(RingSystem::aligned(n, {1.0}), Masses{m0, {single_ring_mass(n, m0)}});
  const IntegrationReport r = integrate_check(b, kPi / 4, 256);
  EXPECT_TRUE(r.completed);
  EXPECT_LT(r.max_deviation, 1e-10);
  EXPECT_FALSE(r.first_exceedance.has_value());
}

TEST(Integrate, StepHalvingConverges) {
  const int n = 4;
  const BodyList b = realize(RingSystem::aligned(n, {1.0}), Masses{0.95, {single_ring_mass(n, 0.95)}});
  BodyList off = b;
  for (auto& m : off.masses) m *= 1.01;
  const double d1 = integrate_check(off, 1.0, 32).max_deviation;
  const double d2 = integrate_check(off, 1.0, 64).max_deviation;
  const double d3 = integrate_check(off, 1.0, 128).max_deviation;
  EXPECT_NEAR(d2, d3, 1e-9);
  EXPECT_LT(std::abs(d2 - d3), std::abs(d1 - d2) + 1e-15);
}

TEST(Integrate, OffEquilibriumDrifts) {
  const int n = 5;
  const BodyList b = realize(RingSystem::aligned(n, {1.0}), Masses{0.9, {1.01 * single_ring_mass(n, 0.9)}});
  const double a = integrate_check(b, 0.5, 64).max_deviation;
  const double c = integrate_check(b, 1.0, 128).max_deviation;
  EXPECT_GT(a, 1e-6);
  EXPECT_GT(c, a);
}

TEST(Integrate, RejectsBadInput) {
  BodyList b = realize(RingSystem::aligned(3, {1.0}), Masses{0.0, {0.1}});
  EXPECT_THROW(integrate_check(b, 0.0, 10), DomainError);
  EXPECT_THROW(integrate_check(b, 7.0, 10), DomainError);
  EXPECT_THROW(integrate_check(b, 1.0, 0), DomainError);
  BodyList close;
  close.positions = {{1, 0}, {1 + 1e-7, 0}};
  close.masses = {1, 1};
  EXPECT_THROW(integrate_check(close, 0.1, 10), CloseEncounterError);
}
