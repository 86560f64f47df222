#include <cmath>

#include <gtest/gtest.h>

#include "capwave/kernel.hpp"
#include "capwave/random.hpp"

using namespace capwave;

namespace {

// Random decay triad with a spread over 1e-3..1e3 and c/a over (1e-4, 1).
OnShellTriad random_triad(const DispersionLaw& law, const CounterRng& rng, std::uint64_t i) {
  const double a = std::pow(10.0, -3.0 + 6.0 * rng.uniform(2 * i));
  const double c = a * std::pow(10.0, -4.0 * rng.uniform(2 * i + 1)) * (1.0 - 1e-9);
  return make_triad(law, a, c);
}

}  // namespace

TEST(Triad, EqualPartnerExample) {
  DispersionLaw law;
  const auto t = make_triad(law, std::cbrt(4.0), 1.0);
  EXPECT_NEAR(t.b, 1.0, 1e-15);
  EXPECT_NEAR(t.dot_bc, 0.5 * (std::pow(2.0, 4.0 / 3.0) - 2.0), 1e-15);
  EXPECT_NEAR(t.dot_bc, 0.2599, 5e-5);
  EXPECT_NEAR(L_pair(t.b, t.c, t.dot_bc), 1.2599, 5e-5);
}

TEST(Triad, LPairLimits) {
  EXPECT_EQ(L_pair(1.0, 1.0, -1.0), 0.0);
  EXPECT_EQ(L_pair(1.0, 1.0, 1.0), 2.0);
}

TEST(Triad, CollinearLimitForSmallPartner) {
  DispersionLaw law;
  const auto t = make_triad(law, 1.0, 1e-7);
  EXPECT_NEAR(t.b, 1.0, 1e-9);
  EXPECT_NEAR(t.dot_ab / (t.a * t.b), 1.0, 1e-12);
  // the energy deficit a - b ~ c^(3/2) is much smaller than c, so k2 turns
  // perpendicular to k1
  EXPECT_LT(std::abs(t.dot_bc / (t.b * t.c)), 1e-3);
}

TEST(Triad, EnergyClosureAndGeometry) {
  DispersionLaw law;
  CounterRng rng(1);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto t = random_triad(law, rng, i);
    const double ea = law.energy(t.a);
    EXPECT_NEAR(law.energy(t.b) + law.energy(t.c), ea, 1e-12 * ea);
    // k = k1 + k2: |k|^2 = |k1|^2 + |k2|^2 + 2 k1.k2
    EXPECT_NEAR(t.b * t.b + t.c * t.c + 2.0 * t.dot_bc, t.a * t.a, 1e-12 * t.a * t.a);
    EXPECT_LE(std::abs(t.dot_bc), t.b * t.c * (1.0 + 1e-12));
  }
}

TEST(Triad, LossTriadOrdering) {
  DispersionLaw law;
  const auto t = make_loss_triad(law, 1.0, 2.0);
  EXPECT_NEAR(t.a, law.partner_loss(1.0, 2.0), 1e-15);
  EXPECT_EQ(t.b, 1.0);
  EXPECT_EQ(t.c, 2.0);
  EXPECT_NEAR(law.energy(t.b) + law.energy(t.c), law.energy(t.a), 1e-13 * law.energy(t.a));
}

TEST(Triad, RejectsInvalidMagnitudes) {
  DispersionLaw law;
  EXPECT_THROW(make_triad(law, 1.0, 1.5), std::domain_error);
  EXPECT_THROW(make_triad(law, 1.0, 0.0), std::domain_error);
  EXPECT_THROW(make_loss_triad(law, 0.0, 1.0), std::domain_error);
}

TEST(Kernel, LTermsBoundedOnShell) {
  DispersionLaw law;
  CounterRng rng(2);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto t = random_triad(law, rng, i);
    const double l1 = L_k_minus_k1(t);
    const double l2 = L_k_minus_k2(t);
    EXPECT_GE(l1, 0.0);
    EXPECT_LE(l1, 2.0 * t.b * t.c * (1.0 + 1e-12));
    EXPECT_GE(l2, 0.0);
    EXPECT_LE(l2, 2.0 * t.b * t.c * (1.0 + 1e-12));
  }
}

TEST(Kernel, SymmetricUnderPartnerExchange) {
  DispersionLaw law;
  CounterRng rng(3);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto t = random_triad(law, rng, i);
    const double v = v_kernel(law, t);
    EXPECT_NEAR(v_kernel(law, t.swapped()), v, 1e-13 * std::abs(v));
  }
}

TEST(Kernel, StableFormMatchesDefiningFormAwayFromCollinearity) {
  DispersionLaw law;
  for (double a : {0.3, 1.0, 7.0}) {
    for (double ratio : {0.2, 0.5, 0.7937005259840998, 0.95}) {
      const auto t = make_triad(law, a, ratio * a);
      const double v = v_kernel(law, t);
      EXPECT_NEAR(v_kernel_direct(law, t), v, 1e-11 * std::abs(v)) << a << " " << ratio;
    }
  }
}

TEST(Kernel, SmallPartnerAsymptotics) {
  DispersionLaw law;
  // V ~ c^(7/4) as c -> 0 at fixed a: halving c scales V by 2^(-7/4)
  const double v1 = v_kernel(law, make_triad(law, 1.0, 1e-6));
  const double v2 = v_kernel(law, make_triad(law, 1.0, 5e-7));
  EXPECT_NEAR(v1 / v2, std::pow(2.0, 1.75), 1e-4);
  EXPECT_TRUE(std::isfinite(v_kernel(law, make_triad(law, 1.0, 1e-12))));
}

TEST(Kernel, RadialFunctionOfMagnitudes) {
  DispersionLaw law;
  const auto t1 = make_triad(law, 2.0, 0.7);
  const auto t2 = make_loss_triad(law, t1.b, t1.c);
  EXPECT_NEAR(t2.a, t1.a, 1e-14);
  EXPECT_NEAR(v_kernel(law, t2), v_kernel(law, t1), 1e-12 * std::abs(v_kernel(law, t1)));
}

TEST(Kernel, Homogeneity) {
  DispersionLaw law;
  CounterRng rng(4);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const double a = std::pow(10.0, -2.0 + 3.0 * rng.uniform(2 * i));
    const double c = a * (0.01 + 0.98 * rng.uniform(2 * i + 1));
    const double v = v_kernel(law, make_triad(law, a, c));
    const double vs = v_kernel(law, make_triad(law, 10.0 * a, 10.0 * c));
    EXPECT_NEAR(vs / v, std::pow(10.0, 2.25), 1e-12 * std::pow(10.0, 2.25));
  }
}

TEST(Kernel, SquareBoundedByEnergyProduct) {
  DispersionLaw law;
  const double pre = kernel_prefactor(law);
  const double c0 = 36.0 * pre * pre;
  CounterRng rng(5);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto t = random_triad(law, rng, i);
    const double ratio =
        v_kernel_sq(law, t) / (law.energy(t.a) * law.energy(t.b) * law.energy(t.c));
    ASSERT_TRUE(std::isfinite(ratio));
    worst = std::max(worst, ratio);
  }
  EXPECT_LE(worst, c0);
  EXPECT_GT(worst, 0.0);
}

TEST(Kernel, PrefactorValue) {
  DispersionLaw law(1.5, 2.0, 3);
  EXPECT_NEAR(kernel_prefactor(law), 1.0 / (8.0 * M_PI * 2.0), 1e-17);
}
