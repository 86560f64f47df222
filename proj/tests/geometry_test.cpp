#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "capwave/geometry.hpp"

using namespace capwave;

namespace {

double oracle_gap(const OracleEstimate& e, double reference) {
  return std::abs(e.value - reference);
}

}  // namespace

TEST(SolveS, PoleAndMidpoint) {
  DispersionLaw law;
  EXPECT_EQ(solve_s(law, 0.0, 1.0), 0.0);
  EXPECT_EQ(solve_s(law, 1.0, 1.0), 0.0);
  const double expected = std::sqrt(std::pow(2.0, -4.0 / 3.0) - 0.25);
  EXPECT_NEAR(solve_s(law, 0.5, 1.0), expected, 1e-14);
  EXPECT_NEAR(expected, 0.3832105, 5e-8);
}

TEST(SolveS, ScalesLinearlyWithP) {
  DispersionLaw law;
  const double s1 = solve_s(law, 0.3, 1.0);
  EXPECT_NEAR(solve_s(law, 0.3, 3.7), 3.7 * s1, 1e-12 * 3.7 * s1);
}

TEST(SolveS, SymmetricAboutHalf) {
  DispersionLaw law;
  for (int i = 1; i < 200; ++i) {
    const double alpha = i / 200.0;
    EXPECT_NEAR(solve_s(law, alpha, 1.0), solve_s(law, 1.0 - alpha, 1.0), 1e-12) << alpha;
  }
}

TEST(SolveS, IncreasingOnLowerHalf) {
  DispersionLaw law;
  double prev = 0.0;
  for (int i = 1; i <= 500; ++i) {
    const double s = solve_s(law, 0.5 * i / 500.0, 1.0);
    EXPECT_GT(s, prev) << i;
    prev = s;
  }
}

TEST(SolveS, SurfaceLiesInTheBallOnDiameterP) {
  for (double gamma : {1.2, 1.5, 2.0}) {
    DispersionLaw law(gamma, 1.0, 3);
    for (double p : {0.01, 1.0, 50.0}) {
      for (int i = 0; i <= 100; ++i) {
        const double alpha = i / 100.0;
        const double s = solve_s(law, alpha, p);
        const double dist = std::hypot(alpha * p - 0.5 * p, s);
        EXPECT_LE(dist, 0.5 * p + 1e-12 * p) << gamma << " " << p << " " << alpha;
        EXPECT_NEAR(gain_surface_residual(law, alpha, s, p), 0.0, 1e-12 * law.energy(p));
      }
    }
  }
}

TEST(SolveS, RejectsAlphaOutsideUnitInterval) {
  DispersionLaw law;
  EXPECT_THROW(solve_s(law, -0.1, 1.0), std::domain_error);
  EXPECT_THROW(solve_s(law, 1.1, 1.0), std::domain_error);
}

TEST(ReducedWeights, GainIntegralHomogeneity) {
  DispersionLaw law(1.5, 1.0, 3);
  const auto one = [](double) { return 1.0; };
  const double i1 = build_weight_table(law, 1.0, SurfaceKind::Gain).integrate(one);
  const double i2 = build_weight_table(law, 2.0, SurfaceKind::Gain).integrate(one);
  EXPECT_NEAR(i2 / i1, std::pow(2.0, 1.5), 1e-12);
  EXPECT_NEAR(i2 / i1, 2.8284, 5e-5);
}

TEST(ReducedWeights, NormalizedAreaIndependentOfP) {
  for (int dim : {2, 3}) {
    DispersionLaw law(1.5, 1.0, dim);
    const auto one = [](double) { return 1.0; };
    const double ref = build_weight_table(law, 1.0, SurfaceKind::Gain).integrate(one);
    EXPECT_GT(ref, 0.0);
    for (double p : {0.01, 0.1, 10.0, 100.0}) {
      const double area = build_weight_table(law, p, SurfaceKind::Gain).integrate(one);
      EXPECT_NEAR(std::pow(p, 1.5 - dim) * area, ref, 1e-10 * ref) << dim << " " << p;
    }
  }
}

TEST(ReducedWeights, LossWeightScaling) {
  for (int dim : {2, 3}) {
    DispersionLaw law(1.5, 1.0, dim);
    const double lambda = 2.0;
    const double expected = std::pow(lambda, dim - 1.0 - law.gamma());
    for (double u : {0.1, 0.7, 3.0}) {
      const double w = loss_weight(law, u, 1.3);
      EXPECT_NEAR(loss_weight(law, lambda * u, lambda * 1.3), expected * w, 1e-13 * expected * w);
    }
  }
}

TEST(ReducedWeights, GainWeightScaling) {
  for (int dim : {2, 3}) {
    DispersionLaw law(1.5, 1.0, dim);
    const double expected = std::pow(3.0, dim - 1.0 - law.gamma());
    for (double u : {0.1, 0.5, 0.9}) {
      const double w = gain_weight(law, u, 1.0);
      EXPECT_NEAR(gain_weight(law, 3.0 * u, 3.0), expected * w, 1e-13 * expected * w);
    }
  }
}

TEST(ReducedWeights, LossEnvelopeInThreeDimensions) {
  DispersionLaw law(1.5, 1.0, 3);
  double sup = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double u = std::pow(10.0, -4.0 + 7.0 * i / 2000.0);
    const double envelope = u * std::pow(1.0 + u, 2.0 - law.gamma());
    sup = std::max(sup, loss_weight(law, u, 1.0) / envelope);
  }
  EXPECT_LE(sup, 1.0 / law.gamma() + 1e-15);
  EXPECT_GT(sup, 0.99 / law.gamma());
}

TEST(ReducedWeights, TwoDimensionalGainHasEndpointSingularity) {
  DispersionLaw law(1.5, 1.0, 2);
  EXPECT_TRUE(is_integrable_singularity(gain_weight(law, 1.0, 1.0)));
  EXPECT_FALSE(is_integrable_singularity(gain_weight(law, 0.5, 1.0)));
  // near u = p: sin(phi) ~ r / p with r ~ (p - u)^(1/gamma), so the
  // density grows like (p - u)^(-(gamma - 1) / gamma)
  const double w1 = gain_weight(law, 1.0 - 1e-6, 1.0);
  const double w2 = gain_weight(law, 1.0 - 4e-6, 1.0);
  EXPECT_NEAR(w1 / w2, std::cbrt(4.0), 1e-3);
}

TEST(ReducedWeights, ThreeDimensionalGainVanishesAtEnds) {
  DispersionLaw law(1.5, 1.0, 3);
  EXPECT_EQ(gain_weight(law, 0.0, 1.0), 0.0);
  EXPECT_EQ(gain_weight(law, 1.0, 1.0), 0.0);
  EXPECT_GT(gain_weight(law, 0.5, 1.0), 0.0);
}

TEST(ReducedWeights, IncludedSineUsesStableHeron) {
  EXPECT_NEAR(detail::included_sine(5.0, 3.0, 4.0), 0.8, 1e-15);
  const double s = detail::included_sine(1.0, 1e-8, 1.0 - 1e-8 * 0.5);
  EXPECT_GT(s, 0.0);
  EXPECT_TRUE(std::isfinite(s));
}

TEST(Oracle, ConstantOnGainSurfaceAcrossSmearing) {
  DispersionLaw law(1.5, 1.0, 3);
  const double ref = build_weight_table(law, 1.0, SurfaceKind::Gain).integrate([](double) {
    return 1.0;
  });
  for (double eps : {1e-2, 1e-3}) {
    const auto e = mc_surface_oracle(law, 1.0, SurfaceKind::Gain,
                                     std::function<double(double)>([](double) { return 1.0; }),
                                     eps, 4'000'000, 11);
    EXPECT_LE(oracle_gap(e, ref), 3.0 * e.std_error) << eps;
    EXPECT_LE(oracle_gap(e, ref), 0.02 * ref) << eps;
  }
}

TEST(Oracle, SquareOnGainSurface) {
  DispersionLaw law(1.5, 1.0, 3);
  const auto sq = [](double u) { return u * u; };
  const double ref = build_weight_table(law, 1.0, SurfaceKind::Gain).integrate(sq);
  const auto e = mc_surface_oracle(law, 1.0, SurfaceKind::Gain, std::function<double(double)>(sq),
                                   0.01, 4'000'000, 12);
  EXPECT_LE(oracle_gap(e, ref), 0.02 * ref);
}

TEST(Oracle, ConstantOnTruncatedLossSurface) {
  DispersionLaw law(1.5, 1.0, 3);
  const double ref = build_weight_table(law, 1.0, SurfaceKind::Loss, 4.0).integrate([](double) {
    return 1.0;
  });
  const auto e =
      mc_surface_oracle(law, 1.0, SurfaceKind::Loss,
                        std::function<double(double)>([](double) { return 1.0; }), 0.01,
                        4'000'000, 13, 4.0);
  EXPECT_LE(oracle_gap(e, ref), 0.02 * ref);
}

TEST(Oracle, LocalWindowsMatchPointDensities) {
  DispersionLaw law(1.5, 1.0, 3);
  struct Case {
    SurfaceKind kind;
    double centre;
  };
  for (const auto& c : {Case{SurfaceKind::Gain, 0.5}, Case{SurfaceKind::Loss, 1.0}}) {
    const auto window = [&](double u) {
      const double z = (u - c.centre) / 0.1;
      return std::exp(-z * z);
    };
    const double u_trunc = c.kind == SurfaceKind::Loss ? 2.0 : 0.0;
    const double ref = build_weight_table(law, 1.0, c.kind, u_trunc).integrate(window);
    const auto e = mc_surface_oracle(law, 1.0, c.kind, std::function<double(double)>(window),
                                     0.01, 8'000'000, 21, u_trunc);
    EXPECT_LE(oracle_gap(e, ref), 0.01 * ref) << to_string(c.kind);
    EXPECT_LE(oracle_gap(e, ref), 3.0 * e.std_error) << to_string(c.kind);
  }
}

TEST(Oracle, IndependentOfThreadCount) {
  DispersionLaw law(1.5, 1.0, 2);
  std::vector<std::function<double(double)>> fns{[](double u) { return std::exp(-u); }};
  const auto a = mc_surface_oracle(law, 1.0, SurfaceKind::Loss, fns, 0.01, 300'000, 5, 4.0, {1});
  const auto b = mc_surface_oracle(law, 1.0, SurfaceKind::Loss, fns, 0.01, 300'000, 5, 4.0, {3});
  EXPECT_EQ(a[0].value, b[0].value);
  EXPECT_EQ(a[0].std_error, b[0].std_error);
  EXPECT_EQ(a[0].hits, b[0].hits);
}

TEST(Oracle, RejectsBadArguments) {
  DispersionLaw law;
  std::function<double(double)> one = [](double) { return 1.0; };
  EXPECT_THROW(mc_surface_oracle(law, 1.0, SurfaceKind::Loss, one, 0.01, 1000, 1),
               std::domain_error);
  EXPECT_THROW(mc_surface_oracle(law, 1.0, SurfaceKind::Gain, one, 0.2, 1000, 1),
               std::domain_error);
}
