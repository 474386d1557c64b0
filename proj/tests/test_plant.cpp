#include <gtest/gtest.h>

#include <cmath>

#include "kfmrac/plant.hpp"

namespace kfmrac {
namespace {

TEST(LinearPlant, Equilibrium) {
  EXPECT_EQ(linear_plant_deriv(0.0, 0.0, {-1.0, 1.0, 0.0}), 0.0);
}

TEST(LinearPlant, PureDecay) {
  EXPECT_EQ(linear_plant_deriv(1.0, 0.0, {-1.0, 1.0, 0.0}), -1.0);
}

TEST(LinearPlant, InputMinusDisturbance) {
  EXPECT_DOUBLE_EQ(linear_plant_deriv(0.0, 1.0, {0.0, 2.0, 0.5}), 1.0);
}

TEST(SurgePlant, RestEquilibrium) {
  EXPECT_EQ(surge_plant_deriv(0.0, 0.0, {}), 0.0);
  EXPECT_EQ(surge_plant_deriv(0.0, 0.0, {3.0, 1.0, 2.0}), 0.0);
}

TEST(SurgePlant, SteadyStateForceBalance) {
  const SurgePlantParams p;
  const double v = 0.2;
  EXPECT_NEAR(surge_plant_deriv(v, p.d_l * v + p.d_q * v * v, p), 0.0, 1e-15);
}

TEST(SurgePlant, QuadraticDampingKeepsSign) {
  EXPECT_NEAR(surge_plant_deriv(-0.2, 0.0, {10.0, 5.0, 10.0}), 0.14, 1e-15);
}

TEST(SurgePlant, OddSymmetry) {
  const SurgePlantParams p{7.0, 3.0, 11.0};
  for (double v : {-1.3, -0.2, 0.0, 0.05, 0.7}) {
    for (double tau : {-4.0, -0.1, 0.0, 2.5}) {
      EXPECT_EQ(surge_plant_deriv(-v, -tau, p), -surge_plant_deriv(v, tau, p));
    }
  }
}

TEST(Plant, DispatchMatchesModels) {
  const LinearPlantParams lin{0.3, -2.0, 0.1};
  const SurgePlantParams surge{};
  EXPECT_EQ(plant_deriv(0.4, 1.2, lin), linear_plant_deriv(0.4, 1.2, lin));
  EXPECT_EQ(plant_deriv(0.4, 1.2, surge), surge_plant_deriv(0.4, 1.2, surge));
}

TEST(Plant, Linearisation) {
  const auto s = linearise(SurgePlantParams{10.0, 5.0, 10.0});
  EXPECT_DOUBLE_EQ(s.a, -0.5);
  EXPECT_DOUBLE_EQ(s.b, 0.1);
  const auto l = linearise(LinearPlantParams{0.05, 2.0, 0.3});
  EXPECT_EQ(l.a, 0.05);
  EXPECT_EQ(l.b, 2.0);
}

TEST(Plant, PoleSign) {
  EXPECT_EQ(plant_pole_sign(LinearPlantParams{0.05, 1.0, 0.0}), PoleSign::Positive);
  EXPECT_EQ(plant_pole_sign(LinearPlantParams{0.0, 1.0, 0.0}), PoleSign::NonPositive);
  EXPECT_EQ(plant_pole_sign(SurgePlantParams{}), PoleSign::NonPositive);
}

TEST(Measure, NoiselessReturnsStateWithoutDrawing) {
  NoiseStream a(5, 1);
  NoiseStream b(5, 1);
  EXPECT_EQ(measure(0.2, a, 0.0), 0.2);
  EXPECT_EQ(a.standard_normal(), b.standard_normal());
}

TEST(Measure, SampleMeanAndVariance) {
  constexpr int kN = 100000;
  constexpr double kR = 3e-4;
  NoiseStream rng(42, 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double v = measure(0.0, rng, kR);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / kN;
  const double var = sum_sq / kN - mean * mean;
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(kR) / std::sqrt(double(kN)));
  EXPECT_NEAR(var, kR, 0.05 * kR);
}

TEST(NoiseStream, SameSeedSameSequence) {
  NoiseStream a(7, 1);
  NoiseStream b(7, 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.standard_normal(), b.standard_normal());
}

TEST(NoiseStream, ChannelsAreIndependentStreams) {
  NoiseStream a(7, 1);
  NoiseStream b(7, 2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.standard_normal() == b.standard_normal();
  EXPECT_EQ(equal, 0);
}

}  // namespace
}  // namespace kfmrac
