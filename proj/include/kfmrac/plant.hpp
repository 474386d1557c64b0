// Ground-truth plant models and noise injection.
//
// Nothing in here is visible to the controller: the closed loop only sees
// the measurement y produced by measure().
#pragma once

#include <cstdint>
#include <random>
#include <variant>

namespace kfmrac {

/// Declared sign of the plant pole. The designer is assumed to know it.
enum class PoleSign { NonPositive, Positive };

/// x' = a x + b (u - w)
struct LinearPlantParams {
  double a = -1.0;
  double b = 1.0;
  double w = 0.0;
};

/// 1-DOF surge: m v' = tau - d_l v - d_q v |v|
///
/// Default coefficients are illustrative desk-scale values, not measured
/// vehicle data.
struct SurgePlantParams {
  double m_total = 10.0;  // kg, including added mass
  double d_l = 5.0;       // kg/s
  double d_q = 10.0;      // kg/m
};

using PlantParams = std::variant<LinearPlantParams, SurgePlantParams>;

double linear_plant_deriv(double x, double u, const LinearPlantParams& p);
double surge_plant_deriv(double v, double tau, const SurgePlantParams& p);
double plant_deriv(double x, double u, const PlantParams& p);

/// Sign of the plant's (linearised at rest) pole. For the surge model this
/// is -d_l/m_total, never positive.
PoleSign plant_pole_sign(const PlantParams& p);

/// Pole and input gain of the plant, linearised at the origin.
struct LinearisedPlant {
  double a;
  double b;
};
LinearisedPlant linearise(const PlantParams& p);

/// Seeded standard-normal stream. One per noise channel so toggling one
/// channel never shifts the samples of another.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t channel);

  double standard_normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// y = x + v, v ~ N(0, variance). variance == 0 returns x unchanged and
/// does not consume a sample.
double measure(double x, NoiseStream& rng, double variance);

}  // namespace kfmrac
