#include "kfmrac/plant.hpp"

#include <cmath>

namespace kfmrac {

double linear_plant_deriv(double x, double u, const LinearPlantParams& p) {
  return p.a * x + p.b * (u - p.w);
}

double surge_plant_deriv(double v, double tau, const SurgePlantParams& p) {
  return (tau - p.d_l * v - p.d_q * v * std::abs(v)) / p.m_total;
}

double plant_deriv(double x, double u, const PlantParams& p) {
  if (const auto* lin = std::get_if<LinearPlantParams>(&p)) {
    return linear_plant_deriv(x, u, *lin);
  }
  return surge_plant_deriv(x, u, std::get<SurgePlantParams>(p));
}

LinearisedPlant linearise(const PlantParams& p) {
  if (const auto* lin = std::get_if<LinearPlantParams>(&p)) {
    return {lin->a, lin->b};
  }
  const auto& s = std::get<SurgePlantParams>(p);
  return {-s.d_l / s.m_total, 1.0 / s.m_total};
}

PoleSign plant_pole_sign(const PlantParams& p) {
  return linearise(p).a > 0.0 ? PoleSign::Positive : PoleSign::NonPositive;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(channel)};
  engine_.seed(seq);
}

double measure(double x, NoiseStream& rng, double variance) {
  if (variance == 0.0) return x;
  return x + std::sqrt(variance) * rng.standard_normal();
}

}  // namespace kfmrac
