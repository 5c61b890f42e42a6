#include "lightcorners/noise.hpp"

#include <cmath>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

double truncated_normal(double sigma, double clip, Rng& rng) {
  if (sigma == 0.0 || clip == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sigma);
  for (;;) {
    const double value = normal(rng);
    if (std::abs(value) <= clip) return value;
  }
}

}  // namespace

void NoiseConfig::validate() const {
  require(p_zero >= 0.0 && p_zero <= 1.0, ErrorKind::Config, "noise.p_zero must lie in [0, 1]");
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::Config, "noise.sigma must be >= 0");
  require(std::isfinite(clip) && clip >= 0.0, ErrorKind::Config, "noise.clip must be >= 0");
}

Point sample_noise(const NoiseConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < cfg.p_zero) return {0.0, 0.0};
  const double ex = truncated_normal(cfg.sigma, cfg.clip, rng);
  const double ey = truncated_normal(cfg.sigma, cfg.clip, rng);
  return {ex, ey};
}

Point noisy_center(const LightAnnotation& annotation, Point epsilon) {
  return annotation.vehicle.clamp({annotation.center.x + epsilon.x, annotation.center.y + epsilon.y});
}

NoisyCenter apply_noise(const LightAnnotation& annotation, const NoiseConfig& cfg, Rng& rng) {
  const Point epsilon = sample_noise(cfg, rng);
  return {noisy_center(annotation, epsilon), epsilon};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace lightcorners
