#pragma once

#include <cstdint>
#include <random>

#include "lightcorners/geometry.hpp"

namespace lightcorners {

// Zero-inflated, truncated isotropic Gaussian perturbation of a light
// center, emulating the error of an upstream center detector.
struct NoiseConfig {
  double p_zero = 0.3;  // probability of exactly zero noise
  double sigma = 6.0;   // pixels
  double clip = 16.0;   // pixels, per axis
  std::uint64_t seed = 7;

  void validate() const;
  bool operator==(const NoiseConfig&) const = default;
};

using Rng = std::mt19937_64;

// Advances `rng`; the result is a pure function of (cfg, rng state).
Point sample_noise(const NoiseConfig& cfg, Rng& rng);

// Center + epsilon, clamped back into the vehicle box.
Point noisy_center(const LightAnnotation& annotation, Point epsilon);

struct NoisyCenter {
  Point center;
  Point epsilon;  // as drawn, before clamping
};

NoisyCenter apply_noise(const LightAnnotation& annotation, const NoiseConfig& cfg, Rng& rng);

// Seed of an independent stream for draw `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace lightcorners
