#pragma once

#include <cstddef>
#include <vector>

#include "lightcorners/network.hpp"

namespace lightcorners {

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 1e-4;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState for_params(const RegressorParams& params);
};

// g' = g + weight_decay * theta, then the bias-corrected Adam update.
void adam_step(RegressorParams& params, const std::vector<std::vector<double>>& grads, AdamState& state,
               const AdamConfig& cfg);

// Equal-weight average of parameter snapshots, kept as a running mean.
struct SwaState {
  std::vector<std::vector<double>> mean;
  std::size_t count = 0;

  void add(const RegressorParams& params);
  // Averaged parameters; requires count > 0.
  RegressorParams average(const RegressorParams& like) const;
};

struct SwaSchedule {
  int start_epoch = 20;  // 1-based; snapshots from this epoch onward
  double lr_decay = 0.1;
};

// Adds the end-of-epoch snapshot when epoch >= start_epoch.
void swa_update(SwaState& state, const RegressorParams& params, int epoch, const SwaSchedule& schedule);

// Learning rate for a 1-based epoch: base before the SWA phase, base * decay from it on.
double scheduled_lr(double base_lr, int epoch, const SwaSchedule& schedule) noexcept;

}  // namespace lightcorners
