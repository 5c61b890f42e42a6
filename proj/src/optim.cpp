#include "lightcorners/optim.hpp"

#include <algorithm>
#include <cmath>

#include "lightcorners/errors.hpp"

namespace lightcorners {

AdamState AdamState::for_params(const RegressorParams& params) {
  AdamState state;
  for (const auto& t : params.tensors) {
    state.m.emplace_back(t.tensor.size(), 0.0);
    state.v.emplace_back(t.tensor.size(), 0.0);
  }
  return state;
}

void adam_step(RegressorParams& params, const std::vector<std::vector<double>>& grads, AdamState& state,
               const AdamConfig& cfg) {
  require(grads.size() == params.tensors.size() && state.m.size() == params.tensors.size(), ErrorKind::InvalidInput,
          "adam_step: parameter, gradient and state counts differ");
  ++state.step;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    auto theta = params.tensors[t].tensor.values();
    const auto& g = grads[t];
    auto& m = state.m[t];
    auto& v = state.v[t];
    require(g.size() == theta.size(), ErrorKind::InvalidInput, "adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double grad = g[i] + cfg.weight_decay * theta[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad * grad;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void SwaState::add(const RegressorParams& params) {
  if (mean.empty()) {
    for (const auto& t : params.tensors) mean.emplace_back(t.tensor.size(), 0.0);
  }
  require(mean.size() == params.tensors.size(), ErrorKind::InvalidInput, "SWA snapshot has a different layout");
  ++count;
  const double k = static_cast<double>(count);
  for (std::size_t t = 0; t < mean.size(); ++t) {
    const auto values = params.tensors[t].tensor.values();
    for (std::size_t i = 0; i < values.size(); ++i) mean[t][i] += (values[i] - mean[t][i]) / k;
  }
}

RegressorParams SwaState::average(const RegressorParams& like) const {
  require(count > 0, ErrorKind::InvalidInput, "SWA average of zero snapshots");
  RegressorParams out = like.clone();
  for (std::size_t t = 0; t < mean.size(); ++t) {
    auto values = out.tensors[t].tensor.values();
    std::copy(mean[t].begin(), mean[t].end(), values.begin());
  }
  return out;
}

void swa_update(SwaState& state, const RegressorParams& params, int epoch, const SwaSchedule& schedule) {
  if (epoch >= schedule.start_epoch) state.add(params);
}

double scheduled_lr(double base_lr, int epoch, const SwaSchedule& schedule) noexcept {
  return epoch >= schedule.start_epoch ? base_lr * schedule.lr_decay : base_lr;
}

}  // namespace lightcorners
