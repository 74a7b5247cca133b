#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

inline void validate_adamw(const AdamWConfig& c) {
  if (!(c.lr >= 0.0)) throw ConfigError("adamw: lr must be >= 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) throw ConfigError("adamw: beta1 outside [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) throw ConfigError("adamw: beta2 outside [0, 1)");
  if (!(c.eps > 0.0)) throw ConfigError("adamw: eps must be positive");
  if (!(c.weight_decay >= 0.0)) throw ConfigError("adamw: weight_decay must be >= 0");
}

struct AdamWState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};

// One descent step with bias-corrected moments and decoupled weight decay:
//   theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// `grad` points downhill-of-the-objective (a loss gradient). Callers holding
// a gradient-ascent direction negate before calling.
inline void optimizer_step(std::vector<double>& params, const std::vector<double>& grad,
                           AdamWState& state, const AdamWConfig& cfg) {
  validate_adamw(cfg);
  if (grad.size() != params.size()) throw InputError("optimizer_step: gradient size mismatch");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.v.empty()) state.v.assign(params.size(), 0.0);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InputError("optimizer_step: state size mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * params[i]);
  }
}

}  // namespace gpso
