#include "csnk/first_order.hpp"

#include <cmath>

#include "csnk/errors.hpp"

namespace csnk {

void sgd_step(std::span<double> w, std::span<const double> g, double lr) {
  if (w.size() != g.size()) throw ShapeError("sgd_step: length mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

void adam_step(AdamState& state, std::span<double> w, std::span<const double> g, const AdamConfig& cfg) {
  if (w.size() != g.size() || state.m.size() != w.size()) throw ShapeError("adam_step: length mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace csnk
