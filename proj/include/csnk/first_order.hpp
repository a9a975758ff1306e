#pragma once

// First-order baselines: plain SGD and Adam with bias-corrected moments.

#include <span>
#include <vector>

namespace csnk {

/// w <- w - lr * g.
void sgd_step(std::span<double> w, std::span<const double> g, double lr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(AdamState& state, std::span<double> w, std::span<const double> g, const AdamConfig& cfg);

}  // namespace csnk
