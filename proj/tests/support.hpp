#pragma once

// Shared fixtures for the unit tests: random small networks and batches,
// simple vector helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "csnk/network.hpp"
#include "csnk/objective.hpp"
#include "csnk/rng.hpp"

namespace testing {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double rel(double approx, double exact) { return std::fabs(approx - exact) / std::max(std::fabs(exact), 1e-300); }

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

inline std::vector<double> random_vector(std::size_t n, csnk::Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

inline std::vector<double> matvec(const std::vector<double>& a, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += a[i * n + j] * x[j];
  return y;
}

struct NetCase {
  csnk::Model model;
  csnk::LossKind loss;
  csnk::Batch batch;
  std::vector<double> w;
};

inline csnk::Batch random_batch(std::size_t rows, std::size_t in, std::size_t out, csnk::LossKind loss,
                                csnk::Rng& rng) {
  csnk::Batch b;
  b.inputs = csnk::Tensor<double>({rows, in}, random_vector(rows * in, rng));
  if (loss == csnk::LossKind::MSE) {
    b.targets = csnk::Tensor<double>({rows, out}, random_vector(rows * out, rng));
  } else {
    const std::size_t classes = loss == csnk::LossKind::Logistic ? 2 : out;
    for (std::size_t r = 0; r < rows; ++r) b.labels.push_back(static_cast<int>(rng.below(classes)));
  }
  return b;
}

/// A random dense net with smooth activations and at most `max_params`
/// parameters.
inline NetCase random_net(std::uint64_t seed, std::size_t max_params = 60) {
  csnk::Rng rng(seed);
  const csnk::Activation acts[] = {csnk::Activation::Sigmoid, csnk::Activation::Tanh, csnk::Activation::Sin,
                                   csnk::Activation::None};
  const csnk::LossKind losses[] = {csnk::LossKind::CrossEntropySoftmax, csnk::LossKind::MSE,
                                   csnk::LossKind::Hinge2, csnk::LossKind::Logistic};
  for (;;) {
    const std::size_t in = 1 + rng.below(4);
    const std::size_t hid = 1 + rng.below(5);
    const csnk::LossKind loss = losses[rng.below(4)];
    const std::size_t out = loss == csnk::LossKind::Logistic ? 1 : 2 + rng.below(2);
    const bool deep = rng.below(2) == 1;
    std::vector<std::size_t> widths{in, hid};
    if (deep) widths.push_back(1 + rng.below(4));
    widths.push_back(out);
    csnk::Model model = csnk::Model::mlp(widths, acts[rng.below(4)]);
    if (model.param_count() > max_params) continue;
    csnk::Batch batch = random_batch(2 + rng.below(5), in, out, loss, rng);
    std::vector<double> w = random_vector(model.param_count(), rng, 0.7);
    return {std::move(model), loss, std::move(batch), std::move(w)};
  }
}

}  // namespace testing
