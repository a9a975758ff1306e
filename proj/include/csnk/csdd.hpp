#pragma once

// Complex-step directional derivatives of an objective along a whole
// parameter direction p:
//
//   csdd_grad_hv: one complex forward+backward pass at w + h*i*p. The real
//                 part of the gradient is the gradient at w, its imaginary
//                 part divided by h is the Hessian-vector product H p.
//   csdd2:        one bicomplex forward pass at w + (h*i1 + h*i2) p. The
//                 mixed i1*i2 coefficient divided by h^2 is p'Hp.

#include <span>
#include <vector>

#include "csnk/csfd.hpp"
#include "csnk/objective.hpp"

namespace csnk {

struct GradAndHv {
  std::vector<double> g;
  std::vector<double> hv;
};

GradAndHv csdd_grad_hv(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
                       double h = kDefaultCsfd1Step);

/// p'Hp, the second directional derivative of the loss along p.
double csdd2(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
             double h = kDefaultCsfd2Step);

/// Real forward-difference counterpart of csdd_grad_hv:
/// hv = (g(w + h p) - g(w)) / h. Used to study finite-difference fragility.
GradAndHv ffd_grad_hv(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
                      double h);

inline constexpr std::size_t kBruteHessianMaxDim = 200;

/// Dense Hessian assembled entry by entry from second-order complex steps:
/// H[a][b] = Im2(f(w + h i1 e_a + h i2 e_b)) / h^2. Row-major N x N.
/// Oracle for tests; refuses N > kBruteHessianMaxDim.
std::vector<double> brute_hessian(const Objective& objective, std::span<const double> w, Rows rows,
                                  double h = kDefaultCsfd2Step);

// Network conveniences over a single batch.
GradAndHv csdd_grad_hv(const Model& model, LossKind loss, std::span<const double> w, std::span<const double> p,
                       const Batch& batch, double h = kDefaultCsfd1Step);
double csdd2(const Model& model, LossKind loss, std::span<const double> w, std::span<const double> p,
             const Batch& batch, double h = kDefaultCsfd2Step);
std::vector<double> brute_hessian(const Model& model, LossKind loss, std::span<const double> w, const Batch& batch,
                                  double h = kDefaultCsfd2Step);

}  // namespace csnk
