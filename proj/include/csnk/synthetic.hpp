#pragma once

// Seeded analytic objectives for exercising the optimizer without data:
// quadratics f(w) = 1/2 w'Aw + b'w and separable quartics f(w) = sum c_i w_i^4.
// Row subsets are ignored; every minibatch sees the same function.

#include <cstdint>
#include <span>
#include <vector>

#include "csnk/objective.hpp"

namespace csnk {

class QuadraticObjective : public ObjectiveFor<QuadraticObjective> {
 public:
  /// `a` is a symmetric n x n matrix in row-major order.
  QuadraticObjective(std::vector<double> a, std::vector<double> b);

  std::size_t dim() const override { return b_.size(); }
  std::size_t sample_count() const override { return 1; }

  const std::vector<double>& matrix() const { return a_; }
  const std::vector<double>& linear() const { return b_; }

  template <Scalar S>
  S value(std::span<const S> w, Rows) const {
    const std::size_t n = b_.size();
    S f(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      S aw(0.0);
      for (std::size_t j = 0; j < n; ++j) aw += w[j] * a_[i * n + j];
      f += w[i] * (0.5 * aw + b_[i]);
    }
    return f;
  }

  template <Scalar S>
  S value_and_gradient(std::span<const S> w, Rows rows, std::span<S> grad) const {
    const std::size_t n = b_.size();
    for (std::size_t i = 0; i < n; ++i) {
      S aw(b_[i]);
      for (std::size_t j = 0; j < n; ++j) aw += w[j] * a_[i * n + j];
      grad[i] = aw;
    }
    return value<S>(w, rows);
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

class QuarticObjective : public ObjectiveFor<QuarticObjective> {
 public:
  explicit QuarticObjective(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  std::size_t dim() const override { return c_.size(); }
  std::size_t sample_count() const override { return 1; }

  template <Scalar S>
  S value(std::span<const S> w, Rows) const {
    S f(0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) f += pow_int(w[i], 4) * c_[i];
    return f;
  }

  template <Scalar S>
  S value_and_gradient(std::span<const S> w, Rows rows, std::span<S> grad) const {
    for (std::size_t i = 0; i < c_.size(); ++i) grad[i] = pow_int(w[i], 3) * (4.0 * c_[i]);
    return value<S>(w, rows);
  }

 private:
  std::vector<double> c_;
};

/// Q diag(eigs) Q' with Q a seeded random orthogonal matrix (row-major).
std::vector<double> matrix_with_spectrum(const std::vector<double>& eigs, std::uint64_t seed);

/// Seeded SPD matrix with eigenvalues spread log-uniformly over [1, cond].
std::vector<double> random_spd(std::size_t n, double cond, std::uint64_t seed);

/// Columns of the orthogonal factor used by matrix_with_spectrum for the same
/// seed: eigenvector k is entries [k*n, (k+1)*n).
std::vector<double> random_orthogonal(std::size_t n, std::uint64_t seed);

}  // namespace csnk
