#include "csnk/synthetic.hpp"

#include <cmath>

#include "csnk/rng.hpp"

namespace csnk {

QuadraticObjective::QuadraticObjective(std::vector<double> a, std::vector<double> b)
    : a_(std::move(a)), b_(std::move(b)) {
  const std::size_t n = b_.size();
  if (a_.size() != n * n) throw ShapeError("quadratic matrix must be n x n");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a_[i * n + j] != a_[j * n + i]) throw ShapeError("quadratic matrix must be symmetric");
}

// Modified Gram-Schmidt on a Gaussian matrix; vector k stored contiguously.
std::vector<double> random_orthogonal(std::size_t n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x0a7));
  std::vector<double> q(n * n);
  for (auto& v : q) v = rng.normal();
  for (std::size_t k = 0; k < n; ++k) {
    double* qk = q.data() + k * n;
    for (std::size_t j = 0; j < k; ++j) {
      const double* qj = q.data() + j * n;
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += qj[i] * qk[i];
      for (std::size_t i = 0; i < n; ++i) qk[i] -= dot * qj[i];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += qk[i] * qk[i];
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) qk[i] /= norm;
  }
  return q;
}

std::vector<double> matrix_with_spectrum(const std::vector<double>& eigs, std::uint64_t seed) {
  const std::size_t n = eigs.size();
  const auto q = random_orthogonal(n, seed);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q[k * n + i] * eigs[k] * q[k * n + j];
      a[i * n + j] = s;
      a[j * n + i] = s;
    }
  return a;
}

std::vector<double> random_spd(std::size_t n, double cond, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5bd));
  std::vector<double> eigs(n);
  for (auto& e : eigs) e = std::exp(rng.uniform01() * std::log(cond));
  return matrix_with_spectrum(eigs, seed);
}

}  // namespace csnk
