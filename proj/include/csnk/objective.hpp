#pragma once

// The optimizer's view of a training problem: a loss over a dataset that can
// be evaluated on any subset of rows, in real, complex or bicomplex
// arithmetic, with gradients in real or complex arithmetic.

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "csnk/multicomplex.hpp"
#include "csnk/network.hpp"

namespace csnk {

/// Row indices of one minibatch.
using Rows = std::span<const std::size_t>;

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_count() const = 0;

  virtual double loss(std::span<const double> w, Rows rows) const = 0;
  virtual Cplx loss(std::span<const Cplx> w, Rows rows) const = 0;
  virtual BiCplx loss(std::span<const BiCplx> w, Rows rows) const = 0;

  virtual double loss_and_gradient(std::span<const double> w, Rows rows, std::span<double> grad) const = 0;
  virtual Cplx loss_and_gradient(std::span<const Cplx> w, Rows rows, std::span<Cplx> grad) const = 0;

  std::vector<double> gradient(std::span<const double> w, Rows rows) const {
    std::vector<double> g(dim());
    loss_and_gradient(w, rows, g);
    return g;
  }

  /// 0, 1, ..., sample_count() - 1.
  std::vector<std::size_t> all_rows() const {
    std::vector<std::size_t> rows(sample_count());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
  }
};

/// Implements the virtual interface from two member templates of Derived:
///   template <Scalar S> S value(std::span<const S>, Rows) const;
///   template <Scalar S> S value_and_gradient(std::span<const S>, Rows, std::span<S>) const;
template <class Derived>
class ObjectiveFor : public Objective {
 public:
  double loss(std::span<const double> w, Rows rows) const override { return self().template value<double>(w, rows); }
  Cplx loss(std::span<const Cplx> w, Rows rows) const override { return self().template value<Cplx>(w, rows); }
  BiCplx loss(std::span<const BiCplx> w, Rows rows) const override { return self().template value<BiCplx>(w, rows); }

  double loss_and_gradient(std::span<const double> w, Rows rows, std::span<double> grad) const override {
    return self().template value_and_gradient<double>(w, rows, grad);
  }
  Cplx loss_and_gradient(std::span<const Cplx> w, Rows rows, std::span<Cplx> grad) const override {
    return self().template value_and_gradient<Cplx>(w, rows, grad);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// A network with a loss over a fixed set of samples.
class NetworkObjective : public ObjectiveFor<NetworkObjective> {
 public:
  NetworkObjective(Model model, LossKind loss, Batch samples);

  std::size_t dim() const override { return model_.param_count(); }
  std::size_t sample_count() const override { return samples_.size(); }

  const Model& model() const { return model_; }
  LossKind loss_kind() const { return loss_; }
  const Batch& samples() const { return samples_; }

  /// The rows gathered into a standalone batch.
  Batch gather(Rows rows) const;

  template <Scalar S>
  S value(std::span<const S> w, Rows rows) const {
    if (covers_all(rows)) return forward<S>(model_, loss_, w, samples_);
    return forward<S>(model_, loss_, w, gather(rows));
  }

  template <Scalar S>
  S value_and_gradient(std::span<const S> w, Rows rows, std::span<S> grad) const {
    if (covers_all(rows)) return csnk::value_and_gradient<S>(model_, loss_, w, samples_, grad);
    return csnk::value_and_gradient<S>(model_, loss_, w, gather(rows), grad);
  }

 private:
  bool covers_all(Rows rows) const;

  Model model_;
  LossKind loss_;
  Batch samples_;
};

}  // namespace csnk
