#pragma once

// Feedforward networks evaluated over any scalar kind.
//
// A Model is an ordered list of dense and activation layers whose parameters
// live in one flat vector: for each dense layer, its weight matrix (out x in,
// row-major) followed by its bias. forward/backward are templates over the
// scalar kind, so the same code runs in real, complex and bicomplex
// arithmetic. Inputs and targets are always real.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csnk/errors.hpp"
#include "csnk/multicomplex.hpp"
#include "csnk/tensor.hpp"

namespace csnk {

enum class Activation { None, Sigmoid, Tanh, Relu, Elu, Sin };

std::string_view activation_name(Activation fn);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;
};

struct ActivationLayer {
  Activation fn = Activation::None;
};

using Layer = std::variant<DenseLayer, ActivationLayer>;

/// Offsets of one dense layer's parameters inside the flat vector.
struct ParamSlot {
  std::size_t layer = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;  // == weight_offset + in*out; meaningless without bias
  DenseLayer shape;
};

class Model {
 public:
  explicit Model(std::vector<Layer> layers);

  /// Dense layers of the given widths with `hidden` after every dense layer
  /// except the last, which is followed by `output` (omitted when None).
  static Model mlp(const std::vector<std::size_t>& widths, Activation hidden, Activation output = Activation::None,
                   bool bias = true);

  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<ParamSlot>& slots() const { return slots_; }
  std::size_t param_count() const { return param_count_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

  /// Fan-based uniform init: U(-sqrt(6/(in+out)), +sqrt(6/(in+out))) for
  /// weights, zero biases.
  std::vector<double> init_params(std::uint64_t seed) const;

 private:
  std::vector<Layer> layers_;
  std::vector<ParamSlot> slots_;
  std::size_t param_count_ = 0;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
};

/// Per-layer tensors in declaration order: W0 (out x in), b0 (out), W1, ...
template <Scalar S>
std::vector<Tensor<S>> unflatten(const Model& model, std::span<const S> params) {
  if (params.size() != model.param_count())
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, model needs " +
                     std::to_string(model.param_count()));
  std::vector<Tensor<S>> tensors;
  for (const auto& slot : model.slots()) {
    const auto w = params.subspan(slot.weight_offset, slot.shape.in * slot.shape.out);
    tensors.emplace_back(std::vector<std::size_t>{slot.shape.out, slot.shape.in}, std::vector<S>(w.begin(), w.end()));
    if (slot.shape.bias) {
      const auto b = params.subspan(slot.bias_offset, slot.shape.out);
      tensors.emplace_back(std::vector<std::size_t>{slot.shape.out}, std::vector<S>(b.begin(), b.end()));
    }
  }
  return tensors;
}

template <Scalar S>
std::vector<S> flatten(const Model& model, const std::vector<Tensor<S>>& tensors) {
  std::vector<S> params;
  params.reserve(model.param_count());
  std::size_t t = 0;
  for (const auto& slot : model.slots()) {
    const std::size_t parts = slot.shape.bias ? 2 : 1;
    if (t + parts > tensors.size()) throw ShapeError("too few tensors to flatten");
    if (tensors[t].size() != slot.shape.in * slot.shape.out) throw ShapeError("weight tensor size mismatch");
    params.insert(params.end(), tensors[t].values().begin(), tensors[t].values().end());
    ++t;
    if (slot.shape.bias) {
      if (tensors[t].size() != slot.shape.out) throw ShapeError("bias tensor size mismatch");
      params.insert(params.end(), tensors[t].values().begin(), tensors[t].values().end());
      ++t;
    }
  }
  if (t != tensors.size()) throw ShapeError("too many tensors to flatten");
  return params;
}

enum class LossKind { CrossEntropySoftmax, MSE, Hinge2, Logistic };

std::string_view loss_name(LossKind kind);

/// A minibatch: real inputs (B x d) and either integer labels or real
/// targets (B x out, for regression/autoencoding).
struct Batch {
  Tensor<double> inputs;
  std::vector<int> labels;
  Tensor<double> targets;

  std::size_t size() const { return inputs.rank() == 2 ? inputs.extent(0) : 0; }
};

/// Throws ShapeError if the batch, parameters and loss do not fit the model.
void validate(const Model& model, LossKind loss, std::size_t param_len, const Batch& batch);

namespace detail {

template <Scalar S>
S activate(Activation fn, const S& x) {
  switch (fn) {
    case Activation::None:
      return x;
    case Activation::Sigmoid:
      return sigmoid(x);
    case Activation::Tanh:
      return tanh(x);
    case Activation::Relu:
      return relu(x);
    case Activation::Elu:
      return elu(x);
    case Activation::Sin:
      return sin(x);
  }
  return x;
}

// Derivative from the pre-activation x and the output y = fn(x).
template <Scalar S>
S activate_slope(Activation fn, const S& x, const S& y) {
  switch (fn) {
    case Activation::None:
      return S(1.0);
    case Activation::Sigmoid:
      return y * (1.0 - y);
    case Activation::Tanh:
      return 1.0 - y * y;
    case Activation::Relu:
      return real_part(x) > 0.0 ? S(1.0) : S(0.0);
    case Activation::Elu:
      return real_part(x) > 0.0 ? S(1.0) : y + 1.0;
    case Activation::Sin:
      return cos(x);
  }
  return S(1.0);
}

template <Scalar S>
S softplus(const S& z) {
  if (real_part(z) > 0.0) return z + log1p(exp(-z));
  return log1p(exp(z));
}

template <Scalar S, class X>
void dense_forward(std::span<const S> params, const ParamSlot& slot, const X* x, std::size_t batch, S* y) {
  const std::size_t in = slot.shape.in;
  const std::size_t out = slot.shape.out;
  const S* w = params.data() + slot.weight_offset;
  const S* b = params.data() + slot.bias_offset;
  for (std::size_t r = 0; r < batch; ++r) {
    const X* xr = x + r * in;
    for (std::size_t j = 0; j < out; ++j) {
      const S* wj = w + j * in;
      S acc = slot.shape.bias ? b[j] : S(0.0);
      for (std::size_t i = 0; i < in; ++i) acc += wj[i] * xr[i];
      y[r * out + j] = acc;
    }
  }
}

template <Scalar S, class X>
void dense_backward(std::span<const S> params, const ParamSlot& slot, const X* x, const S* dy, std::size_t batch,
                    std::span<S> grad, S* dx) {
  const std::size_t in = slot.shape.in;
  const std::size_t out = slot.shape.out;
  const S* w = params.data() + slot.weight_offset;
  S* gw = grad.data() + slot.weight_offset;
  S* gb = grad.data() + slot.bias_offset;
  for (std::size_t r = 0; r < batch; ++r) {
    const X* xr = x + r * in;
    const S* dyr = dy + r * out;
    for (std::size_t j = 0; j < out; ++j) {
      const S d = dyr[j];
      S* gwj = gw + j * in;
      for (std::size_t i = 0; i < in; ++i) gwj[i] += d * xr[i];
      if (slot.shape.bias) gb[j] += d;
    }
    if (dx != nullptr) {
      S* dxr = dx + r * in;
      for (std::size_t i = 0; i < in; ++i) dxr[i] = S(0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const S d = dyr[j];
        const S* wj = w + j * in;
        for (std::size_t i = 0; i < in; ++i) dxr[i] += d * wj[i];
      }
    }
  }
}

inline std::string layer_label(const Layer& layer, std::size_t k) {
  if (const auto* d = std::get_if<DenseLayer>(&layer))
    return "layer " + std::to_string(k) + " (dense " + std::to_string(d->in) + "->" + std::to_string(d->out) + ")";
  return "layer " + std::to_string(k) + " (" + std::string(activation_name(std::get<ActivationLayer>(layer).fn)) +
         ")";
}

template <Scalar S>
void require_finite(std::span<const S> values, const Layer& layer, std::size_t k) {
  for (const S& v : values)
    if (!is_finite(v)) throw EvaluationError("non-finite value after " + layer_label(layer, k));
}

// values[k] is the input of layer k (values[0] stays empty: the real batch
// inputs are read directly), values[L] is the network output.
template <Scalar S>
std::vector<std::vector<S>> run_layers(const Model& model, std::span<const S> params, const Batch& batch) {
  const auto& layers = model.layers();
  const std::size_t B = batch.size();
  std::vector<std::vector<S>> values(layers.size() + 1);
  std::size_t width = model.input_dim();
  std::size_t slot_index = 0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (const auto* dense = std::get_if<DenseLayer>(&layers[k])) {
      const ParamSlot& slot = model.slots()[slot_index++];
      values[k + 1].resize(B * dense->out);
      if (k == 0)
        dense_forward<S, double>(params, slot, batch.inputs.data().data(), B, values[k + 1].data());
      else
        dense_forward<S, S>(params, slot, values[k].data(), B, values[k + 1].data());
      width = dense->out;
    } else {
      const Activation fn = std::get<ActivationLayer>(layers[k]).fn;
      if (k == 0) {
        const auto in = batch.inputs.data();
        values[0].assign(in.begin(), in.end());
      }
      const auto& x = values[k];
      auto& y = values[k + 1];
      y.resize(B * width);
      for (std::size_t e = 0; e < y.size(); ++e) y[e] = activate(fn, x[e]);
    }
    require_finite<S>(values[k + 1], layers[k], k);
  }
  return values;
}

// Mean loss over the batch; fills d(loss)/d(output) when dout is non-null.
template <Scalar S>
S evaluate_loss(LossKind kind, std::span<const S> out, std::size_t width, const Batch& batch, S* dout) {
  const std::size_t B = batch.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  S total(0.0);
  for (std::size_t r = 0; r < B; ++r) {
    const S* s = out.data() + r * width;
    S* ds = dout != nullptr ? dout + r * width : nullptr;
    switch (kind) {
      case LossKind::CrossEntropySoftmax: {
        // Shift by the largest real part; a real constant does not affect
        // any perturbation coefficient.
        double shift = real_part(s[0]);
        for (std::size_t c = 1; c < width; ++c) shift = std::max(shift, real_part(s[c]));
        S sum(0.0);
        for (std::size_t c = 0; c < width; ++c) sum += exp(s[c] - shift);
        const S lse = log(sum) + shift;
        const int y = batch.labels[r];
        total += lse - s[y];
        if (ds != nullptr) {
          for (std::size_t c = 0; c < width; ++c) ds[c] = exp(s[c] - lse) * inv_b;
          ds[y] -= inv_b;
        }
        break;
      }
      case LossKind::MSE: {
        const auto t = batch.targets.row(r);
        for (std::size_t c = 0; c < width; ++c) {
          const S e = s[c] - t[c];
          total += e * e;
          if (ds != nullptr) ds[c] = e * (2.0 * inv_b);
        }
        break;
      }
      case LossKind::Hinge2: {
        const int y = batch.labels[r];
        if (ds != nullptr)
          for (std::size_t c = 0; c < width; ++c) ds[c] = S(0.0);
        for (std::size_t c = 0; c < width; ++c) {
          if (static_cast<int>(c) == y) continue;
          const S m = 1.0 + s[c] - s[y];
          if (!(real_part(m) > 0.0)) continue;
          total += m * m;
          if (ds != nullptr) {
            const S d = m * (2.0 * inv_b);
            ds[c] += d;
            ds[y] -= d;
          }
        }
        break;
      }
      case LossKind::Logistic: {
        const double sign = batch.labels[r] == 1 ? 1.0 : -1.0;
        const S z = -sign * s[0];
        total += softplus(z);
        if (ds != nullptr) ds[0] = sigmoid(z) * (-sign * inv_b);
        break;
      }
    }
  }
  return total * inv_b;
}

}  // namespace detail

/// Network outputs (B x output_dim) for the batch.
template <Scalar S>
std::vector<S> predict(const Model& model, std::span<const S> params, const Batch& batch) {
  if (params.size() != model.param_count()) throw ShapeError("parameter length mismatch");
  auto values = detail::run_layers<S>(model, params, batch);
  return std::move(values.back());
}

/// Mean batch loss f(w) evaluated in scalar kind S.
template <Scalar S>
S forward(const Model& model, LossKind loss, std::span<const S> params, const Batch& batch) {
  validate(model, loss, params.size(), batch);
  const auto values = detail::run_layers<S>(model, params, batch);
  const S f = detail::evaluate_loss<S>(loss, values.back(), model.output_dim(), batch, nullptr);
  if (!is_finite(f)) throw EvaluationError("non-finite loss value");
  return f;
}

/// Loss and its gradient with respect to the parameters, by backpropagation
/// in scalar kind S. `grad` must have param_count entries.
template <Scalar S>
S value_and_gradient(const Model& model, LossKind loss, std::span<const S> params, const Batch& batch,
                     std::span<S> grad) {
  validate(model, loss, params.size(), batch);
  if (grad.size() != model.param_count()) throw ShapeError("gradient buffer length mismatch");
  const auto& layers = model.layers();
  const std::size_t B = batch.size();
  const auto values = detail::run_layers<S>(model, params, batch);

  std::vector<S> delta(values.back().size());
  const S f = detail::evaluate_loss<S>(loss, values.back(), model.output_dim(), batch, delta.data());
  if (!is_finite(f)) throw EvaluationError("non-finite loss value");

  for (auto& g : grad) g = S(0.0);
  std::size_t slot_index = model.slots().size();
  std::vector<S> next;
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (std::get_if<DenseLayer>(&layers[k]) != nullptr) {
      const ParamSlot& slot = model.slots()[--slot_index];
      if (k == 0) {
        detail::dense_backward<S, double>(params, slot, batch.inputs.data().data(), delta.data(), B, grad, nullptr);
      } else {
        next.assign(B * slot.shape.in, S(0.0));
        detail::dense_backward<S, S>(params, slot, values[k].data(), delta.data(), B, grad, next.data());
        delta.swap(next);
      }
    } else {
      const Activation fn = std::get<ActivationLayer>(layers[k]).fn;
      const auto& x = values[k];
      const auto& y = values[k + 1];
      for (std::size_t e = 0; e < delta.size(); ++e) delta[e] = delta[e] * detail::activate_slope(fn, x[e], y[e]);
    }
  }
  for (const S& g : grad)
    if (!is_finite(g)) throw EvaluationError("non-finite gradient entry");
  return f;
}

/// Gradient of the mean batch loss.
template <Scalar S>
std::vector<S> backward(const Model& model, LossKind loss, std::span<const S> params, const Batch& batch) {
  std::vector<S> grad(model.param_count());
  value_and_gradient<S>(model, loss, params, batch, grad);
  return grad;
}

}  // namespace csnk
