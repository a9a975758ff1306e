#include "csnk/network.hpp"

#include <cmath>

#include "csnk/rng.hpp"

namespace csnk {

std::string_view activation_name(Activation fn) {
  switch (fn) {
    case Activation::None:
      return "none";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
    case Activation::Elu:
      return "elu";
    case Activation::Sin:
      return "sin";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (const Activation fn : {Activation::None, Activation::Sigmoid, Activation::Tanh, Activation::Relu,
                              Activation::Elu, Activation::Sin})
    if (activation_name(fn) == name) return fn;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::CrossEntropySoftmax:
      return "cross_entropy";
    case LossKind::MSE:
      return "mse";
    case LossKind::Hinge2:
      return "hinge2";
    case LossKind::Logistic:
      return "logistic";
  }
  return "?";
}

Model::Model(std::vector<Layer> layers) : layers_(std::move(layers)) {
  std::size_t width = 0;
  bool seen_dense = false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto* dense = std::get_if<DenseLayer>(&layers_[k]);
    if (dense == nullptr) continue;
    if (dense->in == 0 || dense->out == 0) throw ShapeError("dense layer with zero extent");
    if (!seen_dense) {
      input_dim_ = dense->in;
      seen_dense = true;
    } else if (dense->in != width) {
      throw ShapeError("layer " + std::to_string(k) + " expects " + std::to_string(dense->in) +
                       " inputs but the previous layer produces " + std::to_string(width));
    }
    ParamSlot slot;
    slot.layer = k;
    slot.weight_offset = param_count_;
    slot.bias_offset = param_count_ + dense->in * dense->out;
    slot.shape = *dense;
    slots_.push_back(slot);
    param_count_ += dense->in * dense->out + (dense->bias ? dense->out : 0);
    width = dense->out;
  }
  if (!seen_dense) throw ShapeError("model needs at least one dense layer");
  output_dim_ = width;
}

Model Model::mlp(const std::vector<std::size_t>& widths, Activation hidden, Activation output, bool bias) {
  if (widths.size() < 2) throw ShapeError("mlp needs at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    layers.emplace_back(DenseLayer{widths[k], widths[k + 1], bias});
    const bool last = k + 2 == widths.size();
    const Activation fn = last ? output : hidden;
    if (fn != Activation::None) layers.emplace_back(ActivationLayer{fn});
  }
  return Model(std::move(layers));
}

std::vector<double> Model::init_params(std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> params(param_count_, 0.0);
  for (const auto& slot : slots_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(slot.shape.in + slot.shape.out));
    for (std::size_t e = 0; e < slot.shape.in * slot.shape.out; ++e)
      params[slot.weight_offset + e] = rng.uniform(-limit, limit);
  }
  return params;
}

void validate(const Model& model, LossKind loss, std::size_t param_len, const Batch& batch) {
  if (param_len != model.param_count())
    throw ShapeError("parameter vector has " + std::to_string(param_len) + " entries, model needs " +
                     std::to_string(model.param_count()));
  if (batch.inputs.rank() != 2 || batch.size() == 0) throw ShapeError("batch inputs must be a non-empty B x d matrix");
  if (batch.inputs.extent(1) != model.input_dim())
    throw ShapeError("batch has " + std::to_string(batch.inputs.extent(1)) + " features, model expects " +
                     std::to_string(model.input_dim()));
  const std::size_t B = batch.size();
  const std::size_t out = model.output_dim();
  switch (loss) {
    case LossKind::MSE:
      if (batch.targets.rank() != 2 || batch.targets.extent(0) != B || batch.targets.extent(1) != out)
        throw ShapeError("MSE targets must be B x " + std::to_string(out));
      break;
    case LossKind::Logistic:
      if (out != 1) throw ShapeError("logistic loss needs a single output");
      if (batch.labels.size() != B) throw ShapeError("label count does not match batch size");
      for (const int y : batch.labels)
        if (y != 0 && y != 1) throw ShapeError("logistic loss needs labels in {0, 1}");
      break;
    case LossKind::CrossEntropySoftmax:
    case LossKind::Hinge2:
      if (batch.labels.size() != B) throw ShapeError("label count does not match batch size");
      for (const int y : batch.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= out)
          throw ShapeError("label " + std::to_string(y) + " outside [0, " + std::to_string(out) + ")");
      break;
  }
}

}  // namespace csnk
