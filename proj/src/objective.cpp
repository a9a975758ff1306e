#include "csnk/objective.hpp"

#include <string>

namespace csnk {

NetworkObjective::NetworkObjective(Model model, LossKind loss, Batch samples)
    : model_(std::move(model)), loss_(loss), samples_(std::move(samples)) {
  validate(model_, loss_, model_.param_count(), samples_);
}

bool NetworkObjective::covers_all(Rows rows) const {
  if (rows.size() != samples_.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i] != i) return false;
  return true;
}

Batch NetworkObjective::gather(Rows rows) const {
  if (rows.empty()) throw ShapeError("empty minibatch");
  const std::size_t d = samples_.inputs.extent(1);
  const bool has_targets = samples_.targets.rank() == 2;
  const std::size_t t = has_targets ? samples_.targets.extent(1) : 0;
  Batch batch;
  batch.inputs = Tensor<double>({rows.size(), d});
  if (has_targets) batch.targets = Tensor<double>({rows.size(), t});
  batch.labels.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= samples_.size()) throw ShapeError("row index " + std::to_string(r) + " out of range");
    const auto src = samples_.inputs.row(r);
    std::copy(src.begin(), src.end(), batch.inputs.row(k).begin());
    if (has_targets) {
      const auto tr = samples_.targets.row(r);
      std::copy(tr.begin(), tr.end(), batch.targets.row(k).begin());
    }
    if (!samples_.labels.empty()) batch.labels.push_back(samples_.labels[r]);
  }
  return batch;
}

}  // namespace csnk
