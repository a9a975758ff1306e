#include "csnk/csdd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csnk {

namespace {

void require_same_length(std::span<const double> w, std::span<const double> p, std::size_t n) {
  if (w.size() != n || p.size() != n)
    throw ShapeError("direction and parameters must both have " + std::to_string(n) + " entries");
}

// Perturbations use the unit direction and are rescaled afterwards, so a
// long direction never makes the complex step large.
double direction_scale(std::span<const double> p) {
  double s = 0.0;
  for (const double v : p) s += v * v;
  s = std::sqrt(s);
  if (!std::isfinite(s)) {
    double m = 0.0;
    for (const double v : p) m = std::max(m, std::fabs(v));
    s = m;
  }
  return s;
}

std::string describe(Rows rows) {
  if (rows.empty()) return "empty batch";
  return "batch of " + std::to_string(rows.size()) + " rows starting at row " + std::to_string(rows.front());
}

}  // namespace

GradAndHv csdd_grad_hv(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
                       double h) {
  const std::size_t n = objective.dim();
  require_same_length(w, p, n);
  const double scale = direction_scale(p);
  const double hs = scale > 0.0 ? h / scale : 0.0;
  std::vector<Cplx> wc(n);
  for (std::size_t i = 0; i < n; ++i) wc[i] = Cplx{w[i], hs * p[i]};
  std::vector<Cplx> gc(n);
  objective.loss_and_gradient(std::span<const Cplx>(wc), rows, std::span<Cplx>(gc));
  GradAndHv out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.g[i] = gc[i].re;
    out.hv[i] = scale > 0.0 ? gc[i].im / h * scale : 0.0;
    if (!std::isfinite(out.hv[i])) throw NumericError("non-finite Hessian-vector product on " + describe(rows));
  }
  return out;
}

double csdd2(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows, double h) {
  const std::size_t n = objective.dim();
  require_same_length(w, p, n);
  const double scale = direction_scale(p);
  if (scale == 0.0) return 0.0;
  const double hs = h / scale;
  std::vector<BiCplx> wb(n);
  for (std::size_t i = 0; i < n; ++i) wb[i] = perturb2(w[i], hs * p[i], hs * p[i]);
  const BiCplx f = objective.loss(std::span<const BiCplx>(wb), rows);
  const double kappa = imag2(f) / (h * h) * scale * scale;
  if (!std::isfinite(kappa)) throw NumericError("non-finite curvature on " + describe(rows));
  return kappa;
}

GradAndHv ffd_grad_hv(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
                      double h) {
  const std::size_t n = objective.dim();
  require_same_length(w, p, n);
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = w[i] + h * p[i];
  GradAndHv out{objective.gradient(w, rows), objective.gradient(shifted, rows)};
  for (std::size_t i = 0; i < n; ++i) {
    out.hv[i] = (out.hv[i] - out.g[i]) / h;
    if (!std::isfinite(out.hv[i])) throw NumericError("non-finite Hessian-vector product on " + describe(rows));
  }
  return out;
}

std::vector<double> brute_hessian(const Objective& objective, std::span<const double> w, Rows rows, double h) {
  const std::size_t n = objective.dim();
  if (n > kBruteHessianMaxDim)
    throw std::invalid_argument("brute_hessian is an oracle limited to " + std::to_string(kBruteHessianMaxDim) +
                                " parameters, got " + std::to_string(n));
  if (w.size() != n) throw ShapeError("parameter length mismatch");
  std::vector<double> hess(n * n);
  std::vector<BiCplx> wb(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t i = 0; i < n; ++i) wb[i] = BiCplx(w[i]);
      wb[a].re.im += h;
      wb[b].im.re += h;
      hess[a * n + b] = imag2(objective.loss(std::span<const BiCplx>(wb), rows)) / (h * h);
    }
  }
  return hess;
}

GradAndHv csdd_grad_hv(const Model& model, LossKind loss, std::span<const double> w, std::span<const double> p,
                       const Batch& batch, double h) {
  const NetworkObjective objective(model, loss, batch);
  const auto rows = objective.all_rows();
  return csdd_grad_hv(objective, w, p, rows, h);
}

double csdd2(const Model& model, LossKind loss, std::span<const double> w, std::span<const double> p,
             const Batch& batch, double h) {
  const NetworkObjective objective(model, loss, batch);
  const auto rows = objective.all_rows();
  return csdd2(objective, w, p, rows, h);
}

std::vector<double> brute_hessian(const Model& model, LossKind loss, std::span<const double> w, const Batch& batch,
                                  double h) {
  const NetworkObjective objective(model, loss, batch);
  const auto rows = objective.all_rows();
  return brute_hessian(objective, w, rows, h);
}

}  // namespace csnk
