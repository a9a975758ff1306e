#pragma once

// Scalar numerical differentiation: forward and central differences, and
// first- and second-order complex-step differences.
//
// The complex-step operators take a callable that accepts any scalar kind
// (typically a generic lambda), so the same expression is evaluated over
// Cplx or BiCplx.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "csnk/errors.hpp"
#include "csnk/multicomplex.hpp"

namespace csnk {

enum class SchemeKind { FFD, CFD, CSFD1, CSFD2 };

std::string_view scheme_name(SchemeKind kind);

inline constexpr double kDefaultCsfd1Step = 1e-20;
inline constexpr double kDefaultCsfd2Step = 1e-6;

/// A differentiation scheme with its perturbation size.
struct DiffScheme {
  SchemeKind kind;
  double h;

  DiffScheme(SchemeKind k, double step);
};

namespace detail {

inline double checked(double v, std::string_view what) {
  if (!std::isfinite(v)) throw EvaluationError(std::string(what) + " produced a non-finite value");
  return v;
}

inline void require_step(double h) {
  if (!(h > 0.0) || !std::isnormal(h)) throw std::invalid_argument("perturbation h must be a positive normal float");
}

}  // namespace detail

/// (f(x0 + h) - f(x0)) / h.
template <class F>
double ffd(F&& f, double x0, double h) {
  detail::require_step(h);
  const double f1 = detail::checked(static_cast<double>(f(x0 + h)), "ffd");
  const double f0 = detail::checked(static_cast<double>(f(x0)), "ffd");
  return (f1 - f0) / h;
}

/// (f(x0 + h) - f(x0 - h)) / 2h.
template <class F>
double cfd(F&& f, double x0, double h) {
  detail::require_step(h);
  const double fp = detail::checked(static_cast<double>(f(x0 + h)), "cfd");
  const double fm = detail::checked(static_cast<double>(f(x0 - h)), "cfd");
  return (fp - fm) / (2.0 * h);
}

/// Im(f(x0 + h i)) / h. No subtraction, so h may be arbitrarily small.
template <class F>
double csfd1(F&& f, double x0, double h = kDefaultCsfd1Step) {
  detail::require_step(h);
  const Cplx y = f(perturb(x0, h));
  if (!is_finite(y)) throw EvaluationError("csfd1 produced a non-finite value");
  return imag(y) / h;
}

/// Im2(f(x0 + h i1 + h i2)) / h^2, the coefficient of i1*i2 scaled.
template <class F>
double csfd2(F&& f, double x0, double h = kDefaultCsfd2Step) {
  detail::require_step(h);
  if (h < 1e-150) throw std::invalid_argument("csfd2 step underflows: h^2 must stay normal (h >= 1e-150)");
  const BiCplx y = f(perturb2(x0, h, h));
  if (!is_finite(y)) throw EvaluationError("csfd2 produced a non-finite value");
  return imag2(y) / (h * h);
}

template <class F>
double differentiate(const DiffScheme& scheme, F&& f, double x0) {
  switch (scheme.kind) {
    case SchemeKind::FFD:
      return ffd(f, x0, scheme.h);
    case SchemeKind::CFD:
      return cfd(f, x0, scheme.h);
    case SchemeKind::CSFD1:
      return csfd1(f, x0, scheme.h);
    case SchemeKind::CSFD2:
      return csfd2(f, x0, scheme.h);
  }
  throw std::logic_error("unknown scheme");
}

/// |approx - exact| / max(|exact|, 1e-300).
double relative_error(double approx, double exact);

struct ExactDerivatives {
  double first;
  double second;
};

struct ErrorRow {
  SchemeKind scheme;
  double h;
  double rel_error;
};

/// Relative error of every scheme over a descending grid of step sizes.
/// FFD, CFD and CSFD1 are measured against the first derivative, CSFD2
/// against the second. A scheme whose evaluation fails at some h (for
/// example h^2 underflow in CSFD2) reports an infinite error for that row.
template <class F>
std::vector<ErrorRow> error_curve(F&& f, ExactDerivatives exact, double x0, const std::vector<double>& h_grid) {
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    if (!(h_grid[k] > 0.0)) throw std::invalid_argument("h_grid must be strictly positive");
    if (k > 0 && !(h_grid[k] < h_grid[k - 1])) throw std::invalid_argument("h_grid must be strictly descending");
  }
  std::vector<ErrorRow> rows;
  rows.reserve(4 * h_grid.size());
  for (const SchemeKind kind : {SchemeKind::FFD, SchemeKind::CFD, SchemeKind::CSFD1, SchemeKind::CSFD2}) {
    const double target = kind == SchemeKind::CSFD2 ? exact.second : exact.first;
    for (const double h : h_grid) {
      double err;
      try {
        err = relative_error(differentiate(DiffScheme(kind, h), f, x0), target);
      } catch (const std::invalid_argument&) {
        err = std::numeric_limits<double>::infinity();
      } catch (const EvaluationError&) {
        err = std::numeric_limits<double>::infinity();
      }
      rows.push_back({kind, h, err});
    }
  }
  return rows;
}

/// Logarithmic grid 10^from_exp, 10^(from_exp-1), ..., 10^to_exp.
std::vector<double> log_grid(int from_exp, int to_exp);

/// CSV with header `scheme,h,rel_error`.
void write_error_curve_csv(std::ostream& out, const std::vector<ErrorRow>& rows);

}  // namespace csnk
