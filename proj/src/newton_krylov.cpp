#include "csnk/newton_krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "csnk/csdd.hpp"

namespace csnk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_zero(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
}

std::vector<double> hessian_vector(const Objective& objective, std::span<const double> w, std::span<const double> p,
                                   Rows rows, const NewtonConfig& cfg) {
  if (cfg.scheme == DirectionalScheme::ForwardDifference) return ffd_grad_hv(objective, w, p, rows, cfg.ffd_h).hv;
  return csdd_grad_hv(objective, w, p, rows, cfg.h1).hv;
}

double curvature(const Objective& objective, std::span<const double> w, std::span<const double> p, Rows rows,
                 const NewtonConfig& cfg) {
  if (cfg.scheme == DirectionalScheme::ForwardDifference) {
    const double kappa = dot(p, ffd_grad_hv(objective, w, p, rows, cfg.ffd_h).hv);
    if (!std::isfinite(kappa)) throw NumericError("non-finite curvature");
    return kappa;
  }
  return csdd2(objective, w, p, rows, cfg.h2);
}

EQTracker track(const Objective& objective, std::span<const double> w, std::span<const double> dw,
                std::span<const double> g, Rows rows, const NewtonConfig& cfg) {
  EQTracker t;
  t.dw_g = dot(dw, g);
  t.dw_H_dw = all_zero(dw) ? 0.0 : curvature(objective, w, dw, rows, cfg);
  return t;
}

// Batch loss at w + gamma*dw; +inf when the evaluation fails.
double trial_loss(const Objective& objective, std::span<const double> w, std::span<const double> dw, double gamma,
                  Rows rows) {
  std::vector<double> trial(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] + gamma * dw[i];
  try {
    const double f = objective.loss(std::span<const double>(trial), rows);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  } catch (const EvaluationError&) {
  } catch (const DomainError&) {
  }
  return std::numeric_limits<double>::infinity();
}

double eta_at(const Objective& objective, std::span<const double> w, std::span<const double> dw,
              const EQTracker& tracker, Rows rows, double f_w, double gamma) {
  const double f_trial = trial_loss(objective, w, dw, gamma, rows);
  if (!std::isfinite(f_trial)) return std::numeric_limits<double>::infinity();
  return taylor_ratio(f_w, f_trial, tracker, gamma);
}

}  // namespace

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::ResidualSmall:
      return "residual_small";
    case Termination::NegativeCurvature:
      return "negative_curvature";
    case Termination::MaxIters:
      return "max_iters";
    case Termination::BatchSkipped:
      return "batch_skipped";
  }
  return "?";
}

void NewtonConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("NewtonConfig: ") + what); };
  if (!(eta_tilde > 0.0 && eta_tilde < 1.0)) fail("eta_tilde must lie in (0, 1)");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) fail("step_shrink must lie in (0, 1)");
  if (!(step_grow > 1.0)) fail("step_grow must exceed 1");
  if (!(h1 > 0.0) || !(h2 > 0.0) || !(ffd_h > 0.0)) fail("perturbation sizes must be positive");
  if (cg_max_iters < 1) fail("cg_max_iters must be positive");
  if (!(cg_residual_tol >= 0.0)) fail("cg_residual_tol must be non-negative");
  if (!(flat_eps > 0.0) || !(flat_momentum_coef > 0.0)) fail("flatness parameters must be positive");
  if (max_step_adjust < 1) fail("max_step_adjust must be positive");
  if (!(fallback_gamma > 0.0)) fail("fallback_gamma must be positive");
  if (grad_refresh_every < 1) fail("grad_refresh_every must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c must lie in (0, 1)");
  if (!(backtrack_tau > 0.0 && backtrack_tau < 1.0)) fail("backtrack_tau must lie in (0, 1)");
  if (backtrack_max < 1) fail("backtrack_max must be positive");
}

bool prebatch_screen(std::span<const double> g_local, std::span<const double> g_global) {
  if (g_local.size() != g_global.size()) throw ShapeError("gradient length mismatch");
  return dot(g_local, g_global) >= 0.0;
}

KrylovResult krylov_solve(const Objective& objective, std::span<const double> w, std::span<const double> g_batch,
                          Rows rows, std::span<const double> warm, const NewtonConfig& cfg) {
  const std::size_t n = objective.dim();
  if (w.size() != n || g_batch.size() != n) throw ShapeError("krylov_solve: length mismatch");
  if (!warm.empty() && warm.size() != n) throw ShapeError("krylov_solve: warm start length mismatch");

  KrylovResult res;
  res.min_divisor = std::numeric_limits<double>::infinity();
  res.dw.assign(n, 0.0);
  if (!warm.empty()) std::copy(warm.begin(), warm.end(), res.dw.begin());

  try {
    // r0 = -(g + H dw0) from one fused pass; with dw0 = 0 the pass would
    // return g_batch and a zero product, so it is skipped.
    std::vector<double> g(g_batch.begin(), g_batch.end());
    std::vector<double> r(n);
    if (all_zero(res.dw)) {
      for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
    } else {
      GradAndHv gh = cfg.scheme == DirectionalScheme::ForwardDifference
                         ? ffd_grad_hv(objective, w, res.dw, rows, cfg.ffd_h)
                         : csdd_grad_hv(objective, w, res.dw, rows, cfg.h1);
      g = std::move(gh.g);
      for (std::size_t i = 0; i < n; ++i) r[i] = -(g[i] + gh.hv[i]);
    }
    const double target = cfg.cg_residual_tol * norm(g);
    // With H dw = -r - g: E_Q(dw) = dw'g + dw'H dw / 2 = (dw'g - dw'r) / 2.
    auto energy = [&] { return 0.5 * (dot(res.dw, g) - dot(res.dw, r)); };

    std::vector<double> p = r;
    double rr = dot(r, r);
    res.residual_norms.push_back(std::sqrt(rr));
    res.energies.push_back(energy());
    if (!std::isfinite(rr) || !std::isfinite(target)) throw NumericError("non-finite initial residual");

    while (true) {
      if (std::sqrt(rr) <= target) {
        res.termination = Termination::ResidualSmall;
        break;
      }
      if (res.cg_iters >= cfg.cg_max_iters) {
        res.termination = Termination::MaxIters;
        break;
      }
      double kappa = curvature(objective, w, p, rows, cfg);
      if (cfg.early_termination && kappa < 0.0) {
        res.termination = Termination::NegativeCurvature;
        break;
      }
      // Flatness is judged per unit length of p.
      const double pp = dot(p, p);
      if (kappa >= 0.0 && kappa < cfg.flat_eps * pp) kappa = cfg.flat_momentum_coef * std::sqrt(pp);
      if (kappa == 0.0) throw NumericError("zero curvature along a zero search direction");
      res.min_divisor = std::min(res.min_divisor, kappa);

      const double alpha = rr / kappa;
      for (std::size_t i = 0; i < n; ++i) res.dw[i] += alpha * p[i];
      const std::vector<double> q = hessian_vector(objective, w, p, rows, cfg);
      for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
      const double rr_next = dot(r, r);
      const double beta = rr_next / rr;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      rr = rr_next;
      ++res.cg_iters;
      res.residual_norms.push_back(std::sqrt(rr));
      res.energies.push_back(energy());
      if (!std::isfinite(rr)) throw NumericError("non-finite CG residual");
    }
    res.tracker = track(objective, w, res.dw, g, rows, cfg);
  } catch (const NumericError&) {
    res.termination = Termination::BatchSkipped;
  } catch (const EvaluationError&) {
    res.termination = Termination::BatchSkipped;
  } catch (const DomainError&) {
    res.termination = Termination::BatchSkipped;
  }
  if (res.termination == Termination::BatchSkipped) {
    res.dw.assign(n, 0.0);
    res.tracker = {};
  }
  return res;
}

std::vector<double> postbatch_screen(std::span<const double> dw, std::span<const double> g_global) {
  if (dw.size() != g_global.size()) throw ShapeError("postbatch_screen: length mismatch");
  std::vector<double> out(dw.begin(), dw.end());
  const double gg = dot(g_global, g_global);
  if (gg == 0.0) return out;
  double scale = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) scale += std::fabs(out[i] * g_global[i]);
  // The exact projection can leave a positive dot product of round-off size;
  // later passes subtract a growing margin until the sign is settled.
  for (int pass = 0; pass < 16; ++pass) {
    const double d = dot(out, g_global);
    if (d <= 0.0) break;
    const double margin = pass == 0 ? 0.0 : std::ldexp(std::numeric_limits<double>::epsilon() * scale, pass);
    const double c = (d + margin) / gg;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * g_global[i];
  }
  return out;
}

double taylor_ratio(double f_w, double f_trial, const EQTracker& tracker, double gamma) {
  const double change = f_trial - f_w;
  if (std::fabs(change) < 1e-30) return 0.0;
  return std::fabs((change - tracker.at(gamma)) / change);
}

StepSize size_step(const Objective& objective, std::span<const double> w, std::span<const double> dw,
                   const EQTracker& tracker, Rows rows, double f_w, const NewtonConfig& cfg) {
  const double lo = 0.5 * cfg.eta_tilde;
  const double hi = cfg.eta_tilde;
  StepSize s;
  s.gamma = 1.0;
  s.eta = eta_at(objective, w, dw, tracker, rows, f_w, s.gamma);
  if (s.eta <= lo) return s;
  while (!(s.eta >= lo && s.eta <= hi)) {
    if (s.attempts >= cfg.max_step_adjust) {
      s.gamma = cfg.fallback_gamma;
      s.eta = eta_at(objective, w, dw, tracker, rows, f_w, s.gamma);
      s.fell_back = true;
      return s;
    }
    s.gamma *= s.eta > hi ? cfg.step_shrink : cfg.step_grow;
    ++s.attempts;
    s.eta = eta_at(objective, w, dw, tracker, rows, f_w, s.gamma);
  }
  return s;
}

StepSize backtracking_newton_step(const Objective& objective, std::span<const double> w, std::span<const double> dw,
                                  std::span<const double> g, Rows rows, double f_w, const NewtonConfig& cfg) {
  const double slope = dot(dw, g);
  StepSize s;
  s.gamma = 1.0;
  while (true) {
    const double f_trial = trial_loss(objective, w, dw, s.gamma, rows);
    if (f_trial <= f_w + s.gamma * cfg.armijo_c * slope) return s;
    ++s.attempts;
    if (s.attempts > cfg.backtrack_max) {
      s.gamma = cfg.fallback_gamma;
      s.fell_back = true;
      return s;
    }
    s.gamma *= cfg.backtrack_tau;
  }
}

NewtonState make_newton_state(const Objective& objective, std::vector<double> w) {
  if (w.size() != objective.dim()) throw ShapeError("initial parameters have the wrong length");
  NewtonState state;
  state.w = std::move(w);
  state.g_global.assign(state.w.size(), 0.0);
  state.dw_prev.assign(state.w.size(), 0.0);
  const auto all = objective.all_rows();
  state.global_loss = objective.loss_and_gradient(state.w, all, state.g_global);
  return state;
}

std::vector<StepOutcome> newton_epoch(NewtonState& state, const Objective& objective,
                                      const std::vector<std::vector<std::size_t>>& batches, const NewtonConfig& cfg) {
  cfg.validate();
  if (batches.empty()) throw std::invalid_argument("newton_epoch needs at least one batch");
  const std::size_t n = objective.dim();
  const auto all = objective.all_rows();
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(batches.size());
  state.dw_prev.assign(n, 0.0);

  for (std::size_t j = 0; j < batches.size(); ++j) {
    const auto start = std::chrono::steady_clock::now();
    const Rows rows = batches[j];
    state.batch_index = j;
    StepOutcome out;
    auto finish = [&] {
      out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      outcomes.push_back(out);
    };

    if (state.diverged) {
      out.batch_loss = std::numeric_limits<double>::quiet_NaN();
      finish();
      continue;
    }

    std::vector<double> g_local(n);
    try {
      out.batch_loss = objective.loss_and_gradient(state.w, rows, g_local);
    } catch (const EvaluationError&) {
      out.batch_loss = std::numeric_limits<double>::quiet_NaN();
      finish();
      continue;
    } catch (const DomainError&) {
      out.batch_loss = std::numeric_limits<double>::quiet_NaN();
      finish();
      continue;
    }

    if (!prebatch_screen(g_local, state.g_global)) {
      finish();
      continue;
    }

    const std::span<const double> warm = cfg.warm_start ? std::span<const double>(state.dw_prev) : std::span<const double>{};
    KrylovResult kr = krylov_solve(objective, state.w, g_local, rows, warm, cfg);
    out.termination = kr.termination;
    out.cg_iters = kr.cg_iters;
    out.min_divisor = kr.min_divisor;
    if (kr.termination == Termination::BatchSkipped) {
      finish();
      continue;
    }

    std::vector<double> dw = std::move(kr.dw);
    bool dw_changed = false;
    if (kr.termination == Termination::NegativeCurvature && all_zero(dw)) {
      for (std::size_t i = 0; i < n; ++i) dw[i] = -g_local[i];
      dw_changed = true;
    }
    std::vector<double> screened = postbatch_screen(dw, state.g_global);
    if (screened != dw) dw_changed = true;
    dw = std::move(screened);
    out.dw_dot_g = dot(dw, state.g_global);
    if (out.dw_dot_g > 0.0) throw std::logic_error("post-screened step ascends along the global gradient");

    EQTracker tracker = kr.tracker;
    StepSize size;
    try {
      if (dw_changed) tracker = track(objective, state.w, dw, g_local, rows, cfg);
      size = cfg.step_rule == StepRule::TaylorRatio
                 ? size_step(objective, state.w, dw, tracker, rows, out.batch_loss, cfg)
                 : backtracking_newton_step(objective, state.w, dw, g_local, rows, out.batch_loss, cfg);
      if (cfg.step_rule == StepRule::Backtracking)
        size.eta = taylor_ratio(out.batch_loss, trial_loss(objective, state.w, dw, size.gamma, rows), tracker,
                                size.gamma);
    } catch (const NumericError&) {
      out.termination = Termination::BatchSkipped;
      finish();
      continue;
    } catch (const EvaluationError&) {
      out.termination = Termination::BatchSkipped;
      finish();
      continue;
    } catch (const DomainError&) {
      out.termination = Termination::BatchSkipped;
      finish();
      continue;
    }
    if (cfg.step_rule == StepRule::TaylorRatio && !(size.eta <= cfg.eta_tilde) && !size.fell_back)
      throw std::logic_error("accepted step violates the Taylor-ratio cap");

    for (std::size_t i = 0; i < n; ++i) state.w[i] += size.gamma * dw[i];
    // The next solve starts from the step actually taken.
    if (cfg.warm_start)
      for (std::size_t i = 0; i < n; ++i) state.dw_prev[i] = size.gamma * dw[i];
    ++state.accepted_steps;

    out.accepted = true;
    out.gamma = size.gamma;
    out.eta = size.eta;
    out.adjust_attempts = size.attempts;
    out.fell_back = size.fell_back;

    if (state.accepted_steps % static_cast<std::size_t>(cfg.grad_refresh_every) == 0) {
      try {
        state.global_loss = objective.loss_and_gradient(state.w, all, state.g_global);
      } catch (const EvaluationError&) {
        state.global_loss = std::numeric_limits<double>::quiet_NaN();
      } catch (const DomainError&) {
        state.global_loss = std::numeric_limits<double>::quiet_NaN();
      }
      out.global_loss = state.global_loss;
      if (!std::isfinite(state.global_loss)) state.diverged = true;
    }
    finish();
  }
  ++state.epoch;
  return outcomes;
}

}  // namespace csnk
