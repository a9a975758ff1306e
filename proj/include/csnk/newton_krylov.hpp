#pragma once

// Stochastic Newton-Krylov training.
//
// Each minibatch goes through four stages:
//   1. pre-screening: skip the batch if its gradient opposes the global one;
//   2. a CG loop on H_batch dw = -g_batch that measures p'Hp for every search
//      direction and stops as soon as the curvature turns negative;
//   3. post-screening: project out any component of dw along +g_global;
//   4. step sizing: pick gamma so the Taylor ratio (share of the loss change
//      not explained by the quadratic model) lands in [eta~/2, eta~].
// Hessian-vector products and curvatures come from complex-step directional
// derivatives (csdd.hpp).

#include <chrono>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "csnk/objective.hpp"

namespace csnk {

enum class Termination { ResidualSmall, NegativeCurvature, MaxIters, BatchSkipped };

std::string_view termination_name(Termination t);

enum class StepRule { TaylorRatio, Backtracking };

/// How Hessian-vector products and curvatures are obtained.
enum class DirectionalScheme { ComplexStep, ForwardDifference };

struct NewtonConfig {
  double eta_tilde = 0.05;
  double h1 = 1e-20;  // complex step for H p
  double h2 = 1e-6;   // bicomplex step for p'Hp
  int cg_max_iters = 20;
  double cg_residual_tol = 1e-2;  // relative to |g_batch|
  double flat_eps = 1e-8;
  double flat_momentum_coef = 0.01;
  double step_grow = 1.5;
  double step_shrink = 0.5;
  int max_step_adjust = 20;
  double fallback_gamma = 1e-6;
  bool warm_start = true;
  int grad_refresh_every = 1;  // recompute g_global after every K accepted steps
  bool early_termination = true;

  StepRule step_rule = StepRule::TaylorRatio;
  double armijo_c = 0.01;
  double backtrack_tau = 0.8;
  int backtrack_max = 100;

  DirectionalScheme scheme = DirectionalScheme::ComplexStep;
  double ffd_h = 1e-8;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// E_Q(gamma) = gamma dw'g + gamma^2/2 dw'H dw for the quadratic model of a step.
struct EQTracker {
  double dw_g = 0.0;
  double dw_H_dw = 0.0;

  double at(double gamma) const { return gamma * dw_g + 0.5 * gamma * gamma * dw_H_dw; }
};

struct KrylovResult {
  std::vector<double> dw;
  EQTracker tracker;
  Termination termination = Termination::ResidualSmall;
  int cg_iters = 0;
  /// Smallest curvature used as a CG divisor (+inf when no iteration ran).
  double min_divisor = 0.0;
  /// |r| and E_Q at the start and after every CG iteration.
  std::vector<double> residual_norms;
  std::vector<double> energies;
};

/// Keep the batch when g_local . g_global >= 0.
bool prebatch_screen(std::span<const double> g_local, std::span<const double> g_global);

/// CG on H dw = -g_batch from `warm` (empty means zero), with curvature-gated
/// early termination. H p and p'Hp are evaluated on `rows` at `w`.
KrylovResult krylov_solve(const Objective& objective, std::span<const double> w, std::span<const double> g_batch,
                          Rows rows, std::span<const double> warm, const NewtonConfig& cfg);

/// Removes the component of dw along +g_global when dw . g_global > 0.
/// The result always satisfies dw . g_global <= 0 (or g_global == 0).
std::vector<double> postbatch_screen(std::span<const double> dw, std::span<const double> g_global);

/// |(f_trial - f_w - E_Q(gamma)) / (f_trial - f_w)|, or 0 when the loss
/// change is below 1e-30.
double taylor_ratio(double f_w, double f_trial, const EQTracker& tracker, double gamma);

struct StepSize {
  double gamma = 1.0;
  double eta = 0.0;
  int attempts = 0;
  bool fell_back = false;
};

/// Taylor-ratio step sizing starting from gamma = 1. f_w is the batch loss at w.
StepSize size_step(const Objective& objective, std::span<const double> w, std::span<const double> dw,
                   const EQTracker& tracker, Rows rows, double f_w, const NewtonConfig& cfg);

/// Armijo backtracking: the largest tau^k with
/// f(w + gamma dw) <= f(w) + gamma c dw'g. Falls back after cfg.backtrack_max
/// reductions. `g` is the batch gradient at w.
StepSize backtracking_newton_step(const Objective& objective, std::span<const double> w, std::span<const double> dw,
                                  std::span<const double> g, Rows rows, double f_w, const NewtonConfig& cfg);

struct NewtonState {
  std::vector<double> w;
  std::vector<double> g_global;
  std::vector<double> dw_prev;
  double global_loss = 0.0;
  std::size_t batch_index = 0;
  int epoch = 0;
  std::size_t accepted_steps = 0;
  bool diverged = false;
};

/// State at w with the global gradient and loss computed over all rows.
NewtonState make_newton_state(const Objective& objective, std::vector<double> w);

struct StepOutcome {
  bool accepted = false;
  double gamma = 0.0;
  double eta = 0.0;
  int cg_iters = 0;
  Termination termination = Termination::BatchSkipped;
  int adjust_attempts = 0;
  bool fell_back = false;
  double batch_loss = 0.0;
  std::optional<double> global_loss;
  double dw_dot_g = 0.0;     // post-screened dw . g_global
  double min_divisor = 0.0;  // from the Krylov loop
  double wall_ms = 0.0;
};

/// One pass over `batches`. Updates state in place and returns one outcome per
/// batch. Numeric failures skip the batch; the epoch itself never throws for
/// them. Violations of the descent invariant throw std::logic_error.
std::vector<StepOutcome> newton_epoch(NewtonState& state, const Objective& objective,
                                      const std::vector<std::vector<std::size_t>>& batches, const NewtonConfig& cfg);

}  // namespace csnk
