#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "csnk/dataset.hpp"
#include "csnk/first_order.hpp"
#include "csnk/newton_krylov.hpp"
#include "csnk/synthetic.hpp"
#include "support.hpp"

using csnk::EQTracker;
using csnk::NewtonConfig;
using csnk::QuadraticObjective;
using csnk::QuarticObjective;
using csnk::Termination;
using testing::dot;
using testing::norm;

namespace {

const std::vector<std::size_t> kRow{0};

std::vector<double> identity(std::size_t n, double scale = 1.0) {
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = scale;
  return a;
}

std::vector<double> gradient(const csnk::Objective& obj, const std::vector<double>& w) {
  std::vector<double> g(w.size());
  obj.loss_and_gradient(w, obj.all_rows(), g);
  return g;
}

// Textbook CG on A x = -g from x = 0, recording residual norms.
std::vector<double> reference_cg_residuals(const std::vector<double>& a, const std::vector<double>& g, int iters) {
  const std::size_t n = g.size();
  std::vector<double> x(n, 0.0), r(n), p(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
  p = r;
  double rr = dot(r, r);
  std::vector<double> out{std::sqrt(rr)};
  for (int k = 0; k < iters; ++k) {
    const auto ap = testing::matvec(a, p);
    const double alpha = rr / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i], r[i] -= alpha * ap[i];
    const double next = dot(r, r);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + next / rr * p[i];
    rr = next;
    out.push_back(std::sqrt(rr));
  }
  return out;
}

// Each single-row batch sees the negated full objective, so every batch
// gradient opposes the global one.
class AdversarialObjective : public csnk::ObjectiveFor<AdversarialObjective> {
 public:
  std::size_t dim() const override { return 3; }
  std::size_t sample_count() const override { return 4; }

  template <csnk::Scalar S>
  S value(std::span<const S> w, csnk::Rows rows) const {
    S f(0.0);
    for (const auto& x : w) f += x * x * 0.5;
    return rows.size() == sample_count() ? f : S(-f);
  }
  template <csnk::Scalar S>
  S value_and_gradient(std::span<const S> w, csnk::Rows rows, std::span<S> grad) const {
    const double sign = rows.size() == sample_count() ? 1.0 : -1.0;
    for (std::size_t i = 0; i < w.size(); ++i) grad[i] = w[i] * sign;
    return value<S>(w, rows);
  }
};

}  // namespace

TEST_CASE("configuration defaults and validation") {
  const NewtonConfig cfg;
  CHECK(cfg.eta_tilde == 0.05);
  CHECK(cfg.flat_eps == 1e-8);
  CHECK(cfg.flat_momentum_coef == 0.01);
  CHECK(cfg.step_shrink == 0.5);
  CHECK(cfg.step_grow == 1.5);
  CHECK(cfg.fallback_gamma == 1e-6);
  CHECK(cfg.cg_max_iters == 20);
  CHECK(cfg.max_step_adjust == 20);
  CHECK(cfg.warm_start);
  CHECK_NOTHROW(cfg.validate());
  NewtonConfig bad = cfg;
  bad.eta_tilde = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.step_grow = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("pre-batch screening") {
  const std::vector<double> g{1.0, -2.0, 0.5};
  const std::vector<double> neg{-1.0, 2.0, -0.5};
  const std::vector<double> orth{2.0, 1.0, 0.0};
  CHECK(csnk::prebatch_screen(g, g));
  CHECK_FALSE(csnk::prebatch_screen(neg, g));
  CHECK(csnk::prebatch_screen(orth, g));
}

TEST_CASE("CG solves the 2x2 example exactly in two iterations") {
  const QuadraticObjective q({2, 1, 1, 3}, {1, 1});
  const std::vector<double> w{0, 0};
  const auto g = gradient(q, w);
  const auto r = csnk::krylov_solve(q, w, g, kRow, {}, NewtonConfig{});
  CHECK(r.cg_iters == 2);
  CHECK(r.termination == Termination::ResidualSmall);
  CHECK(r.dw[0] == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(r.dw[1] == doctest::Approx(-0.2).epsilon(1e-12));
  // E_Q at the solution is -g'A^{-1}g / 2 = -0.3.
  CHECK(r.tracker.at(1.0) == doctest::Approx(-0.3).epsilon(1e-10));
}

TEST_CASE("concave quadratic stops on the first direction") {
  const QuadraticObjective q(identity(2, -1.0), {0, 0});
  const std::vector<double> w{0.5, -1.5};
  const auto r = csnk::krylov_solve(q, w, gradient(q, w), kRow, {}, NewtonConfig{});
  CHECK(r.termination == Termination::NegativeCurvature);
  CHECK(r.cg_iters == 0);
  CHECK(r.dw == std::vector<double>{0, 0});
}

TEST_CASE("flat direction never divides by zero") {
  const QuadraticObjective q({1, 0, 0, 0}, {0, 0});
  SUBCASE("gradient along the curved mode") {
    const std::vector<double> w{1, 0};
    const auto r = csnk::krylov_solve(q, w, gradient(q, w), kRow, {}, NewtonConfig{});
    CHECK(r.termination == Termination::ResidualSmall);
    CHECK(r.dw[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.dw[1] == 0.0);
  }
  SUBCASE("gradient with a flat component") {
    const std::vector<double> g{1, 1};
    const std::vector<double> w{1, 0};
    const auto r = csnk::krylov_solve(q, w, g, kRow, {}, NewtonConfig{});
    CHECK(r.min_divisor > 0.0);
    CHECK(std::isfinite(r.min_divisor));
    for (const double v : r.dw) CHECK(std::isfinite(v));
    // Second direction is (0, -2): zero curvature replaced by 0.01 * |p| = 0.02.
    CHECK(r.min_divisor == doctest::Approx(0.02).epsilon(1e-12));
  }
}

TEST_CASE("CG reproduces textbook iterates on SPD quadratics") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 4 + seed % 8;
    const auto a = csnk::random_spd(n, 10.0, seed);
    csnk::Rng rng(seed + 77);
    const auto b = testing::random_vector(n, rng);
    const QuadraticObjective q(a, b);
    const std::vector<double> w(n, 0.0);
    NewtonConfig cfg;
    cfg.cg_residual_tol = 0.0;
    cfg.cg_max_iters = static_cast<int>(n) - 1;
    cfg.early_termination = false;
    const auto r = csnk::krylov_solve(q, w, b, kRow, {}, cfg);
    const auto ref = reference_cg_residuals(a, b, cfg.cg_max_iters);
    REQUIRE(r.residual_norms.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CAPTURE(seed);
      CHECK(testing::rel(r.residual_norms[k], ref[k]) <= 1e-10);
    }
    for (std::size_t k = 1; k < r.energies.size(); ++k) CHECK(r.energies[k] <= r.energies[k - 1] + 1e-14);
  }
}

TEST_CASE("CG is invariant to the gradient scale") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 6 + seed;
    const auto a = csnk::random_spd(n, 50.0, 40 + seed);
    csnk::Rng rng(seed);
    const auto g = testing::random_vector(n, rng);
    const QuadraticObjective q(a, g);
    const std::vector<double> w(n, 0.0);
    NewtonConfig cfg;
    cfg.cg_residual_tol = 1e-12;
    cfg.cg_max_iters = static_cast<int>(n);
    const auto ref = csnk::krylov_solve(q, w, g, kRow, {}, cfg);
    for (const double s : {1e-9, 1e6}) {
      std::vector<double> gs(g);
      for (auto& v : gs) v *= s;
      const auto r = csnk::krylov_solve(q, w, gs, kRow, {}, cfg);
      CHECK(r.cg_iters == ref.cg_iters);
      for (std::size_t i = 0; i < n; ++i) CHECK(r.dw[i] == doctest::Approx(s * ref.dw[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("warm start begins from the given step") {
  const QuadraticObjective q({2, 1, 1, 3}, {1, 1});
  const std::vector<double> w{0, 0};
  const std::vector<double> warm{-0.4, -0.2};
  const auto r = csnk::krylov_solve(q, w, gradient(q, w), kRow, warm, NewtonConfig{});
  CHECK(r.cg_iters == 0);
  CHECK(r.termination == Termination::ResidualSmall);
  CHECK(r.dw == warm);
}

TEST_CASE("non-finite curvature skips the batch") {
  const QuarticObjective q({1.0});
  const std::vector<double> w{1e100};
  const auto r = csnk::krylov_solve(q, w, std::vector<double>{1e300}, kRow, {}, NewtonConfig{});
  CHECK(r.termination == Termination::BatchSkipped);
  CHECK(r.dw == std::vector<double>{0.0});
}

TEST_CASE("post-batch screening") {
  const std::vector<double> g{1.0, 2.0, -1.0};
  const std::vector<double> minus_g{-1.0, -2.0, 1.0};
  CHECK(csnk::postbatch_screen(minus_g, g) == minus_g);

  const auto zeroed = csnk::postbatch_screen(g, g);
  for (const double v : zeroed) CHECK(std::fabs(v) <= 1e-15);
  CHECK(dot(zeroed, g) <= 0.0);

  const std::vector<double> v{2.0, -1.0, 0.0};  // v . g = 0
  std::vector<double> mixed(3);
  for (std::size_t i = 0; i < 3; ++i) mixed[i] = g[i] + v[i];
  const auto proj = csnk::postbatch_screen(mixed, g);
  for (std::size_t i = 0; i < 3; ++i) CHECK(proj[i] == doctest::Approx(v[i]).epsilon(1e-14));

  CHECK(csnk::postbatch_screen(g, std::vector<double>{0, 0, 0}) == g);
}

TEST_CASE("post-screened steps never ascend") {
  csnk::Rng rng(17);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t n = 1 + rng.below(50);
    auto dw = testing::random_vector(n, rng, std::pow(10.0, rng.uniform(-8, 8)));
    const auto g = testing::random_vector(n, rng, std::pow(10.0, rng.uniform(-8, 8)));
    CHECK(dot(csnk::postbatch_screen(dw, g), g) <= 0.0);
  }
}

TEST_CASE("Taylor ratio") {
  // f = w^4 at w = 1, dw = -0.1: E_Q = -0.4 + 0.06, f change = 0.9^4 - 1.
  const EQTracker t{4.0 * -0.1, 12.0 * 0.01};
  CHECK(t.at(1.0) == doctest::Approx(-0.34));
  const double change = std::pow(0.9, 4) - 1.0;
  const double eta = csnk::taylor_ratio(1.0, std::pow(0.9, 4), t, 1.0);
  CHECK(eta == doctest::Approx(std::fabs((change + 0.34) / change)).epsilon(1e-12));
  CHECK(eta == doctest::Approx(0.01134).epsilon(1e-3));

  CHECK(csnk::taylor_ratio(2.0, 2.0 + t.at(0.5), t, 0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK(csnk::taylor_ratio(1.0, 1.0 + 1e-31, t, 1.0) == 0.0);

  // Exact on a quadratic after a full solve.
  const QuadraticObjective q({2, 1, 1, 3}, {1, 1});
  const std::vector<double> w{0.3, 0.1};
  const auto g = gradient(q, w);
  const auto r = csnk::krylov_solve(q, w, g, kRow, {}, NewtonConfig{});
  for (const double gamma : {0.1, 0.5, 1.0, 1.7}) {
    std::vector<double> trial(w);
    for (std::size_t i = 0; i < 2; ++i) trial[i] += gamma * r.dw[i];
    CHECK(csnk::taylor_ratio(q.loss(w, kRow), q.loss(trial, kRow), r.tracker, gamma) <= 1e-10);
  }
}

TEST_CASE("step sizing") {
  NewtonConfig cfg;
  SUBCASE("quadratic accepts the full step at once") {
    const QuadraticObjective q(identity(3), {0.5, 0, -1});
    const std::vector<double> w{1, 2, 3};
    const auto g = gradient(q, w);
    const auto r = csnk::krylov_solve(q, w, g, kRow, {}, cfg);
    const auto s = csnk::size_step(q, w, r.dw, r.tracker, kRow, q.loss(w, kRow), cfg);
    CHECK(s.gamma == 1.0);
    CHECK(s.attempts == 0);
    CHECK(s.eta <= 1e-12);
  }
  SUBCASE("quartic shrinks into the band") {
    cfg.eta_tilde = 0.005;
    const QuarticObjective q({1.0});
    const std::vector<double> w{1.0};
    const std::vector<double> dw{-0.1};
    const EQTracker t{-0.4, 0.12};
    const auto s = csnk::size_step(q, w, dw, t, kRow, 1.0, cfg);
    CHECK(s.gamma < 1.0);
    CHECK(s.attempts >= 1);
    CHECK_FALSE(s.fell_back);
    CHECK(s.eta >= 0.0025);
    CHECK(s.eta <= 0.005);
  }
  SUBCASE("a hopeless model falls back to the tiny step") {
    // The tracker has the wrong slope sign, so eta stays near 2 for every gamma.
    const QuadraticObjective q(identity(1), {0});
    const std::vector<double> w{1.0};
    const std::vector<double> dw{-1.0};
    const EQTracker wrong{1.0, 0.0};
    const auto s = csnk::size_step(q, w, dw, wrong, kRow, 0.5, cfg);
    CHECK(s.fell_back);
    CHECK(s.gamma == 1e-6);
    CHECK(s.attempts == cfg.max_step_adjust);
  }
}

TEST_CASE("Armijo backtracking") {
  NewtonConfig cfg;
  SUBCASE("exact Newton step on a quadratic") {
    const QuadraticObjective q({2, 1, 1, 3}, {1, 1});
    const std::vector<double> w{0, 0};
    const auto g = gradient(q, w);
    const auto r = csnk::krylov_solve(q, w, g, kRow, {}, cfg);
    const auto s = csnk::backtracking_newton_step(q, w, r.dw, g, kRow, q.loss(w, kRow), cfg);
    CHECK(s.gamma == 1.0);
    CHECK(s.attempts == 0);
  }
  SUBCASE("flat slope with increasing loss falls back") {
    // At the minimum every trial strictly raises f, even at the smallest gamma.
    const QuadraticObjective q(identity(2), {0, 0});
    const std::vector<double> w{0, 0};
    const std::vector<double> dw{0, 1};
    const auto s = csnk::backtracking_newton_step(q, w, dw, gradient(q, w), kRow, 0.0, cfg);
    CHECK(s.fell_back);
    CHECK(s.gamma == 1e-6);
  }
  SUBCASE("quartic Newton step") {
    const QuarticObjective q({1.0});
    const std::vector<double> w{1.0};
    const std::vector<double> dw{-1.0 / 3.0};
    const double f_new = std::pow(2.0 / 3.0, 4);
    REQUIRE(f_new <= 1.0 - 0.01 * 4.0 / 3.0);
    const auto s = csnk::backtracking_newton_step(q, w, dw, std::vector<double>{4.0}, kRow, 1.0, cfg);
    CHECK(s.gamma == 1.0);
    CHECK(s.attempts == 0);
  }
}

TEST_CASE("one Newton step solves a unit quadratic") {
  const QuadraticObjective q(identity(4), {0, 0, 0, 0});
  auto state = csnk::make_newton_state(q, {3.0, -1.0, 0.25, 7.0});
  const auto out = csnk::newton_epoch(state, q, {{0}}, NewtonConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].accepted);
  CHECK(out[0].gamma == 1.0);
  CHECK(out[0].eta <= 1e-12);
  CHECK(norm(state.w) <= 1e-10);
  CHECK(state.epoch == 1);
}

TEST_CASE("adversarial batches are all skipped") {
  const AdversarialObjective obj;
  const std::vector<double> w0{1.0, -2.0, 0.5};
  auto state = csnk::make_newton_state(obj, w0);
  const auto out = csnk::newton_epoch(state, obj, {{0}, {1}, {2}, {3}}, NewtonConfig{});
  for (const auto& o : out) {
    CHECK_FALSE(o.accepted);
    CHECK(o.termination == Termination::BatchSkipped);
  }
  CHECK(state.w == w0);
}

TEST_CASE("negative curvature at the start falls back to a gradient step") {
  // Indefinite quadratic with the gradient along the negative eigenvector.
  const auto q_vecs = csnk::random_orthogonal(3, 9);
  const auto a = csnk::matrix_with_spectrum({-2.0, 1.0, 3.0}, 9);
  const std::vector<double> v(q_vecs.begin(), q_vecs.begin() + 3);
  const QuadraticObjective q(a, {0, 0, 0});
  // w = v gives g = A v = -2 v.
  auto state = csnk::make_newton_state(q, v);
  const double f0 = state.global_loss;
  NewtonConfig cfg;
  cfg.warm_start = false;
  const auto out = csnk::newton_epoch(state, q, {{0}}, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].termination == Termination::NegativeCurvature);
  CHECK(out[0].cg_iters == 0);
  CHECK(out[0].accepted);
  CHECK(*out[0].global_loss < f0);
}

TEST_CASE("full-batch logistic regression descends every accepted step") {
  const auto data = csnk::make_blobs(200, 5, 2, 1.5, 3);
  const csnk::Model lr({csnk::DenseLayer{5, 2, true}});
  const csnk::NetworkObjective obj(lr, csnk::LossKind::CrossEntropySoftmax, csnk::to_batch(data));
  auto state = csnk::make_newton_state(obj, lr.init_params(3));
  double prev = state.global_loss;
  const auto all = obj.all_rows();
  const std::vector<std::vector<std::size_t>> full{std::vector<std::size_t>(all.begin(), all.end())};
  for (int epoch = 0; epoch < 10; ++epoch) {
    for (const auto& o : csnk::newton_epoch(state, obj, full, NewtonConfig{})) {
      if (!o.accepted) continue;
      REQUIRE(o.global_loss.has_value());
      CHECK(*o.global_loss < prev);
      prev = *o.global_loss;
    }
  }
}

TEST_CASE("descent and step invariants over many random steps") {
  int steps = 0;
  for (std::uint64_t seed = 0; steps < 400; ++seed) {
    const auto c = testing::random_net(4000 + seed, 60);
    csnk::Rng rng(seed);
    // Widen the batch so there are several minibatches.
    const std::size_t rows = 12;
    csnk::Batch b = testing::random_batch(rows, c.model.input_dim(), c.model.output_dim(), c.loss, rng);
    const csnk::NetworkObjective obj(c.model, c.loss, b);
    auto state = csnk::make_newton_state(obj, c.w);
    NewtonConfig cfg;
    cfg.warm_start = seed % 2 == 0;
    const std::vector<std::vector<std::size_t>> batches{{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}};
    for (int epoch = 0; epoch < 3; ++epoch) {
      for (const auto& o : csnk::newton_epoch(state, obj, batches, cfg)) {
        ++steps;
        if (o.termination == Termination::BatchSkipped) continue;
        CHECK(o.dw_dot_g <= 0.0);
        CHECK(o.min_divisor > 0.0);
        if (o.accepted) CHECK((o.eta <= cfg.eta_tilde || o.gamma == cfg.fallback_gamma));
      }
    }
  }
}

TEST_CASE("SGD and Adam updates") {
  std::vector<double> w{1.0};
  csnk::sgd_step(w, std::vector<double>{1.0}, 0.1);  // f = w^2/2, g = w
  CHECK(w[0] == doctest::Approx(0.9));

  csnk::AdamState st(3);
  std::vector<double> u{1.0, -2.0, 3.0};
  const auto before = u;
  csnk::adam_step(st, u, std::vector<double>{0, 0, 0}, csnk::AdamConfig{});
  CHECK(u == before);

  csnk::AdamState st2(3);
  csnk::AdamConfig cfg;
  cfg.lr = 0.01;
  std::vector<double> z{0, 0, 0};
  csnk::adam_step(st2, z, std::vector<double>{2.5, 2.5, 2.5}, cfg);
  for (const double v : z) CHECK(v == doctest::Approx(-0.01).epsilon(1e-8));
  CHECK(st2.t == 1);
}
