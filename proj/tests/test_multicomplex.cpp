#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

#include "csnk/multicomplex.hpp"
#include "csnk/rng.hpp"

using csnk::BiCplx;
using csnk::Cplx;

namespace {

bool same(const Cplx& a, const Cplx& b) { return a.re == b.re && a.im == b.im; }
bool same(const BiCplx& a, const BiCplx& b) { return same(a.re, b.re) && same(a.im, b.im); }

const BiCplx kI1{Cplx{0, 1}, Cplx{0, 0}};
const BiCplx kI2{Cplx{0, 0}, Cplx{1, 0}};

// An analytic function with closed-form first and second derivatives and
// the interval it is tested on.
struct Analytic {
  std::string name;
  std::function<Cplx(Cplx)> f1;
  std::function<BiCplx(BiCplx)> f2;
  std::function<double(double)> real;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  double lo, hi;
};

#define CSNK_FN(expr) [](const auto& x) { return expr; }

std::vector<Analytic> analytic_functions() {
  using std::cos, std::exp, std::sin, std::cosh, std::sinh, std::tanh;
  auto sig = [](double x) { return 1.0 / (1.0 + exp(-x)); };
  return {
      {"exp", CSNK_FN(csnk::exp(x)), CSNK_FN(csnk::exp(x)), CSNK_FN(csnk::exp(x)), [](double x) { return exp(x); },
       [](double x) { return exp(x); }, -5, 5},
      {"expm1", CSNK_FN(csnk::expm1(x)), CSNK_FN(csnk::expm1(x)), CSNK_FN(csnk::expm1(x)),
       [](double x) { return exp(x); }, [](double x) { return exp(x); }, -5, 5},
      {"log", CSNK_FN(csnk::log(x)), CSNK_FN(csnk::log(x)), CSNK_FN(csnk::log(x)), [](double x) { return 1 / x; },
       [](double x) { return -1 / (x * x); }, 0.05, 20},
      {"log1p", CSNK_FN(csnk::log1p(x)), CSNK_FN(csnk::log1p(x)), CSNK_FN(csnk::log1p(x)),
       [](double x) { return 1 / (1 + x); }, [](double x) { return -1 / ((1 + x) * (1 + x)); }, -0.9, 20},
      {"sin", CSNK_FN(csnk::sin(x)), CSNK_FN(csnk::sin(x)), CSNK_FN(csnk::sin(x)), [](double x) { return cos(x); },
       [](double x) { return -sin(x); }, -6, 6},
      {"cos", CSNK_FN(csnk::cos(x)), CSNK_FN(csnk::cos(x)), CSNK_FN(csnk::cos(x)), [](double x) { return -sin(x); },
       [](double x) { return -cos(x); }, -6, 6},
      {"sinh", CSNK_FN(csnk::sinh(x)), CSNK_FN(csnk::sinh(x)), CSNK_FN(csnk::sinh(x)),
       [](double x) { return cosh(x); }, [](double x) { return sinh(x); }, -4, 4},
      {"cosh", CSNK_FN(csnk::cosh(x)), CSNK_FN(csnk::cosh(x)), CSNK_FN(csnk::cosh(x)),
       [](double x) { return sinh(x); }, [](double x) { return cosh(x); }, -4, 4},
      {"tanh", CSNK_FN(csnk::tanh(x)), CSNK_FN(csnk::tanh(x)), CSNK_FN(csnk::tanh(x)),
       [](double x) { return 1 - tanh(x) * tanh(x); },
       [](double x) { return -2 * tanh(x) * (1 - tanh(x) * tanh(x)); }, -4, 4},
      {"sigmoid", CSNK_FN(csnk::sigmoid(x)), CSNK_FN(csnk::sigmoid(x)), CSNK_FN(csnk::sigmoid(x)),
       [=](double x) { return sig(x) * (1 - sig(x)); },
       [=](double x) { return sig(x) * (1 - sig(x)) * (1 - 2 * sig(x)); }, -8, 8},
      {"sqrt", CSNK_FN(csnk::sqrt(x)), CSNK_FN(csnk::sqrt(x)), CSNK_FN(csnk::sqrt(x)),
       [](double x) { return 0.5 / std::sqrt(x); }, [](double x) { return -0.25 / (x * std::sqrt(x)); }, 0.05, 50},
      {"pow5", CSNK_FN(csnk::pow_int(x, 5)), CSNK_FN(csnk::pow_int(x, 5)), CSNK_FN(csnk::pow_int(x, 5)),
       [](double x) { return 5 * std::pow(x, 4); }, [](double x) { return 20 * std::pow(x, 3); }, 0.3, 3},
      {"pow-2", CSNK_FN(csnk::pow_int(x, -2)), CSNK_FN(csnk::pow_int(x, -2)), CSNK_FN(csnk::pow_int(x, -2)),
       [](double x) { return -2 / std::pow(x, 3); }, [](double x) { return 6 / std::pow(x, 4); }, 0.2, 5},
  };
}

}  // namespace

TEST_CASE("complex arithmetic by hand") {
  CHECK(same(Cplx{1, 2} * Cplx{3, 4}, Cplx{-5, 10}));
  CHECK(same(Cplx{0, 1} * Cplx{0, 1}, Cplx{-1, 0}));
  CHECK(same(Cplx{2.5, 0} + Cplx{-1.5, 0}, Cplx{1.0, 0}));
  CHECK(same(Cplx{3, 4} - Cplx{1, 1}, Cplx{2, 3}));
  CHECK(same(-Cplx{3, -4}, Cplx{-3, 4}));
  const Cplx q = Cplx{-5, 10} / Cplx{3, 4};
  CHECK(q.re == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.im == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("complex division by exact zero is a domain error") {
  CHECK_THROWS_AS(Cplx(1, 1) / Cplx(0, 0), csnk::DomainError);
  CHECK_THROWS_AS(Cplx(1, 1) / 0.0, csnk::DomainError);
}

TEST_CASE("bicomplex units") {
  const BiCplx i1i2 = kI1 * kI2;
  CHECK(same(i1i2, BiCplx{Cplx{0, 0}, Cplx{0, 1}}));
  CHECK(same(kI1 * kI1, BiCplx{Cplx{-1, 0}, Cplx{0, 0}}));
  CHECK(same(kI2 * kI2, BiCplx{Cplx{-1, 0}, Cplx{0, 0}}));
  CHECK(same(i1i2 * i1i2, BiCplx{Cplx{1, 0}, Cplx{0, 0}}));
  CHECK(same(kI1 * kI2, kI2 * kI1));
}

TEST_CASE("mixed coefficient of a square is the second derivative") {
  const double x = 3.0, h = 1e-4;
  const BiCplx z = csnk::perturb2(x, h, h);
  const BiCplx sq = z * z;
  // (x + h i1 + h i2)^2 = x^2 - 2h^2 + 2xh i1 + 2xh i2 + 2h^2 i1 i2
  CHECK(sq.re.re == doctest::Approx(x * x - 2 * h * h).epsilon(1e-15));
  CHECK(csnk::imag2(sq) == doctest::Approx(2 * h * h).epsilon(1e-15));
  CHECK(csnk::imag2(sq) / (h * h) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mixed projection picks the i1 i2 coefficient") {
  const BiCplx z{Cplx{1.5, 2.5}, Cplx{3.5, 4.5}};
  CHECK(csnk::imag2(z) == 4.5);
  CHECK(csnk::imag(z.re) == 2.5);
}

TEST_CASE("bicomplex multiplication commutes on representable operands") {
  csnk::Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    auto q = [&] { return std::ldexp(static_cast<double>(rng.below(64)) - 32.0, -3); };
    const BiCplx a{Cplx{q(), q()}, Cplx{q(), q()}};
    const BiCplx b{Cplx{q(), q()}, Cplx{q(), q()}};
    CHECK(same(a * b, b * a));
  }
}

TEST_CASE("bicomplex division") {
  const BiCplx a{Cplx{1, 2}, Cplx{-0.5, 0.25}};
  const BiCplx b{Cplx{3, -1}, Cplx{0.5, 2}};
  const BiCplx back = (a / b) * b;
  CHECK(back.re.re == doctest::Approx(a.re.re).epsilon(1e-14));
  CHECK(back.re.im == doctest::Approx(a.re.im).epsilon(1e-14));
  CHECK(back.im.re == doctest::Approx(a.im.re).epsilon(1e-14));
  CHECK(back.im.im == doctest::Approx(a.im.im).epsilon(1e-14));

  // 1 + i1 i2 satisfies z1^2 + z2^2 = 1 + i^2 = 0: a zero divisor.
  const BiCplx zero_divisor{Cplx{1, 0}, Cplx{0, 1}};
  CHECK_THROWS_WITH_AS(a / zero_divisor, doctest::Contains("zero divisor"), csnk::DomainError);
}

TEST_CASE("field axioms to round-off") {
  csnk::Rng rng(11);
  auto mag = [&] { return std::pow(10.0, rng.uniform(-6, 6)) * (rng.below(2) ? 1 : -1); };
  for (int k = 0; k < 200; ++k) {
    const Cplx a{mag(), mag()}, b{mag(), mag()}, c{mag(), mag()};
    const Cplx l = (a * b) * c, r = a * (b * c);
    const double scale = csnk::magnitude(a) * csnk::magnitude(b) * csnk::magnitude(c);
    CHECK(std::fabs(l.re - r.re) <= 1e-14 * scale);
    CHECK(std::fabs(l.im - r.im) <= 1e-14 * scale);
    const Cplx d = a * (b + c), e = a * b + a * c;
    const double scale2 = csnk::magnitude(a) * (csnk::magnitude(b) + csnk::magnitude(c));
    CHECK(std::fabs(d.re - e.re) <= 1e-14 * scale2);
    CHECK(std::fabs(d.im - e.im) <= 1e-14 * scale2);
  }
}

TEST_CASE("elementary function examples") {
  const double h = 1e-8;
  CHECK(csnk::imag(csnk::exp(csnk::perturb(0.0, h))) / h == doctest::Approx(1.0).epsilon(1e-15));

  const Cplx r = csnk::relu(csnk::perturb(-2.0, 1e-20));
  CHECK(same(r, Cplx{0, 0}));

  const double hh = 1e-5;
  const BiCplx s = csnk::sin(csnk::perturb2(0.7, hh, hh));
  CHECK(csnk::imag2(s) / (hh * hh) == doctest::Approx(-std::sin(0.7)).epsilon(1e-6));
  CHECK(csnk::imag2(s) / (hh * hh) == doctest::Approx(-0.644218).epsilon(1e-6));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(csnk::log(Cplx{0.0, 1.0}), csnk::DomainError);
  CHECK_THROWS_AS(csnk::log(Cplx{-1.0, 0.0}), csnk::DomainError);
  CHECK_THROWS_AS(csnk::log(BiCplx{Cplx{-1.0, 0.0}, Cplx{0, 0}}), csnk::DomainError);
  CHECK_THROWS_AS(csnk::sqrt(Cplx{-2.0, 0.5}), csnk::DomainError);
  CHECK_THROWS_AS(csnk::log(-1.0), csnk::DomainError);
  CHECK_THROWS_AS(csnk::log1p(Cplx{-1.0, 0.0}), csnk::DomainError);
}

TEST_CASE("first-order complex step matches closed-form derivatives") {
  csnk::Rng rng(2024);
  for (const auto& fn : analytic_functions()) {
    CAPTURE(fn.name);
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform(fn.lo, fn.hi);
      CAPTURE(x);
      const double exact = fn.d1(x);
      for (const double h : {1e-6, 1e-20}) {
        const double approx = csnk::imag(fn.f1(csnk::perturb(x, h))) / h;
        CHECK(std::fabs(approx - exact) <= 1e-9 * std::max(std::fabs(exact), 1e-300));
      }
    }
  }
}

TEST_CASE("second-order complex step matches closed-form derivatives") {
  csnk::Rng rng(4048);
  const double h = 1e-5;
  for (const auto& fn : analytic_functions()) {
    CAPTURE(fn.name);
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform(fn.lo, fn.hi);
      CAPTURE(x);
      const double approx = csnk::imag2(fn.f2(csnk::perturb2(x, h, h))) / (h * h);
      const double exact = fn.d2(x);
      CHECK(std::fabs(approx - exact) / std::max(std::fabs(exact), 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("real embedding reproduces the real implementation") {
  csnk::Rng rng(99);
  for (const auto& fn : analytic_functions()) {
    CAPTURE(fn.name);
    for (int k = 0; k < 50; ++k) {
      const double x = rng.uniform(fn.lo, fn.hi);
      const double r = fn.real(x);
      const Cplx c = fn.f1(Cplx{x, 0.0});
      const BiCplx b = fn.f2(BiCplx{Cplx{x, 0.0}, Cplx{0.0, 0.0}});
      CHECK(c.re == r);
      CHECK(c.im == 0.0);
      CHECK(b.re.re == r);
      CHECK(csnk::imag2(b) == 0.0);
    }
  }
}

TEST_CASE("piecewise functions branch on the real part only") {
  csnk::Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-3, 3);
    const double y = rng.uniform(-3, 3);
    const double big = std::pow(10.0, rng.uniform(-20, 2)) * (rng.below(2) ? 1 : -1);
    const Cplx zx{x, big};
    const Cplx zy{y, -big};
    CHECK(same(csnk::relu(zx), x > 0 ? zx : Cplx{0, 0}));
    CHECK(same(csnk::abs(zx), x >= 0 ? zx : -zx));
    CHECK(same(csnk::max2(zx, zy), x >= y ? zx : zy));
    CHECK(same(csnk::elu(zx), x > 0 ? zx : csnk::expm1(zx)));

    const BiCplx bx{Cplx{x, big}, Cplx{-big, big}};
    CHECK(same(csnk::relu(bx), x > 0 ? bx : BiCplx(0.0)));
    CHECK(same(csnk::abs(bx), x >= 0 ? bx : -bx));
  }
  CHECK(same(csnk::abs(Cplx{0.0, -1.0}), Cplx{0.0, -1.0}));
}

TEST_CASE("elu derivative on both sides of the kink") {
  const double h = 1e-20;
  CHECK(csnk::imag(csnk::elu(csnk::perturb(1.5, h))) / h == 1.0);
  CHECK(csnk::imag(csnk::elu(csnk::perturb(-1.5, h))) / h == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
}

TEST_CASE("tanh and sigmoid stay finite far from the origin") {
  for (const double x : {-800.0, -50.0, 50.0, 800.0}) {
    const Cplx t = csnk::tanh(csnk::perturb(x, 1e-20));
    const Cplx s = csnk::sigmoid(csnk::perturb(x, 1e-20));
    CHECK(csnk::is_finite(t));
    CHECK(csnk::is_finite(s));
  }
}
