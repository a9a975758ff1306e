#pragma once

// First- and second-level multicomplex scalars.
//
// A Multicomplex<T> is a + b*i where a, b are T and i is a fresh imaginary
// unit that commutes with every unit already inside T. With T = double this
// is an ordinary complex number (Cplx); with T = Cplx it is a bicomplex
// number (BiCplx) z1 + z2*i2 with z1, z2 over i1. Every routine below is
// written once for Multicomplex<T> in terms of operations on T, so the same
// code serves both levels.
//
// Elementary functions are built from identities that never subtract two
// nearly equal perturbation terms. Piecewise functions choose their branch
// from the real part of the fully real component only, which keeps the
// imaginary parts linear in the perturbation.

#include <cmath>
#include <concepts>
#include <string>
#include <type_traits>

#include "csnk/errors.hpp"

namespace csnk {

template <class T>
struct Multicomplex {
  T re{};
  T im{};

  constexpr Multicomplex() = default;
  constexpr Multicomplex(T r, T i) : re(r), im(i) {}
  // Real embedding; implicit so that real literals mix into expressions.
  constexpr Multicomplex(double r) : re(r), im(0.0) {}  // NOLINT

  friend constexpr bool operator==(const Multicomplex&, const Multicomplex&) = default;
};

using Cplx = Multicomplex<double>;
using BiCplx = Multicomplex<Cplx>;

template <class S>
struct is_multicomplex : std::false_type {};
template <class T>
struct is_multicomplex<Multicomplex<T>> : std::true_type {};

/// The scalar kinds the library is instantiated for.
template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Cplx> || std::same_as<S, BiCplx>;

// --- projections ------------------------------------------------------------

constexpr double real_part(double x) { return x; }
template <class T>
constexpr double real_part(const Multicomplex<T>& z) {
  return real_part(z.re);
}

/// Coefficient of i (first level).
constexpr double imag(const Cplx& z) { return z.im; }

/// Coefficient of the mixed unit i1*i2 of a bicomplex number.
constexpr double imag2(const BiCplx& z) { return z.im.im; }

/// Sum of absolute values of all components; used for branch selection only.
inline double magnitude(double x) { return std::fabs(x); }
template <class T>
double magnitude(const Multicomplex<T>& z) {
  return magnitude(z.re) + magnitude(z.im);
}

inline bool is_zero(double x) { return x == 0.0; }
template <class T>
bool is_zero(const Multicomplex<T>& z) {
  return is_zero(z.re) && is_zero(z.im);
}

inline bool is_finite(double x) { return std::isfinite(x); }
template <class T>
bool is_finite(const Multicomplex<T>& z) {
  return is_finite(z.re) && is_finite(z.im);
}

/// x + d*i.
constexpr Cplx perturb(double x, double d) { return {x, d}; }

/// x + d1*i1 + d2*i2.
constexpr BiCplx perturb2(double x, double d1, double d2) { return {Cplx{x, d1}, Cplx{d2, 0.0}}; }

// --- arithmetic -------------------------------------------------------------

template <class T>
constexpr Multicomplex<T> operator-(const Multicomplex<T>& a) {
  return {-a.re, -a.im};
}

template <class T>
constexpr Multicomplex<T> operator+(const Multicomplex<T>& a, const Multicomplex<T>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class T>
constexpr Multicomplex<T> operator-(const Multicomplex<T>& a, const Multicomplex<T>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class T>
constexpr Multicomplex<T> operator*(const Multicomplex<T>& a, const Multicomplex<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
constexpr Multicomplex<T> operator+(const Multicomplex<T>& a, double s) {
  return {a.re + s, a.im};
}
template <class T>
constexpr Multicomplex<T> operator+(double s, const Multicomplex<T>& a) {
  return {s + a.re, a.im};
}
template <class T>
constexpr Multicomplex<T> operator-(const Multicomplex<T>& a, double s) {
  return {a.re - s, a.im};
}
template <class T>
constexpr Multicomplex<T> operator-(double s, const Multicomplex<T>& a) {
  return {s - a.re, -a.im};
}
template <class T>
constexpr Multicomplex<T> operator*(const Multicomplex<T>& a, double s) {
  return {a.re * s, a.im * s};
}
template <class T>
constexpr Multicomplex<T> operator*(double s, const Multicomplex<T>& a) {
  return {s * a.re, s * a.im};
}

template <class T>
Multicomplex<T> operator/(const Multicomplex<T>& a, double s) {
  if (s == 0.0) throw DomainError("division by exact zero");
  return {a.re / s, a.im / s};
}

// Smith's algorithm. With zero imaginary parts it reduces to a.re / b.re
// exactly, so real embeddings divide bit-for-bit like doubles.
template <class T>
Multicomplex<T> operator/(const Multicomplex<T>& a, const Multicomplex<T>& b) {
  if constexpr (std::is_same_v<T, double>) {
    if (b.re == 0.0 && b.im == 0.0) throw DomainError("division by exact zero");
  } else {
    // z1 + z2*i2 is invertible iff z1^2 + z2^2 != 0 over the inner level.
    if (is_zero(b.re * b.re + b.im * b.im))
      throw DomainError("bicomplex divisor is a zero divisor (z1^2 + z2^2 = 0)");
  }
  if (magnitude(b.re) >= magnitude(b.im)) {
    const T r = b.im / b.re;
    const T den = b.re + b.im * r;
    return {(a.re + a.im * r) / den, (a.im - a.re * r) / den};
  }
  const T r = b.re / b.im;
  const T den = b.re * r + b.im;
  return {(a.re * r + a.im) / den, (a.im * r - a.re) / den};
}

template <class T>
Multicomplex<T> operator/(double s, const Multicomplex<T>& b) {
  return Multicomplex<T>(s) / b;
}

template <class T>
constexpr Multicomplex<T>& operator+=(Multicomplex<T>& a, const Multicomplex<T>& b) {
  a.re += b.re;
  a.im += b.im;
  return a;
}
template <class T>
constexpr Multicomplex<T>& operator-=(Multicomplex<T>& a, const Multicomplex<T>& b) {
  a.re -= b.re;
  a.im -= b.im;
  return a;
}
template <class T>
constexpr Multicomplex<T>& operator+=(Multicomplex<T>& a, double s) {
  a.re += s;
  return a;
}
template <class T>
constexpr Multicomplex<T>& operator-=(Multicomplex<T>& a, double s) {
  a.re -= s;
  return a;
}
template <class T>
constexpr Multicomplex<T>& operator*=(Multicomplex<T>& a, const Multicomplex<T>& b) {
  a = a * b;
  return a;
}
template <class T>
constexpr Multicomplex<T>& operator*=(Multicomplex<T>& a, double s) {
  a.re *= s;
  a.im *= s;
  return a;
}
template <class T>
Multicomplex<T>& operator/=(Multicomplex<T>& a, const Multicomplex<T>& b) {
  a = a / b;
  return a;
}

// --- elementary functions: real base cases -----------------------------------
//
// These are the double-level versions used by the recursive definitions and by
// real-valued network code, so real and multicomplex evaluations share one
// formula per function.

inline double exp(double x) { return std::exp(x); }
inline double expm1(double x) { return std::expm1(x); }
// Kept out of line: the compiler would otherwise fuse sin and cos of the same
// argument into sincos, which can differ from sin in the last bit.
[[gnu::noinline]] inline double sin(double x) { return std::sin(x); }
[[gnu::noinline]] inline double cos(double x) { return std::cos(x); }
inline double sinh(double x) { return std::sinh(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double atan(double x) { return std::atan(x); }

inline double log(double x) {
  if (!(x > 0.0)) throw DomainError("log of non-positive real part " + std::to_string(x));
  return std::log(x);
}
inline double log1p(double x) {
  if (!(x > -1.0)) throw DomainError("log1p of real part <= -1: " + std::to_string(x));
  return std::log1p(x);
}
inline double sqrt(double x) {
  if (x < 0.0) throw DomainError("sqrt of negative real part " + std::to_string(x));
  return std::sqrt(x);
}

// --- elementary functions: multicomplex -------------------------------------

template <class T>
Multicomplex<T> exp(const Multicomplex<T>& z) {
  const T ea = exp(z.re);
  return {ea * cos(z.im), ea * sin(z.im)};
}

// e^a cos b - 1 = expm1(a) cos b - 2 sin^2(b/2); no cancellation for small b.
template <class T>
Multicomplex<T> expm1(const Multicomplex<T>& z) {
  const T s = sin(z.im * 0.5);
  return {expm1(z.re) * cos(z.im) - 2.0 * (s * s), exp(z.re) * sin(z.im)};
}

template <class T>
Multicomplex<T> sin(const Multicomplex<T>& z) {
  return {sin(z.re) * cosh(z.im), cos(z.re) * sinh(z.im)};
}

template <class T>
Multicomplex<T> cos(const Multicomplex<T>& z) {
  return {cos(z.re) * cosh(z.im), -(sin(z.re) * sinh(z.im))};
}

template <class T>
Multicomplex<T> sinh(const Multicomplex<T>& z) {
  return {sinh(z.re) * cos(z.im), cosh(z.re) * sin(z.im)};
}

template <class T>
Multicomplex<T> cosh(const Multicomplex<T>& z) {
  return {cosh(z.re) * cos(z.im), sinh(z.re) * sin(z.im)};
}

// atan(u + v i) = 1/2 atan2(2u, 1 - u^2 - v^2) + i/4 log1p(4v / ((1 - v)^2 + u^2)).
// Needed only at the first level (log of a bicomplex argument).
inline Cplx atan(const Cplx& z) {
  const double u = z.re;
  const double v = z.im;
  const double re = 0.5 * std::atan2(2.0 * u, (1.0 - u * u) - v * v);
  const double one_minus_v = 1.0 - v;
  const double im = 0.25 * std::log1p(4.0 * v / (one_minus_v * one_minus_v + u * u));
  return {re, im};
}

namespace detail {

// log(1 + t*i) for t over the inner level.
template <class T>
Multicomplex<T> log_one_plus_i(const T& t) {
  return {0.5 * log1p(t * t), atan(t)};
}

}  // namespace detail

// log(a + b i) = log(a) + log(1 + (b/a) i); requires Re(a) > 0.
template <class T>
Multicomplex<T> log(const Multicomplex<T>& z) {
  if (!(real_part(z) > 0.0))
    throw DomainError("log of non-positive real part " + std::to_string(real_part(z)));
  const Multicomplex<T> tail = detail::log_one_plus_i<T>(z.im / z.re);
  return {log(z.re) + tail.re, tail.im};
}

template <class T>
Multicomplex<T> log1p(const Multicomplex<T>& z) {
  if (!(real_part(z) > -1.0))
    throw DomainError("log1p of real part <= -1: " + std::to_string(real_part(z)));
  const Multicomplex<T> tail = detail::log_one_plus_i<T>(z.im / (1.0 + z.re));
  return {log1p(z.re) + tail.re, tail.im};
}

template <class T>
Multicomplex<T> sqrt(const Multicomplex<T>& z) {
  if (!(real_part(z) > 0.0))
    throw DomainError("sqrt of non-positive real part " + std::to_string(real_part(z)));
  const T m = sqrt(z.re * z.re + z.im * z.im);
  const T s = sqrt((m + z.re) * 0.5);
  return {s, z.im / (2.0 * s)};
}

// --- functions generic over every scalar kind --------------------------------

/// tanh via expm1 on the non-positive half-line; overflow-free for large |x|.
template <Scalar S>
S tanh(const S& x) {
  if (real_part(x) >= 0.0) {
    const S m = expm1(-2.0 * x);
    return -m / (2.0 + m);
  }
  const S m = expm1(2.0 * x);
  return m / (2.0 + m);
}

template <Scalar S>
S sigmoid(const S& x) {
  if (real_part(x) >= 0.0) return 1.0 / (1.0 + exp(-x));
  const S e = exp(x);
  return e / (1.0 + e);
}

template <Scalar S>
S pow_int(const S& x, int n) {
  if (n < 0) return 1.0 / pow_int(x, -n);
  S result(1.0);
  S base = x;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

template <Scalar S>
S relu(const S& x) {
  return real_part(x) > 0.0 ? x : S(0.0);
}

/// ELU with unit scale.
template <Scalar S>
S elu(const S& x) {
  return real_part(x) > 0.0 ? x : expm1(x);
}

/// x * sign(Re x), with sign(0) = +1.
template <Scalar S>
S abs(const S& x) {
  return real_part(x) >= 0.0 ? x : S(-x);
}

template <Scalar S>
S max2(const S& a, const S& b) {
  return real_part(a) >= real_part(b) ? a : b;
}

}  // namespace csnk
