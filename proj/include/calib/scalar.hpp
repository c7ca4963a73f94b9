#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <ostream>
#include <type_traits>

namespace calib {

/// Exact rational scalar.
using Rational = mpq_class;
using Complexd = std::complex<double>;

/// Complex number over an exact field. std::complex is only specified for
/// floating types, so exact complex arithmetic gets its own small type.
template <class T>
struct Complex {
  T re{0};
  T im{0};

  Complex() = default;
  Complex(T r) : re(std::move(r)), im(0) {}  // NOLINT(implicit)
  Complex(T r, T i) : re(std::move(r)), im(std::move(i)) {}
  Complex(int r) : re(r), im(0) {}  // NOLINT(implicit)

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) {
    T r = re * o.re - im * o.im;
    T i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator-(const Complex& a) { return Complex(T(-a.re), T(-a.im)); }
  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
  friend Complex conj(const Complex& a) { return Complex(a.re, T(-a.im)); }
  friend std::ostream& operator<<(std::ostream& os, const Complex& a) {
    return os << "(" << a.re << "," << a.im << ")";
  }
};

using ComplexQ = Complex<Rational>;

/// Uniform access to the handful of scalar operations the generic algebra
/// needs. Specialised for every coefficient ring used in the library.
template <class S, class Enable = void>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double zero() { return 0.0; }
  static double from_int(long v) { return static_cast<double>(v); }
  static bool is_zero(double v) { return v == 0.0; }
  static double abs2(double v) { return v * v; }
  static double conj(double v) { return v; }
  static double inv_int(long k) { return 1.0 / static_cast<double>(k); }
  static constexpr bool is_complex = false;
  static constexpr bool is_exact = false;
};

template <>
struct ScalarTraits<Complexd> {
  static Complexd zero() { return {0.0, 0.0}; }
  static Complexd from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static Complexd imag_unit() { return {0.0, 1.0}; }
  static bool is_zero(const Complexd& v) { return v.real() == 0.0 && v.imag() == 0.0; }
  static double abs2(const Complexd& v) { return std::norm(v); }
  static Complexd conj(const Complexd& v) { return std::conj(v); }
  static Complexd inv_int(long k) { return {1.0 / static_cast<double>(k), 0.0}; }
  static constexpr bool is_complex = true;
  static constexpr bool is_exact = false;
};

template <>
struct ScalarTraits<Rational> {
  static Rational zero() { return Rational(0); }
  static Rational from_int(long v) { return Rational(v); }
  static bool is_zero(const Rational& v) { return sgn(v) == 0; }
  static double abs2(const Rational& v) {
    double d = v.get_d();
    return d * d;
  }
  static Rational conj(const Rational& v) { return v; }
  static Rational inv_int(long k) {
    Rational r(1, k);
    r.canonicalize();
    return r;
  }
  static constexpr bool is_complex = false;
  static constexpr bool is_exact = true;
};

template <>
struct ScalarTraits<ComplexQ> {
  static ComplexQ zero() { return ComplexQ(); }
  static ComplexQ from_int(long v) { return ComplexQ(Rational(v)); }
  static ComplexQ imag_unit() { return ComplexQ(Rational(0), Rational(1)); }
  static bool is_zero(const ComplexQ& v) { return sgn(v.re) == 0 && sgn(v.im) == 0; }
  static double abs2(const ComplexQ& v) {
    double r = v.re.get_d(), i = v.im.get_d();
    return r * r + i * i;
  }
  static ComplexQ conj(const ComplexQ& v) { return conj(v); }
  static ComplexQ inv_int(long k) { return ComplexQ(ScalarTraits<Rational>::inv_int(k)); }
  static constexpr bool is_complex = true;
  static constexpr bool is_exact = true;
};

template <class S>
bool is_zero(const S& v) {
  return ScalarTraits<S>::is_zero(v);
}

/// Lossy conversion used when an exact computation feeds a floating one.
inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }
inline Complexd to_complexd(double v) { return {v, 0.0}; }
inline Complexd to_complexd(const Complexd& v) { return v; }
inline Complexd to_complexd(const Rational& v) { return {v.get_d(), 0.0}; }
inline Complexd to_complexd(const ComplexQ& v) { return {v.re.get_d(), v.im.get_d()}; }

}  // namespace calib
