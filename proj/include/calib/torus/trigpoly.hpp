#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "calib/scalar.hpp"

namespace calib {

inline constexpr int kMaxTorusDim = 8;

/// Integer frequency vector k in Z^n (n <= 8, |k_i| <= 127).
struct Freq {
  std::array<std::int8_t, kMaxTorusDim> k{};

  Freq() = default;
  explicit Freq(const std::vector<int>& v) {
    if (v.size() > static_cast<std::size_t>(kMaxTorusDim)) throw std::invalid_argument("frequency: too many components");
    for (std::size_t i = 0; i < v.size(); ++i) k[i] = narrow(v[i]);
  }
  static Freq unit(int j, int s = 1) {
    Freq f;
    f.k[j] = narrow(s);
    return f;
  }
  int operator[](int i) const { return k[i]; }
  bool is_zero() const {
    for (auto c : k)
      if (c != 0) return false;
    return true;
  }
  std::vector<int> to_vector(int n) const { return std::vector<int>(k.begin(), k.begin() + n); }
  int max_abs() const {
    int m = 0;
    for (auto c : k) m = std::max(m, std::abs(static_cast<int>(c)));
    return m;
  }
  friend Freq operator+(const Freq& a, const Freq& b) {
    Freq r;
    for (int i = 0; i < kMaxTorusDim; ++i) r.k[i] = narrow(a.k[i] + b.k[i]);
    return r;
  }
  friend Freq operator-(const Freq& a) {
    Freq r;
    for (int i = 0; i < kMaxTorusDim; ++i) r.k[i] = narrow(-a.k[i]);
    return r;
  }
  friend Freq operator-(const Freq& a, const Freq& b) { return a + (-b); }
  auto operator<=>(const Freq&) const = default;

 private:
  static std::int8_t narrow(int v) {
    if (v > 127 || v < -127) throw std::overflow_error("frequency component out of range");
    return static_cast<std::int8_t>(v);
  }
};

/// Global cap on the number of modes in a single trigonometric polynomial.
inline std::size_t& trig_support_cap() {
  static std::size_t cap = 200000;
  return cap;
}

/// Finite Fourier series sum_k c_k e^{i<k,x>} with coefficients in C
/// (Complexd or ComplexQ). Exact zeros are pruned.
template <class C>
class TrigPoly {
 public:
  using Coeff = C;
  using Modes = std::map<Freq, C>;

  TrigPoly() = default;
  TrigPoly(const C& c) {  // NOLINT(implicit): constants embed
    if (!calib::is_zero(c)) m_.emplace(Freq{}, c);
  }
  static TrigPoly mode(const Freq& f, const C& c) {
    TrigPoly p;
    if (!calib::is_zero(c)) p.m_.emplace(f, c);
    return p;
  }

  const Modes& modes() const { return m_; }
  bool is_zero() const { return m_.empty(); }
  std::size_t size() const { return m_.size(); }
  C at(const Freq& f) const {
    auto it = m_.find(f);
    return it == m_.end() ? ScalarTraits<C>::zero() : it->second;
  }
  C constant() const { return at(Freq{}); }

  void add(const Freq& f, const C& c) {
    if (calib::is_zero(c)) return;
    auto [it, inserted] = m_.try_emplace(f, c);
    if (!inserted) {
      it->second += c;
      if (calib::is_zero(it->second)) m_.erase(it);
    }
  }

  TrigPoly& operator+=(const TrigPoly& o) {
    for (const auto& [f, c] : o.m_) add(f, c);
    return *this;
  }
  TrigPoly& operator-=(const TrigPoly& o) {
    for (const auto& [f, c] : o.m_) add(f, -c);
    return *this;
  }
  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
  friend TrigPoly operator-(const TrigPoly& a) {
    TrigPoly r;
    for (const auto& [f, c] : a.m_) r.m_.emplace(f, -c);
    return r;
  }
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly r;
    if (a.m_.size() == 1 && a.m_.begin()->first.is_zero()) return b.scaled(a.m_.begin()->second);
    if (b.m_.size() == 1 && b.m_.begin()->first.is_zero()) return a.scaled(b.m_.begin()->second);
    for (const auto& [fa, ca] : a.m_)
      for (const auto& [fb, cb] : b.m_) {
        r.add(fa + fb, ca * cb);
        if (r.m_.size() > trig_support_cap()) throw std::length_error("trigonometric support cap exceeded");
      }
    return r;
  }
  TrigPoly& operator*=(const TrigPoly& o) { return *this = *this * o; }
  friend bool operator==(const TrigPoly& a, const TrigPoly& b) { return a.m_ == b.m_; }

  TrigPoly scaled(const C& s) const {
    TrigPoly r;
    for (const auto& [f, c] : m_) r.add(f, s * c);
    return r;
  }

  /// d/dx_j: multiplies mode k by i k_j
  TrigPoly partial(int j) const {
    TrigPoly r;
    const C iu = ScalarTraits<C>::imag_unit();
    for (const auto& [f, c] : m_)
      if (f[j] != 0) r.add(f, ScalarTraits<C>::from_int(f[j]) * iu * c);
    return r;
  }

  /// pointwise complex conjugate of the function
  TrigPoly conj_fn() const {
    TrigPoly r;
    for (const auto& [f, c] : m_) r.add(-f, ScalarTraits<C>::conj(c));
    return r;
  }

  /// Parseval: (2pi)^{-n} integral of |p|^2
  double l2_norm2() const {
    double s = 0;
    for (const auto& [f, c] : m_) s += ScalarTraits<C>::abs2(c);
    return s;
  }

  /// max over modes of |c(-k) - conj c(k)|
  double reality_defect() const {
    double d = 0;
    for (const auto& [f, c] : m_) d = std::max(d, ScalarTraits<C>::abs2(at(-f) - ScalarTraits<C>::conj(c)));
    return std::sqrt(d);
  }

  int max_freq() const {
    int m = 0;
    for (const auto& [f, c] : m_) m = std::max(m, f.max_abs());
    return m;
  }

  /// drop modes with |c| <= tol (floating round-off cleanup)
  TrigPoly pruned(double tol) const {
    TrigPoly r;
    for (const auto& [f, c] : m_)
      if (ScalarTraits<C>::abs2(c) > tol * tol) r.m_.emplace(f, c);
    return r;
  }

  /// Value at a point x in [0, 2pi)^n (floating coefficients only).
  Complexd value(const std::vector<double>& x) const {
    Complexd s = 0;
    for (const auto& [f, c] : m_) {
      double ph = 0;
      for (std::size_t i = 0; i < x.size(); ++i) ph += f[static_cast<int>(i)] * x[i];
      s += to_complexd(c) * Complexd(std::cos(ph), std::sin(ph));
    }
    return s;
  }

 private:
  Modes m_;
};

template <class C>
struct ScalarTraits<TrigPoly<C>> {
  static TrigPoly<C> zero() { return {}; }
  static TrigPoly<C> from_int(long v) { return TrigPoly<C>(ScalarTraits<C>::from_int(v)); }
  static TrigPoly<C> imag_unit() { return TrigPoly<C>(ScalarTraits<C>::imag_unit()); }
  static bool is_zero(const TrigPoly<C>& v) { return v.is_zero(); }
  static double abs2(const TrigPoly<C>& v) { return v.l2_norm2(); }
  static TrigPoly<C> conj(const TrigPoly<C>& v) { return v.conj_fn(); }
  static TrigPoly<C> inv_int(long k) { return TrigPoly<C>(ScalarTraits<C>::inv_int(k)); }
  static constexpr bool is_complex = true;
  static constexpr bool is_exact = ScalarTraits<C>::is_exact;
};

using TPd = TrigPoly<Complexd>;
using TPq = TrigPoly<ComplexQ>;

}  // namespace calib
