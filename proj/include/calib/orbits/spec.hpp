#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "calib/exalg/metric.hpp"

namespace calib {

enum class Kind { symplectic, sl, cy, hk, g2, spin7, degenerate2form };

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::symplectic: return "symplectic";
    case Kind::sl: return "sl";
    case Kind::cy: return "cy";
    case Kind::hk: return "hk";
    case Kind::g2: return "g2";
    case Kind::spin7: return "spin7";
    case Kind::degenerate2form: return "degenerate2form";
  }
  return "?";
}

inline Kind parse_kind(const std::string& s) {
  for (Kind k : {Kind::symplectic, Kind::sl, Kind::cy, Kind::hk, Kind::g2, Kind::spin7, Kind::degenerate2form})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown structure kind: " + s);
}

struct SpecParams {
  int dim = 0;          // real dimension (symplectic, degenerate2form)
  int complex_dim = 0;  // sl, cy
  int m = 0;            // hk quaternionic dimension
};

/// A model calibration: the form tuple Phi0 on R^n, realified so every part is
/// a real form. Complex forms (Omega of sl/cy) are stored as (Re, Im).
struct CalibrationSpec {
  Kind kind = Kind::symplectic;
  int dim = 0;
  SpecParams params;
  std::vector<int> degrees;
  std::optional<MultiForm<Rational>> phi0_exact;  // present for the rational models
  MultiForm<double> phi0;
  Metric gV;

  bool exact() const { return phi0_exact.has_value(); }
  std::string name() const { return to_string(kind); }
};

namespace model {

inline Form<Rational> dxq(int n, std::vector<int> one_based, Rational c = 1) {
  for (auto& i : one_based) --i;
  return Form<Rational>::basis(n, one_based, c);
}

/// sum_i dx^{2i-1} ^ dx^{2i} on R^{2k} (optionally embedded in a larger R^n)
inline Form<Rational> standard_symplectic(int n, int pairs) {
  Form<Rational> w(n, 2);
  for (int i = 0; i < pairs; ++i) w += dxq(n, {2 * i + 1, 2 * i + 2});
  return w;
}

/// Omega0 = dz^1 ^ ... ^ dz^k with dz^j = dx^{2j-1} + i dx^{2j}.
inline Form<ComplexQ> holomorphic_volume(int n, int k) {
  Form<ComplexQ> o = Form<ComplexQ>::scalar(n, ComplexQ(Rational(1)));
  for (int j = 0; j < k; ++j) {
    Form<ComplexQ> dz(n, 1);
    dz.add(bit(2 * j), ComplexQ(Rational(1)));
    dz.add(bit(2 * j + 1), ComplexQ(Rational(0), Rational(1)));
    o = wedge(o, dz);
  }
  return o;
}

inline Form<Rational> re_part(const Form<ComplexQ>& f) {
  return f.map([](const ComplexQ& c) { return c.re; });
}
inline Form<Rational> im_part(const Form<ComplexQ>& f) {
  return f.map([](const ComplexQ& c) { return c.im; });
}
inline Form<ComplexQ> complexify(const Form<Rational>& f) {
  return f.map([](const Rational& c) { return ComplexQ(c); });
}
inline Form<ComplexQ> combine(const Form<Rational>& re, const Form<Rational>& im) {
  return complexify(re) + ComplexQ(Rational(0), Rational(1)) * complexify(im);
}

/// c_n = (-1)^{n(n-1)/2} 2^n / (i^n n!)
inline ComplexQ monge_ampere_constant(int n) {
  Rational mag(1);
  for (int k = 0; k < n; ++k) mag *= 2;
  Rational fact(1);
  for (int k = 2; k <= n; ++k) fact *= k;
  mag /= fact;
  if (((n * (n - 1) / 2) % 2) != 0) mag = -mag;
  // 1 / i^n = (-i)^n
  ComplexQ inv_i_pow(Rational(1));
  for (int k = 0; k < n; ++k) inv_i_pow *= ComplexQ(Rational(0), Rational(-1));
  return ComplexQ(mag) * inv_i_pow;
}

/// Per quaternionic block: omega_I = dx12+dx34, omega_J = dx13-dx24, omega_K = dx14+dx23
inline std::vector<Form<Rational>> hyperkahler_triple(int m) {
  int n = 4 * m;
  Form<Rational> wi(n, 2), wj(n, 2), wk(n, 2);
  for (int b = 0; b < m; ++b) {
    int o = 4 * b;
    wi += dxq(n, {o + 1, o + 2}) + dxq(n, {o + 3, o + 4});
    wj += dxq(n, {o + 1, o + 3}) - dxq(n, {o + 2, o + 4});
    wk += dxq(n, {o + 1, o + 4}) + dxq(n, {o + 2, o + 3});
  }
  return {wi, wj, wk};
}

/// phi0 = omega0 ^ dx7 + Im Omega0 and psi0 = omega0^2/2 - Re Omega0 ^ dx7 from the n=3 model.
inline std::pair<Form<Rational>, Form<Rational>> g2_pair() {
  const int n = 7;
  Form<Rational> w = standard_symplectic(n, 3);
  Form<ComplexQ> om = holomorphic_volume(n, 3);
  Form<Rational> t = dxq(n, {7});
  Form<Rational> phi = wedge(w, t) + im_part(om);
  Form<Rational> psi = Rational(1, 2) * wedge(w, w) - wedge(re_part(om), t);
  return {phi, psi};
}

/// Cayley form phi0 ^ dx8 + psi0 on R^8.
inline Form<Rational> cayley_form() {
  auto [phi, psi] = g2_pair();
  auto embed = [](const Form<Rational>& f) {
    Form<Rational> r(8, f.degree());
    for (const auto& [m, c] : f.terms()) r.add(m, c);
    return r;
  };
  return wedge(embed(phi), dxq(8, {8})) + embed(psi);
}

}  // namespace model

inline MultiForm<double> to_double(const MultiForm<Rational>& a) {
  return a.map([](const Rational& c) { return c.get_d(); });
}
inline Form<double> to_double(const Form<Rational>& a) {
  return a.map([](const Rational& c) { return c.get_d(); });
}

inline CalibrationSpec model_calibration(Kind kind, SpecParams p = {}) {
  CalibrationSpec s;
  s.kind = kind;
  std::vector<Form<Rational>> parts;
  switch (kind) {
    case Kind::symplectic: {
      if (p.dim == 0) p.dim = 4;
      if (p.dim < 2 || p.dim % 2 != 0 || p.dim > kMaxDim) throw std::invalid_argument("symplectic: dim must be even, 2..16");
      parts.push_back(model::standard_symplectic(p.dim, p.dim / 2));
      break;
    }
    case Kind::degenerate2form: {
      if (p.dim == 0) p.dim = 4;
      if (p.dim < 3 || p.dim > kMaxDim) throw std::invalid_argument("degenerate2form: dim must be 3..16");
      parts.push_back(model::dxq(p.dim, {1, 2}));
      break;
    }
    case Kind::sl:
    case Kind::cy: {
      if (p.complex_dim == 0) p.complex_dim = kind == Kind::sl ? 2 : 3;
      if (p.complex_dim < 1 || 2 * p.complex_dim > kMaxDim) throw std::invalid_argument("sl/cy: complex dim must be 1..8");
      p.dim = 2 * p.complex_dim;
      auto om = model::holomorphic_volume(p.dim, p.complex_dim);
      parts.push_back(model::re_part(om));
      parts.push_back(model::im_part(om));
      if (kind == Kind::cy) parts.push_back(model::standard_symplectic(p.dim, p.complex_dim));
      break;
    }
    case Kind::hk: {
      if (p.m == 0) p.m = 1;
      if (p.m < 1 || 4 * p.m > kMaxDim) throw std::invalid_argument("hk: m must be 1..4");
      p.dim = 4 * p.m;
      parts = model::hyperkahler_triple(p.m);
      break;
    }
    case Kind::g2: {
      if (p.dim != 0 && p.dim != 7) throw std::invalid_argument("g2: dim is 7");
      p.dim = 7;
      auto [phi, psi] = model::g2_pair();
      parts = {phi, psi};
      break;
    }
    case Kind::spin7: {
      if (p.dim != 0 && p.dim != 8) throw std::invalid_argument("spin7: dim is 8");
      p.dim = 8;
      parts = {model::cayley_form()};
      break;
    }
  }
  s.dim = p.dim;
  s.params = p;
  s.phi0_exact = MultiForm<Rational>(parts);
  s.phi0 = to_double(*s.phi0_exact);
  s.degrees = s.phi0.degrees();
  s.gV = Metric::euclidean(s.dim);
  return s;
}

/// Same structure kind, different base point (e.g. a perturbed orbit point).
inline CalibrationSpec respec(const CalibrationSpec& base, const MultiForm<double>& phi) {
  if (phi.dim() != base.dim || phi.degrees() != base.degrees) throw std::invalid_argument("respec: degree mismatch");
  CalibrationSpec s = base;
  s.phi0_exact.reset();
  s.phi0 = phi;
  return s;
}

}  // namespace calib
