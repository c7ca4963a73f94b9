#pragma once

#include <random>

#include "calib/torus/operators.hpp"

// Seeded random trigonometric samples (real-constrained: modes come in +-k pairs).
namespace calib::sampling {

inline Freq random_freq(std::mt19937_64& rng, int n, int F) {
  std::uniform_int_distribution<int> U(-F, F);
  std::vector<int> k(n);
  for (auto& x : k) x = U(rng);
  return Freq(k);
}

/// Real trig polynomial with `modes` random frequency pairs (+-k) and |k_i| <= F.
inline TPd random_tp(std::mt19937_64& rng, int n, int F, int modes, double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  TPd p;
  for (int m = 0; m < modes; ++m) {
    Freq k = random_freq(rng, n, F);
    Complexd c(U(rng), U(rng));
    if (k.is_zero()) {
      p.add(k, Complexd(c.real(), 0.0));
    } else {
      p.add(k, c);
      p.add(-k, std::conj(c));
    }
  }
  return p;
}

inline TPq random_tpq(std::mt19937_64& rng, int n, int F, int modes) {
  std::uniform_int_distribution<int> U(-3, 3);
  TPq p;
  for (int m = 0; m < modes; ++m) {
    Freq k = random_freq(rng, n, F);
    ComplexQ c(Rational(U(rng)), Rational(U(rng)));
    if (k.is_zero()) {
      p.add(k, ComplexQ(c.re));
    } else {
      p.add(k, c);
      p.add(-k, conj(c));
    }
  }
  return p;
}

inline TrigForm<Complexd> random_trigform(std::mt19937_64& rng, int n, int p, int F, int modes, double density = 0.5) {
  std::uniform_real_distribution<double> P(0.0, 1.0);
  TrigForm<Complexd> f(n, p);
  for (Mask m : masks_of_degree(n, p))
    if (P(rng) < density) f.add(m, random_tp(rng, n, F, modes));
  return f;
}

inline TrigForm<ComplexQ> random_trigform_q(std::mt19937_64& rng, int n, int p, int F, int modes, double density = 0.5) {
  std::uniform_real_distribution<double> P(0.0, 1.0);
  TrigForm<ComplexQ> f(n, p);
  for (Mask m : masks_of_degree(n, p))
    if (P(rng) < density) f.add(m, random_tpq(rng, n, F, modes));
  return f;
}

inline EndoField<Complexd> random_field(std::mt19937_64& rng, int n, int F, int modes, double scale = 1.0,
                                        double density = 0.6) {
  std::uniform_real_distribution<double> P(0.0, 1.0);
  EndoField<Complexd> a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(rng) < density) a(i, j) = random_tp(rng, n, F, modes, scale);
  return a;
}

inline EndoField<ComplexQ> random_field_q(std::mt19937_64& rng, int n, int F, int modes, double density = 0.6) {
  std::uniform_real_distribution<double> P(0.0, 1.0);
  EndoField<ComplexQ> a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(rng) < density) a(i, j) = random_tpq(rng, n, F, modes);
  return a;
}

inline VectorField<Complexd> random_vfield(std::mt19937_64& rng, int n, int F, int modes) {
  VectorField<Complexd> v(n);
  for (auto& x : v) x = random_tp(rng, n, F, modes);
  return v;
}

inline VectorField<ComplexQ> random_vfield_q(std::mt19937_64& rng, int n, int F, int modes) {
  VectorField<ComplexQ> v(n);
  for (auto& x : v) x = random_tpq(rng, n, F, modes);
  return v;
}

}  // namespace calib::sampling
