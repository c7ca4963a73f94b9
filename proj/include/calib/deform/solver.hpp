#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "calib/hodge/system.hpp"

namespace calib::deform {

using TMf = TrigMulti<Complexd>;
using EFd = EndoField<Complexd>;
/// Truncated power series in t; entry m is the t^m coefficient.
using FormSeries = std::vector<TMf>;
using EndoSeries = std::vector<EFd>;

inline constexpr double kDeformTol = 1e-9;
inline constexpr double kPrune = 1e-15;
inline constexpr int kMaxOrder = 12;

inline double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
inline double binomial(int m, int j) { return factorial(m) / (factorial(j) * factorial(m - j)); }

inline TMf zero_like(const TMf& f, int shift = 0) {
  std::vector<int> deg = f.degrees();
  for (int& p : deg) p += shift;
  return TMf(f.dim(), deg);
}
inline TMf scaled(double s, const TMf& f) { return scale(Complexd(s), f); }
inline EFd scaled(double s, const EFd& a) { return scale(Complexd(s), a); }

/// a(t) as a series: entry k holds a_k / k!  (a(t) = sum a_k t^k / k!)
inline EndoSeries endo_series(const std::vector<EFd>& coeffs, int n) {
  EndoSeries A(coeffs.size() + 1, EFd(n));
  for (std::size_t k = 0; k < coeffs.size(); ++k) A[k + 1] = scaled(1.0 / factorial(static_cast<int>(k) + 1), coeffs[k]);
  return A;
}

inline FormSeries constant_series(const TMf& phi, int K) {
  FormSeries S(K + 1, zero_like(phi));
  S[0] = phi;
  return S;
}

/// rho_hat_a phi for trig fields, computed mode by mode: for every pair of
/// frequencies (f in supp a, g in supp phi) one dense product lands at f + g.
/// Same result as the generic rho_hat, far fewer map operations.
inline TMf rho_hat_modes(const EFd& a, const TMf& phi) {
  const int n = phi.dim();
  if (a.dim() != n) throw std::invalid_argument("rho_hat: dimension mismatch");
  if (a.is_zero() || phi.is_zero()) return zero_like(phi);
  Layout L(n, phi.degrees());
  // columns R_ij on the ambient coordinates: (row, col, sign) triples
  struct Entry {
    int row, col;
    double sign;
  };
  std::vector<std::vector<Entry>> R(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < L.size(); ++r) {
    auto [p, m] = L.locate(r);
    Form<double> e(n, phi[p].degree());
    e.add(m, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Form<double> img = rho_hat(Endo<double>::unit(n, i, j), e);
        const MaskIndex& idx = L.index(p);
        for (const auto& [mm, c] : img.terms()) R[i * n + j].push_back({L.offset(p) + idx.position(mm), r, c});
      }
  }
  std::map<Freq, Eigen::VectorXcd> pm;
  for (std::size_t p = 0; p < phi.size(); ++p) {
    const MaskIndex& idx = L.index(p);
    for (const auto& [m, c] : phi[p].terms())
      for (const auto& [f, v] : c.modes()) {
        auto it = pm.find(f);
        if (it == pm.end()) it = pm.emplace(f, Eigen::VectorXcd::Zero(L.size())).first;
        it->second[L.offset(p) + idx.position(m)] += v;
      }
  }
  std::map<Freq, Eigen::VectorXcd> am;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (const auto& [f, v] : a(i, j).modes()) {
        auto it = am.find(f);
        if (it == am.end()) it = am.emplace(f, Eigen::VectorXcd::Zero(n * n)).first;
        it->second[i * n + j] += v;
      }
  std::vector<int> used;
  for (int c = 0; c < n * n; ++c) {
    bool any = false;
    for (const auto& [f, v] : am) any = any || v[c] != Complexd(0);
    if (any && !R[c].empty()) used.push_back(c);
  }
  Eigen::MatrixXcd A(static_cast<int>(used.size()), static_cast<int>(am.size()));
  std::vector<Freq> af;
  for (const auto& [f, v] : am) {
    for (std::size_t u = 0; u < used.size(); ++u) A(static_cast<int>(u), static_cast<int>(af.size())) = v[used[u]];
    af.push_back(f);
  }
  std::map<Freq, Eigen::VectorXcd> out;
  Eigen::MatrixXcd W(L.size(), static_cast<int>(used.size()));
  for (const auto& [g, v] : pm) {
    W.setZero();
    for (std::size_t u = 0; u < used.size(); ++u)
      for (const Entry& e : R[used[u]]) W(e.row, static_cast<int>(u)) += e.sign * v[e.col];
    Eigen::MatrixXcd prod = W * A;
    for (std::size_t c = 0; c < af.size(); ++c) {
      Freq h = af[c] + g;
      auto it = out.find(h);
      if (it == out.end()) it = out.emplace(h, Eigen::VectorXcd::Zero(L.size())).first;
      it->second += prod.col(static_cast<int>(c));
    }
  }
  TMf res = zero_like(phi);
  for (const auto& [f, v] : out)
    for (int r = 0; r < L.size(); ++r)
      if (v[r] != Complexd(0)) {
        auto [p, m] = L.locate(r);
        res[p].add(m, TrigPoly<Complexd>::mode(f, v[r]));
      }
  return res;
}

/// (rho_hat_A S)_m = sum_{i>=1} rho_hat_{A_i} S_{m-i}, truncated at degree K.
inline FormSeries rho_series(const EndoSeries& A, const FormSeries& S, int K) {
  FormSeries out(K + 1, zero_like(S[0]));
  for (int m = 1; m <= K; ++m)
    for (int i = 1; i <= m && i < static_cast<int>(A.size()); ++i) {
      if (A[i].is_zero() || S[m - i].is_zero()) continue;
      out[m] += rho_hat_modes(A[i], S[m - i]);
    }
  for (auto& f : out) f = pruned(f, kPrune);
  return out;
}

/// Polarized pieces G(A_i, A_j) = i_{N(A_i,A_j)} - L_{A_i A_j}, cached.
class GSeries {
 public:
  GSeries(const EndoSeries& A, int K) {
    for (int i = 1; i < static_cast<int>(A.size()); ++i)
      for (int j = 1; j < static_cast<int>(A.size()); ++j) {
        if (i + j > K || A[i].is_zero() || A[j].is_zero()) continue;
        pairs_.push_back({i, j, nijenhuis(A[i], A[j]), A[i] * A[j]});
      }
  }
  /// (G X)_m = sum_{i+j+l=m} G(A_i,A_j) X_l
  FormSeries apply(const FormSeries& X, int K) const {
    FormSeries out(K + 1, zero_like(X[0], 1));
    for (const auto& p : pairs_)
      for (int l = 0; l + p.i + p.j <= K; ++l) {
        if (X[l].is_zero()) continue;
        out[l + p.i + p.j] += X[l].apply([&](const TrigForm<Complexd>& f) {
          return interior_tensor(p.N, f) - lie_operator_L(p.ab, f);
        });
      }
    for (auto& f : out) f = pruned(f, kPrune);
    return out;
  }

 private:
  struct Pair {
    int i, j;
    std::vector<TrigForm<Complexd>> N;
    EFd ab;
  };
  std::vector<Pair> pairs_;
};

/// Both evaluations of Ob_k plus the primitive certifying exactness.
struct Obstruction {
  int k = 0;
  TMf direct;     // d(primitive)
  TMf commutator; // sum_{l=2}^k (-1)^{l-1}/l! (Ad^{l-2} G)_k Phi0
  TMf primitive;  // sum_{l=2}^k (1/l!) (rho_hat_a^l Phi0)_k
  double two_path = 0;
};

/// Ob_k from a_1..a_{k-1}. The commutator form agrees with the direct one only
/// when the lower orders are already closed.
inline Obstruction expand_deformation(const TMf& phi0, const std::vector<EFd>& lower, int k) {
  if (k < 2) throw std::invalid_argument("expand_deformation: order must be >= 2");
  if (static_cast<int>(lower.size()) < k - 1) throw std::invalid_argument("expand_deformation: need a_1..a_{k-1}");
  const int n = phi0.dim();
  std::vector<EFd> a(lower.begin(), lower.begin() + (k - 1));
  EndoSeries A = endo_series(a, n);

  // powers P_l = rho_hat_A^l Phi0
  std::vector<FormSeries> P{constant_series(phi0, k)};
  for (int l = 1; l <= k; ++l) P.push_back(rho_series(A, P.back(), k));

  Obstruction ob;
  ob.k = k;
  ob.primitive = zero_like(phi0);
  for (int l = 2; l <= k; ++l) ob.primitive += scaled(1.0 / factorial(l), P[l][k]);
  ob.direct = d(ob.primitive);

  GSeries G(A, k);
  ob.commutator = zero_like(phi0, 1);
  for (int l = 2; l <= k; ++l) {
    const int m = l - 2;
    const double w = ((l - 1) % 2 ? -1.0 : 1.0) / factorial(l);
    // Ad^m G = sum_j C(m,j) (-1)^{m-j} R^j G R^{m-j}
    for (int j = 0; j <= m; ++j) {
      FormSeries X = G.apply(P[m - j], k);
      for (int r = 0; r < j; ++r) X = rho_series(A, X, k);
      const double c = w * binomial(m, j) * ((m - j) % 2 ? -1.0 : 1.0);
      ob.commutator += scaled(c, X[k]);
    }
  }
  ob.two_path = l2_norm(ob.direct - ob.commutator);
  return ob;
}

struct OrderRecord {
  int k = 0;
  double ob_norm = 0;
  double ob_exactness_residual = 0;  // |Ob_comm - d(primitive)|
  double two_path_residual = 0;
  double membership_residual = 0;    // relative fit of Ob_k into E^2
  double harmonic_norm = 0;
  double a_norm_over_kfact = 0;
  double recovery_residual = 0;      // |rho_hat_{a_k}Phi0 - target| / |target|
  double closure_residual = 0;       // |t^k coefficient of d rho_{exp a(t)} Phi0|
};

struct ObstructionReport {
  int order = 0;
  Eigen::VectorXd harmonic_class;  // coefficients of [Ob_k] in the E^2 basis (real part)
  double norm = 0;
  std::string reason;
};

struct DeformationResult {
  std::string structure;
  int order = 0;  // requested K
  std::vector<EFd> a;  // a_1..a_K (fewer when obstructed)
  std::vector<OrderRecord> records;
  std::vector<double> residual_series;  // |d S_k| for k = 1..K, recomputed from a_1..a_K
  std::vector<Eigen::VectorXd> periods;  // class of the t^k coefficient, k = 1..K
  std::optional<ObstructionReport> obstruction;
  TMf phi0;
  double seed_closure = 0;

  bool ok(double tol = kDeformTol) const {
    if (obstruction) return false;
    for (const auto& r : records)
      if (r.closure_residual > tol || r.two_path_residual > tol || r.membership_residual > tol) return false;
    for (double v : residual_series)
      if (v > tol) return false;
    return true;
  }
};

/// Fiberwise recovery of a_k: minimal-norm preimage under xi -> rho_hat_xi Phi0,
/// which is the g_V-orthogonal complement of the isotropy algebra.
class Recovery {
 public:
  explicit Recovery(const CalibrationSpec& s) : n_(s.dim), M_(rho_matrix(s.phi0)) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M_);
    cod.setThreshold(1e-10);
    pinv_ = cod.pseudoInverse();
  }
  const Eigen::MatrixXd& matrix() const { return M_; }
  const Eigen::MatrixXd& pinv() const { return pinv_; }

  EFd recover(const HodgeSystem& sys, const FiberField& x, double factor, double* rel_residual) const {
    const EkSpace& e = sys.E(1);
    EFd a(n_);
    double res2 = 0, tot2 = 0;
    for (const auto& [f, v] : x.modes) {
      Eigen::VectorXcd c = e.basis * v;
      Eigen::VectorXcd xi = pinv_.cast<Complexd>() * c;
      res2 += (M_.cast<Complexd>() * xi - c).squaredNorm();
      tot2 += c.squaredNorm();
      xi *= factor;
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          Complexd z = xi[i * n_ + j];
          if (std::abs(z) > 0) a(i, j).add(f, z);
        }
    }
    if (rel_residual) *rel_residual = tot2 > 0 ? std::sqrt(res2 / tot2) : 0.0;
    return pruned(a, kPrune * std::sqrt(std::max(tot2, 1e-300)) * factor);
  }

 private:
  int n_;
  Eigen::MatrixXd M_, pinv_;
};

/// Solves (1/k!) rho_hat_{a_k} Phi0 = -d* G(Ob_k). Returns nullopt plus the
/// report if Ob_k has a harmonic part.
inline std::optional<EFd> solve_order(const HodgeSystem& sys, const Recovery& rec, const TMf& ob, int k,
                                      OrderRecord& record, std::optional<ObstructionReport>& report) {
  double member = 0;
  FiberField x = sys.to_fiber(2, ob, &member);
  record.membership_residual = member;
  FiberField h = sys.harmonic_part(x);
  double hn = 0;
  for (const auto& [f, v] : h.modes) hn = std::max(hn, v.norm());
  record.harmonic_norm = hn;
  if (hn > kDeformTol) {
    ObstructionReport r;
    r.order = k;
    r.harmonic_class = h.modes.begin()->second.real();
    r.norm = hn;
    r.reason = "nonzero harmonic part of the obstruction";
    report = r;
    return std::nullopt;
  }
  FiberField y = sys.apply_dstar(sys.apply_green(x));
  for (auto& [f, v] : y.modes) v = -v;
  double rres = 0;
  EFd a = rec.recover(sys, y, factorial(k), &rres);
  record.recovery_residual = rres;
  return a;
}

inline double field_norm(const EFd& a) { return std::sqrt(a.norm2()); }

/// Degree-k parts of sum_{l=1}^K (1/l!) rho_hat_a^l Phi0 for the full a(t).
inline FormSeries deformation_series(const TMf& phi0, const std::vector<EFd>& a, int K) {
  EndoSeries A = endo_series(a, phi0.dim());
  FormSeries S(K + 1, zero_like(phi0));
  FormSeries P = constant_series(phi0, K);
  for (int l = 1; l <= K; ++l) {
    P = rho_series(A, P, K);
    for (int m = 0; m <= K; ++m)
      if (!P[m].is_zero()) S[m] += scaled(1.0 / factorial(l), P[m]);
  }
  return S;
}

/// Frequency-zero mode as a real ambient vector.
inline Eigen::VectorXd zero_mode(const TMf& f) {
  Layout L(f.dim(), f.degrees());
  return L.to_eigen(mode_of(f, Freq{})).real();
}

inline double seed_closure_residual(const TMf& phi0, const EFd& a1) { return l2_norm(d(rho_hat(a1, phi0))); }

/// Runs the order-by-order solve up to K.
inline DeformationResult run(const HodgeSystem& sys, const EFd& a1, int K, bool normalized = false,
                             double tol = kDeformTol) {
  const CalibrationSpec& s = sys.spec();
  if (K < 1 || K > kMaxOrder) throw std::invalid_argument("deform: order must be 1.." + std::to_string(kMaxOrder));
  if (a1.dim() != s.dim) throw std::invalid_argument("deform: seed dimension does not match the structure");
  DeformationResult res;
  res.structure = s.name();
  res.order = K;
  res.phi0 = lift(s.phi0);
  if (reality_defect(a1) > 1e-12) throw std::invalid_argument("deform: seed is not a real field");
  res.seed_closure = seed_closure_residual(res.phi0, a1);
  if (res.seed_closure > 1e-10) throw std::invalid_argument("deform: seed does not satisfy d rho_hat_{a1} Phi0 = 0");
  if (normalized) {
    FiberField x = sys.to_fiber(1, rho_hat(a1, res.phi0));
    FiberField y = sys.apply_dstar(x);
    double c = 0;
    for (const auto& [f, v] : y.modes) c = std::max(c, v.norm());
    if (c > 1e-10) throw std::invalid_argument("deform: seed is not coclosed");
  }
  Recovery rec(s);
  res.a.push_back(a1);
  {
    OrderRecord r1;
    r1.k = 1;
    r1.a_norm_over_kfact = field_norm(a1);
    res.records.push_back(r1);
  }
  for (int k = 2; k <= K; ++k) {
    OrderRecord r;
    r.k = k;
    try {
      Obstruction ob = expand_deformation(res.phi0, res.a, k);
      r.ob_norm = l2_norm(ob.direct);
      r.ob_exactness_residual = l2_norm(ob.commutator - d(ob.primitive));
      r.two_path_residual = ob.two_path;
      if (ob.two_path > tol * std::max(1.0, r.ob_norm))
        throw std::runtime_error("deform: obstruction paths disagree at order " + std::to_string(k) + " (" +
                                 std::to_string(ob.two_path) + ")");
      auto ak = solve_order(sys, rec, ob.direct, k, r, res.obstruction);
      if (!ak) {
        res.records.push_back(r);
        break;
      }
      r.a_norm_over_kfact = field_norm(*ak) / factorial(k);
      res.a.push_back(std::move(*ak));
    } catch (const std::length_error& e) {
      throw std::length_error("deform: support cap exceeded at order " + std::to_string(k) + ": " + e.what());
    }
    res.records.push_back(r);
  }
  const int Kdone = static_cast<int>(res.a.size());
  FormSeries S = deformation_series(res.phi0, res.a, Kdone);
  for (int k = 1; k <= Kdone; ++k) {
    double c = l2_norm(d(S[k]));
    res.residual_series.push_back(c);
    res.records[k - 1].closure_residual = c;
    res.periods.push_back(zero_mode(S[k]));
  }
  return res;
}

/// a(t) = sum a_k t^k / k!
inline EFd a_of_t(const DeformationResult& r, double t) {
  EFd a(r.phi0.dim());
  double tk = 1;
  for (std::size_t k = 0; k < r.a.size(); ++k) {
    tk *= t;
    a += scaled(tk / factorial(static_cast<int>(k) + 1), r.a[k]);
  }
  return a;
}

/// rho_{exp a(t)} Phi0 via the operator series, summed until terms are negligible.
/// Coefficients below floor * |Phi0| are dropped; supports otherwise grow with every term.
inline TMf evaluate(const DeformationResult& r, double t, double floor = 1e-17, int max_terms = 80) {
  TMf out = r.phi0;
  if (t == 0) return out;
  EFd a = a_of_t(r, t);
  const double tol = floor * std::sqrt(r.phi0.norm2());
  TMf term = r.phi0;
  for (int l = 1; l <= max_terms; ++l) {
    term = pruned(scaled(1.0 / l, rho_hat_modes(a, term)), tol);
    out += term;
    if (std::sqrt(term.norm2()) < tol) return out;
  }
  throw std::runtime_error("deform: operator series did not converge; t too large");
}

inline double closure_residual(const DeformationResult& r, double t) { return l2_norm(d(evaluate(r, t))); }

struct SlopeFit {
  std::vector<double> t, residual;
  double slope = 0;
  double reference = 0;  // K + 1
};

/// Least-squares slope of log residual against log t.
inline SlopeFit residual_slope(const DeformationResult& r, const std::vector<double>& ts) {
  SlopeFit f;
  f.reference = static_cast<double>(r.a.size()) + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double t : ts) {
    double c = closure_residual(r, t);
    f.t.push_back(t);
    f.residual.push_back(c);
    double x = std::log(t), y = std::log(std::max(c, 1e-300));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = static_cast<double>(ts.size());
  f.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return f;
}

/// Central difference of evaluate at 0 compared with rho_hat_{a1} Phi0.
inline double derivative_check(const DeformationResult& r, double h) {
  TMf fd = scaled(1.0 / (2 * h), evaluate(r, h) - evaluate(r, -h));
  return l2_norm(fd - rho_hat(r.a.front(), r.phi0));
}

// ---------------------------------------------------------------- seeds

/// cos(<k,x>) or sin(<k,x>) as a real trig polynomial
inline TrigPoly<Complexd> wave(const Freq& k, bool sine, double amp = 1.0) {
  TrigPoly<Complexd> p;
  if (sine) {
    p.add(k, Complexd(0, -0.5 * amp));
    p.add(-k, Complexd(0, 0.5 * amp));
  } else {
    p.add(k, Complexd(0.5 * amp, 0));
    p.add(-k, Complexd(0.5 * amp, 0));
  }
  return p;
}

/// Deterministic seed scale * (constant_weight * xi + Dv) with
/// v = cos(x_2) e_1 + sin(x_1) e_3 + cos(x_3 + x_4) e_2 / 2. The modes are
/// coupled on purpose: when each component of v depends on its own variable,
/// exp(t Dv) stays a Jacobian and nothing ever obstructs.
inline EFd standard_seed(int n, double scale = 0.2, double constant_weight = 0.0, std::uint64_t rng_seed = 0) {
  if (n < 4) throw std::invalid_argument("standard_seed: dimension must be >= 4");
  VectorField<Complexd> v(n);
  v[0] = wave(Freq::unit(1), false);
  v[2] = wave(Freq::unit(0), true);
  v[1] = wave(Freq::unit(2) + Freq::unit(3), false, 0.5);
  EFd a = jacobian(v);
  if (constant_weight != 0) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Endo<double> xi(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) xi(i, j) = constant_weight * U(rng);
    a += lift(xi);
  }
  return scaled(scale, a);
}

// ---------------------------------------------------------------- majorant

struct MajorantReport {
  double b = 0, c = 0;
  bool bounded = true;   // false when every a_k, k >= 2, vanishes (any c works)
  bool holds = false;
  std::vector<double> ratios;  // |a_k|/k! divided by (b/16c) c^k / k^2
};

/// b is pinned by k = 1; c is the least value with |a_k|/k! <= (b/16c) c^k/k^2 for all k.
inline MajorantReport majorant_report(const DeformationResult& r) {
  MajorantReport m;
  std::vector<double> mk;
  for (const auto& rec : r.records) mk.push_back(rec.a_norm_over_kfact);
  if (mk.empty() || mk[0] <= 0) throw std::invalid_argument("majorant: zero seed");
  m.b = 16 * mk[0];
  double c = 0;
  for (std::size_t i = 1; i < mk.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    if (mk[i] > 0) c = std::max(c, std::pow(mk[i] * k * k / mk[0], 1.0 / (k - 1)));
  }
  m.bounded = c > 0;
  m.c = m.bounded ? c : 0.0;
  m.holds = true;
  for (std::size_t i = 0; i < mk.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    double bound = m.bounded ? m.b / (16 * m.c) * std::pow(m.c, k) / (k * k) : (i == 0 ? mk[0] : 0.0);
    double ratio = bound > 0 ? mk[i] / bound : (mk[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    m.ratios.push_back(ratio);
    if (ratio > 1 + 1e-9) m.holds = false;
  }
  return m;
}

// ---------------------------------------------------------------- period map

/// Constant seeds xi_c with rho_hat_{xi_c} Phi0 = c-th harmonic basis form.
inline std::vector<EFd> harmonic_seeds(const HodgeSystem& sys) {
  Recovery rec(sys.spec());
  std::vector<EFd> out;
  const EkSpace& e = sys.E(1);
  const int n = sys.spec().dim;
  for (int c = 0; c < e.dim(); ++c) {
    Eigen::VectorXd xi = rec.pinv() * e.basis.col(c);
    out.push_back(lift(endo_from_column<double>(n, xi)));
  }
  return out;
}

struct PeriodMap {
  Eigen::MatrixXd matrix;  // columns: first-order period classes
  int rank = 0;
  int h1 = 0;
  bool injective = false;
};

inline PeriodMap period_map(const HodgeSystem& sys, const std::vector<DeformationResult>& results) {
  PeriodMap p;
  p.h1 = static_cast<int>(harmonics(sys, 1).size());
  if (static_cast<int>(results.size()) != p.h1)
    throw std::invalid_argument("period_map: need one result per harmonic basis direction");
  Layout L(sys.spec().dim, sys.spec().degrees);
  p.matrix = Eigen::MatrixXd::Zero(L.size(), p.h1);
  for (int c = 0; c < p.h1; ++c) {
    if (results[c].periods.empty()) throw std::invalid_argument("period_map: result without periods");
    p.matrix.col(c) = results[c].periods.front();
  }
  p.rank = numeric_rank(p.matrix);
  p.injective = p.rank == p.h1;
  return p;
}

// ---------------------------------------------------------------- JSON

inline json to_json(const MajorantReport& m) {
  json j{{"b", m.b}, {"holds", m.holds}, {"bounded", m.bounded}, {"ratios", m.ratios}};
  if (m.bounded) {
    j["c"] = m.c;
    j["radius"] = 1.0 / m.c;
  } else {
    j["c"] = nullptr;
    j["radius"] = "unbounded";
  }
  return j;
}

inline json to_json(const DeformationResult& r) {
  json j;
  j["structure"] = r.structure;
  j["order"] = r.order;
  j["seed_closure_residual"] = r.seed_closure;
  json per = json::array();
  for (const auto& rec : r.records)
    per.push_back({{"k", rec.k},
                   {"ob_norm", rec.ob_norm},
                   {"ob_exactness_residual", rec.ob_exactness_residual},
                   {"two_path_residual", rec.two_path_residual},
                   {"membership_residual", rec.membership_residual},
                   {"harmonic_norm", rec.harmonic_norm},
                   {"a_norm_over_kfact", rec.a_norm_over_kfact},
                   {"recovery_residual", rec.recovery_residual},
                   {"closure_residual", rec.closure_residual}});
  j["per_order"] = per;
  if (r.records.size() >= 3 && r.records.front().a_norm_over_kfact > 0) j["majorant"] = to_json(majorant_report(r));
  else j["majorant"] = nullptr;
  json periods = json::array();
  for (const auto& p : r.periods) periods.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["period_first_order"] = periods.empty() ? json::array() : periods.front();
  j["periods"] = periods;
  if (r.obstruction) {
    const auto& o = *r.obstruction;
    j["obstruction"] = {{"order", o.order},
                        {"norm", o.norm},
                        {"reason", o.reason},
                        {"class", std::vector<double>(o.harmonic_class.data(), o.harmonic_class.data() + o.harmonic_class.size())}};
  } else {
    j["obstruction"] = nullptr;
  }
  j["pass"] = r.ok();
  return j;
}

}  // namespace calib::deform
