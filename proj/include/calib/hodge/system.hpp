#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "calib/orbits/irreps.hpp"
#include "calib/torus/operators.hpp"

namespace calib {

/// Coefficients of a section of E^k in the orthonormal E^k basis, per frequency.
struct FiberField {
  int k = 0;
  std::map<Freq, Eigen::VectorXcd> modes;
};

/// Raised when a Green solve meets a singular block at a nonzero frequency.
class SingularBlock : public std::runtime_error {
 public:
  SingularBlock(const Freq& f, int k, int n)
      : std::runtime_error("singular Laplacian block at E^" + std::to_string(k) + ", frequency " + describe(f, n)), freq(f), position(k) {}
  Freq freq;
  int position;

 private:
  static std::string describe(const Freq& f, int n) {
    std::string s = "(";
    for (int i = 0; i < n; ++i) s += (i ? "," : "") + std::to_string(f[i]);
    return s + ")";
  }
};

inline constexpr double kPinvRel = 1e-10;
inline constexpr double kMembershipTol = 1e-9;

struct DirectionStats {
  int scanned = 0;             // primitive directions, up to sign
  int eig_scanned = 0;         // directions whose spectra were computed (max|k_i| <= 1)
  std::vector<double> min_eig; // per position k = 0, 1, 2 over eig_scanned directions
  std::vector<long> kernel;    // sum over nonzero frequencies of dim ker Laplacian, per position
  std::optional<Freq> singular_witness;
  int singular_position = -1;
  double d2_residual = 0;      // max |W_{k+1} W_k| over eig_scanned directions
};

class HodgeSystem {
 public:
  HodgeSystem() = default;

  /// Per-frequency realization of the complex on T^n with constant Phi0.
  static HodgeSystem build(const CalibrationSpec& spec, int n_torus, int F, int max_k = 3) {
    if (spec.dim != n_torus) throw std::invalid_argument("hodge: torus dimension must equal the spec dimension");
    if (n_torus > kMaxTorusDim) throw std::invalid_argument("hodge: torus dimension too large");
    if (F < 0 || F > 20) throw std::invalid_argument("hodge: frequency bound must be 0..20");
    HodgeSystem h;
    h.spec_ = spec;
    h.n_ = n_torus;
    h.F_ = F;
    for (int k = 0; k <= max_k; ++k) h.E_.push_back(ek_space(spec, k));
    // S_k^(j) = B_{k+1}^T (dx^j ^ .) B_k
    for (int k = 0; k + 1 <= max_k; ++k) {
      std::vector<Eigen::MatrixXd> per_j;
      for (int j = 0; j < h.n_; ++j) {
        std::vector<double> u(h.n_, 0.0);
        u[j] = 1.0;
        Eigen::MatrixXd amb = detail::wedge_columns(h.E_[k].layout, h.E_[k + 1].layout, h.E_[k].basis, u);
        Eigen::MatrixXd s = h.E_[k + 1].basis.transpose() * amb;
        double leak = (amb - h.E_[k + 1].basis * s).norm();
        if (leak > 1e-9) throw std::runtime_error("hodge: E^k module closure violated");
        per_j.push_back(s);
      }
      h.S_.push_back(std::move(per_j));
    }
    // quadratic pieces of the Laplacian at positions 0..max_k-1
    for (int k = 0; k < max_k; ++k) {
      std::vector<Eigen::MatrixXd> q;
      const int dk = h.E_[k].dim();
      for (int i = 0; i < h.n_; ++i)
        for (int j = i; j < h.n_; ++j) {
          Eigen::MatrixXd m = h.S_[k][i].transpose() * h.S_[k][j];
          if (k > 0) m += h.S_[k - 1][i] * h.S_[k - 1][j].transpose();
          if (i != j) m = m + m.transpose().eval();
          if (m.rows() != dk) throw std::logic_error("hodge: shape");
          q.push_back(m);
        }
      h.Q_.push_back(std::move(q));
    }
    h.scan();
    return h;
  }

  const CalibrationSpec& spec() const { return spec_; }
  int torus_dim() const { return n_; }
  int freq_bound() const { return F_; }
  int max_position() const { return static_cast<int>(Q_.size()) - 1; }
  const EkSpace& E(int k) const { return E_.at(k); }
  const DirectionStats& stats() const { return stats_; }

  /// Real symbol W_k(kappa): E^k -> E^{k+1}; the block of d_k is i W_k.
  Eigen::MatrixXd symbol(int k, const Freq& f) const {
    check_position(k, static_cast<int>(S_.size()) - 1);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(E_[k + 1].dim(), E_[k].dim());
    for (int j = 0; j < n_; ++j)
      if (f[j] != 0) w += f[j] * S_[k][j];
    return w;
  }

  /// Laplacian block W_k^T W_k + W_{k-1} W_{k-1}^T (real symmetric).
  Eigen::MatrixXd laplacian_block(int k, const Freq& f) const {
    check_position(k, max_position());
    const int dk = E_[k].dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dk, dk);
    int idx = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j, ++idx)
        if (f[i] != 0 && f[j] != 0) m += static_cast<double>(f[i] * f[j]) * Q_[k][idx];
    return m;
  }

  // ---------------------------------------------------------- fields

  FiberField to_fiber(int k, const TrigMulti<Complexd>& a, double* rel_residual = nullptr) const {
    const EkSpace& e = E_.at(k);
    if (a.dim() != n_ || a.degrees() != e.layout.degrees()) throw std::invalid_argument("hodge: form degrees do not match E^k");
    std::map<Freq, Eigen::VectorXcd> amb;
    for (std::size_t p = 0; p < a.size(); ++p) {
      const MaskIndex& idx = e.layout.index(p);
      for (const auto& [m, c] : a[p].terms())
        for (const auto& [f, v] : c.modes()) {
          auto it = amb.find(f);
          if (it == amb.end()) it = amb.emplace(f, Eigen::VectorXcd::Zero(e.layout.size())).first;
          it->second[e.layout.offset(p) + idx.position(m)] += v;
        }
    }
    FiberField out;
    out.k = k;
    double res2 = 0, tot2 = 0;
    for (auto& [f, c] : amb) {
      Eigen::VectorXcd x = e.basis.transpose() * c;
      res2 += (c - e.basis * x).squaredNorm();
      tot2 += c.squaredNorm();
      out.modes.emplace(f, std::move(x));
    }
    if (rel_residual) *rel_residual = tot2 > 0 ? std::sqrt(res2 / tot2) : 0.0;
    return out;
  }

  TrigMulti<Complexd> from_fiber(const FiberField& x, double drop = 0.0) const {
    const EkSpace& e = E_.at(x.k);
    TrigMulti<Complexd> out(n_, e.layout.degrees());
    for (const auto& [f, v] : x.modes) {
      Eigen::VectorXcd c = e.basis * v;
      for (std::size_t p = 0; p < out.size(); ++p) {
        const MaskIndex& idx = e.layout.index(p);
        for (int r = 0; r < idx.size(); ++r) {
          Complexd z = c[e.layout.offset(p) + r];
          if (std::abs(z) > drop) out[p].add(idx.mask(r), TrigPoly<Complexd>::mode(f, z));
        }
      }
    }
    return out;
  }

  FiberField apply_d(const FiberField& x) const {
    FiberField out{x.k + 1, {}};
    for (const auto& [f, v] : x.modes)
      if (!f.is_zero()) out.modes.emplace(f, Complexd(0, 1) * (symbol(x.k, f).cast<Complexd>() * v));
    return out;
  }

  /// adjoint of d_{k-1}: E^k -> E^{k-1}, block -i W_{k-1}^T
  FiberField apply_dstar(const FiberField& x) const {
    if (x.k == 0) throw std::invalid_argument("hodge: d* on E^0");
    FiberField out{x.k - 1, {}};
    for (const auto& [f, v] : x.modes)
      if (!f.is_zero()) out.modes.emplace(f, Complexd(0, -1) * (symbol(x.k - 1, f).transpose().cast<Complexd>() * v));
    return out;
  }

  FiberField apply_laplacian(const FiberField& x) const {
    FiberField out{x.k, {}};
    for (const auto& [f, v] : x.modes)
      if (!f.is_zero()) out.modes.emplace(f, laplacian_block(x.k, f).cast<Complexd>() * v);
    return out;
  }

  /// Harmonic part: the frequency-0 mode (exact for elliptic specs).
  FiberField harmonic_part(const FiberField& x) const {
    FiberField out{x.k, {}};
    auto it = x.modes.find(Freq{});
    if (it != x.modes.end()) out.modes.emplace(Freq{}, it->second);
    return out;
  }

  /// Green operator: Delta G x = x - harm(x), harm(G x) = 0.
  FiberField apply_green(const FiberField& x) const {
    FiberField out{x.k, {}};
    for (const auto& [f, v] : x.modes) {
      if (f.is_zero() || v.size() == 0) continue;
      Eigen::MatrixXd L = laplacian_block(x.k, f);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
      const auto& ev = es.eigenvalues();
      const double top = ev.cwiseAbs().maxCoeff();
      Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
      for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= kPinvRel * top) throw SingularBlock(f, x.k, n_);
        inv[i] = 1.0 / ev[i];
      }
      const Eigen::MatrixXd& V = es.eigenvectors();
      out.modes.emplace(f, V.cast<Complexd>() * (inv.cast<Complexd>().asDiagonal() * (V.transpose().cast<Complexd>() * v)));
    }
    return out;
  }

 private:
  static void check_position(int k, int top) {
    if (k < 0 || k > top) throw std::out_of_range("hodge: position out of range");
  }

  static int gcd_all(const std::vector<int>& v) {
    int g = 0;
    for (int x : v) g = std::gcd(g, std::abs(x));
    return g;
  }

  void scan() {
    const int P = max_position();
    const int top_k = std::min(P, 2);
    stats_.min_eig.assign(top_k + 1, std::numeric_limits<double>::infinity());
    stats_.kernel.assign(top_k + 1, 0);
    if (F_ == 0) {
      for (auto& m : stats_.min_eig) m = 0;
      return;
    }
    std::vector<int> k(n_, -F_);
    while (true) {
      // canonical representative: primitive, first nonzero entry positive
      int first = 0;
      while (first < n_ && k[first] == 0) ++first;
      if (first < n_ && k[first] > 0 && gcd_all(k) == 1) visit(k, top_k);
      int pos = n_ - 1;
      while (pos >= 0 && k[pos] == F_) k[pos--] = -F_;
      if (pos < 0) break;
      ++k[pos];
    }
  }

  void visit(const std::vector<int>& kv, int top_k) {
    Freq f(kv);
    int amax = 0;
    for (int x : kv) amax = std::max(amax, std::abs(x));
    const long mult = 2L * (F_ / amax);  // +-t kappa, t = 1..F/amax
    ++stats_.scanned;
    const bool eig = amax <= 1;
    if (eig) ++stats_.eig_scanned;
    for (int k = 0; k <= top_k; ++k) {
      if (E_[k].dim() == 0) continue;
      Eigen::MatrixXd L = laplacian_block(k, f);
      int ker = 0;
      if (eig) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        const double topv = std::max(1.0, ev.cwiseAbs().maxCoeff());
        for (int i = 0; i < ev.size(); ++i)
          if (std::abs(ev[i]) <= kPinvRel * topv) ++ker;
        if (ev.size() > 0) stats_.min_eig[k] = std::min(stats_.min_eig[k], ev.minCoeff());
      } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
        const auto& D = ldlt.vectorD();
        const double topv = std::max(1.0, D.cwiseAbs().maxCoeff());
        if (D.size() > 0 && D.minCoeff() <= 1e-8 * topv) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
          const double t2 = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
          for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (std::abs(es.eigenvalues()[i]) <= kPinvRel * t2) ++ker;
        }
      }
      if (ker > 0) {
        stats_.kernel[k] += ker * mult;
        if (!stats_.singular_witness && k >= 1) {
          stats_.singular_witness = f;
          stats_.singular_position = k;
        }
      }
      if (eig && k + 1 < static_cast<int>(S_.size()))
        stats_.d2_residual = std::max(stats_.d2_residual, (symbol(k + 1, f) * symbol(k, f)).norm());
    }
  }

  CalibrationSpec spec_;
  int n_ = 0, F_ = 0;
  std::vector<EkSpace> E_;
  std::vector<std::vector<Eigen::MatrixXd>> S_;  // [k][j]
  std::vector<std::vector<Eigen::MatrixXd>> Q_;  // [k][pair]
  DirectionStats stats_;
};

// ------------------------------------------------------------- TrigForm-level API

/// Sections of E^k from constant E^k vectors (frequency 0): the harmonic space.
inline std::vector<TrigMulti<Complexd>> harmonics(const HodgeSystem& sys, int k) {
  std::vector<TrigMulti<Complexd>> out;
  const int d = sys.E(k).dim();
  for (int c = 0; c < d; ++c) {
    FiberField x{k, {}};
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    v[c] = 1.0;
    x.modes.emplace(Freq{}, v);
    out.push_back(sys.from_fiber(x));
  }
  return out;
}

inline TrigMulti<Complexd> green_apply(const HodgeSystem& sys, int k, const TrigMulti<Complexd>& alpha) {
  double res = 0;
  FiberField x = sys.to_fiber(k, alpha, &res);
  if (res > kMembershipTol) throw std::invalid_argument("green_apply: input is not a section of E^k");
  return sys.from_fiber(sys.apply_green(x));
}

struct PMap {
  int k = 0;
  Eigen::MatrixXd matrix;  // columns: de Rham classes of the harmonic basis
  int rank = 0;
  bool injective = false;
};

/// p^k: harmonic representative -> its de Rham class, read off as the frequency-0
/// coefficients of each component.
inline PMap p_map(const HodgeSystem& sys, int k) {
  PMap p;
  p.k = k;
  auto H = harmonics(sys, k);
  const Layout& L = sys.E(k).layout;
  p.matrix = Eigen::MatrixXd::Zero(L.size(), static_cast<int>(H.size()));
  for (std::size_t c = 0; c < H.size(); ++c) {
    MultiForm<Complexd> m0 = mode_of(H[c], Freq{});
    p.matrix.col(static_cast<int>(c)) = L.to_eigen(m0).real();
  }
  p.rank = numeric_rank(p.matrix);
  p.injective = p.rank == static_cast<int>(H.size());
  return p;
}

}  // namespace calib
