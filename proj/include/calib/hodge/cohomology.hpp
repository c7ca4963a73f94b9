#pragma once

#include <string>
#include <vector>

#include "calib/exalg/json.hpp"
#include "calib/hodge/system.hpp"

namespace calib {

struct CohomologyReport {
  std::string structure;
  int torus_dim = 0;
  int freq_bound = 0;
  std::vector<int> ek_dims;
  std::vector<long> h_sharp;   // dim H^k(#), k = 0, 1, 2
  std::vector<long> betti;     // b_p(T^n)
  std::vector<PMap> p;         // p^1, p^2
  std::vector<double> min_eig; // min eigenvalue of the Laplacian blocks, k = 0, 1, 2
  int directions = 0, eig_directions = 0;
  double d2_residual = 0;
  bool elliptic_on_torus = false;  // no kernel at any nonzero frequency, positions 1 and 2
  std::optional<Freq> singular_witness;
  json decomposition = json::object();

  bool p1_injective() const { return p.size() > 0 && p[0].injective; }
  bool p2_injective() const { return p.size() > 1 && p[1].injective; }
};

namespace detail {

/// rank with an absolute threshold: the inputs have orthonormal columns, so
/// singular values are O(1) or round-off
inline int abs_rank(const Eigen::MatrixXd& m, double tol = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return static_cast<int>((svd.singularValues().array() > tol).count());
}

inline int rank_of_rows(const Eigen::MatrixXd& B, int row0, int rows) { return abs_rank(B.middleRows(row0, rows)); }

/// Split of H^k for the structures whose paper statements name the pieces.
inline json decomposition(const HodgeSystem& sys) {
  const CalibrationSpec& s = sys.spec();
  json d = json::object();
  const EkSpace& E1 = sys.E(1);
  const Eigen::MatrixXd& B1 = E1.basis;
  switch (s.kind) {
    case Kind::g2: {
      const EkSpace& E2 = sys.E(2);
      int n4 = E2.layout.index(0).size();
      int r4 = rank_of_rows(E2.basis, 0, n4);
      d["H0"] = {{"H2_7", sys.E(0).dim()}};
      d["H1"] = {{"H3", E1.dim()}};
      d["H2"] = {{"H4", r4}, {"H5_14", E2.dim() - r4}};
      break;
    }
    case Kind::spin7: {
      auto h = isotropy_algebra(s);
      auto l4 = irrep_projectors(s, h, 4);
      json h1 = json::object();
      for (int dim : {1, 7, 27, 35}) h1["H4_" + std::to_string(dim)] = abs_rank(l4.by_dim(dim).P * B1);
      d["H0"] = {{"H3_8", sys.E(0).dim()}};
      d["H1"] = h1;
      break;
    }
    case Kind::cy: {
      const int n = s.dim / 2;
      const int N = E1.layout.index(0).size();
      // Omega-part as a complex n-form; (n,0) piece along Omega0
      Eigen::VectorXcd om0 = Eigen::VectorXcd::Zero(N);
      const auto& phi = s.phi0;
      for (const auto& [m, c] : phi[0].terms()) om0[E1.layout.index(0).position(m)] += c;
      for (const auto& [m, c] : phi[1].terms()) om0[E1.layout.index(0).position(m)] += Complexd(0, c);
      Eigen::MatrixXd n0(2, B1.cols());
      for (int c = 0; c < B1.cols(); ++c) {
        Eigen::VectorXcd a = B1.col(c).head(N).cast<Complexd>() + Complexd(0, 1) * B1.col(c).segment(N, N).cast<Complexd>();
        Complexd z = om0.dot(a) / om0.squaredNorm();
        n0(0, c) = z.real();
        n0(1, c) = z.imag();
      }
      int r_om = rank_of_rows(B1, 0, 2 * N);
      int r_n0 = abs_rank(n0);
      d["H1"] = {{"H" + std::to_string(n) + "0", r_n0},
                 {"H" + std::to_string(n - 1) + "1", r_om - r_n0},
                 {"P11_R", E1.dim() - r_om}};
      break;
    }
    case Kind::hk: {
      const int N = E1.layout.index(0).size();
      int r_c = rank_of_rows(B1, N, 2 * N);
      d["H1"] = {{"H20_plus_H11", r_c}, {"Lambda2_HK", E1.dim() - r_c}};
      break;
    }
    default:
      break;
  }
  return d;
}

}  // namespace detail

inline CohomologyReport cohomology_report(const HodgeSystem& sys) {
  CohomologyReport r;
  const CalibrationSpec& s = sys.spec();
  r.structure = s.name();
  r.torus_dim = sys.torus_dim();
  r.freq_bound = sys.freq_bound();
  const DirectionStats& st = sys.stats();
  for (int k = 0; k <= 2; ++k) {
    r.ek_dims.push_back(sys.E(k).dim());
    r.h_sharp.push_back(sys.E(k).dim() + st.kernel[k]);
  }
  for (int p = 0; p <= r.torus_dim; ++p) r.betti.push_back(static_cast<long>(binomial(r.torus_dim, p)));
  r.p = {p_map(sys, 1), p_map(sys, 2)};
  r.min_eig = st.min_eig;
  r.directions = st.scanned;
  r.eig_directions = st.eig_scanned;
  r.d2_residual = st.d2_residual;
  r.elliptic_on_torus = st.kernel[1] == 0 && st.kernel[2] == 0;
  r.singular_witness = st.singular_witness;
  r.decomposition = detail::decomposition(sys);
  return r;
}

inline json to_json(const CohomologyReport& r) {
  json j;
  j["structure"] = r.structure;
  j["torus_dim"] = r.torus_dim;
  j["freq_bound"] = r.freq_bound;
  j["ek_dims"] = r.ek_dims;
  j["h_sharp"] = r.h_sharp;
  j["betti"] = r.betti;
  j["p1_injective"] = r.p1_injective();
  j["p2_injective"] = r.p2_injective();
  j["p_ranks"] = {r.p[0].rank, r.p[1].rank};
  json mev = json::object();
  for (std::size_t k = 0; k < r.min_eig.size(); ++k) mev[std::to_string(k)] = r.min_eig[k];
  j["min_singular_values"] = mev;
  j["min_sv_scope"] = "primitive directions with max|k_i| <= 1";
  j["directions_scanned"] = r.directions;
  j["d_squared_residual"] = r.d2_residual;
  j["elliptic_on_torus"] = r.elliptic_on_torus;
  j["singular_witness"] = r.singular_witness ? json(r.singular_witness->to_vector(r.torus_dim)) : json(nullptr);
  j["decomposition"] = r.decomposition;
  return j;
}

// ------------------------------------------------------------- Spin(7) Dirac check

struct DiracCheck {
  bool pass = false;
  int freq0_kernel = 0;          // kernel dimension at frequency 0
  int frequencies = 0;           // nonzero primitive directions checked
  double min_normalized_sv = 0;  // min over k != 0 of sigma_min / |k|
  std::optional<Freq> failure;
};

/// pi_8 o d* on sections of Lambda^4_1 + Lambda^4_7, frequency by frequency.
inline DiracCheck dirac_check(const CalibrationSpec& s, int F) {
  if (s.kind != Kind::spin7) throw std::invalid_argument("dirac_check: spin7 spec required");
  auto h = isotropy_algebra(s);
  auto l4 = irrep_projectors(s, h, 4);
  auto l3 = irrep_projectors(s, h, 3);
  Eigen::MatrixXd src(70, 8);
  src << l4.by_dim(1).basis, l4.by_dim(7).basis;
  const Eigen::MatrixXd& dst = l3.by_dim(8).basis;
  // interior products e_j -| on Lambda^4 -> Lambda^3
  std::vector<Eigen::MatrixXd> I;
  MaskIndex i4(8, 4);
  for (int j = 0; j < 8; ++j) {
    Eigen::MatrixXd m(56, 70);
    for (int c = 0; c < 70; ++c) {
      Form<double> b(8, 4);
      b.add(i4.mask(c), 1.0);
      m.col(c) = form_to_eigen(interior(j, b));
    }
    I.push_back(dst.transpose() * m * src);
  }
  DiracCheck out;
  out.freq0_kernel = 8;  // the symbol vanishes at k = 0
  out.min_normalized_sv = std::numeric_limits<double>::infinity();
  out.pass = true;
  std::vector<int> k(8, -F);
  if (F == 0) return out;
  while (true) {
    int first = 0;
    while (first < 8 && k[first] == 0) ++first;
    int g = 0;
    for (int x : k) g = std::gcd(g, std::abs(x));
    if (first < 8 && k[first] > 0 && g == 1) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(8, 8);
      double k2 = 0;
      for (int j = 0; j < 8; ++j) {
        A += k[j] * I[j];
        k2 += k[j] * k[j];
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      double smin = svd.singularValues().minCoeff() / std::sqrt(k2);
      ++out.frequencies;
      out.min_normalized_sv = std::min(out.min_normalized_sv, smin);
      if (smin <= 1e-10 && !out.failure) {
        out.failure = Freq(k);
        out.pass = false;
      }
    }
    int pos = 7;
    while (pos >= 0 && k[pos] == F) k[pos--] = -F;
    if (pos < 0) break;
    ++k[pos];
  }
  return out;
}

}  // namespace calib
