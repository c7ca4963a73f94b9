#include <gtest/gtest.h>

#include "calib/orbits/validate.hpp"
#include "test_util.hpp"

using namespace calib;
using namespace calib::testkit;

namespace {

CalibrationSpec M(Kind k, SpecParams p = {}) { return model_calibration(k, p); }

MultiForm<double> perturbed(const CalibrationSpec& s, std::mt19937_64& rng, double scale = 0.1) {
  Endo<double> xi = random_endo(rng, s.dim, scale / s.dim);
  return rho_exp(xi, s.phi0);
}

}  // namespace

TEST(Model, MongeAmpereConstants) {
  EXPECT_EQ(model::monge_ampere_constant(1), ComplexQ(Rational(0), Rational(-2)));  // 2/i
  EXPECT_EQ(model::monge_ampere_constant(2), ComplexQ(Rational(2)));
  EXPECT_EQ(model::monge_ampere_constant(3), ComplexQ(Rational(0), Rational(-4, 3)));
  // n = 1 by hand: (dx1 + i dx2) ^ (dx1 - i dx2) = -2i dx12
  auto s = M(Kind::cy, {.complex_dim = 1});
  const auto& p = *s.phi0_exact;
  Form<ComplexQ> om = model::combine(p[0], p[1]), omb = model::combine(p[0], -p[1]);
  EXPECT_EQ(wedge(om, omb), Form<ComplexQ>::basis(2, {0, 1}, ComplexQ(Rational(0), Rational(-2))));
  for (int n = 1; n <= 3; ++n) EXPECT_TRUE(monge_ampere_exact(M(Kind::cy, {.complex_dim = n}))) << n;
}

TEST(Model, G2Forms) {
  auto s = M(Kind::g2);
  const auto& phi = (*s.phi0_exact)[0];
  const auto& psi = (*s.phi0_exact)[1];
  EXPECT_EQ(phi.terms().size(), 7u);
  for (const auto& [m, c] : phi.terms()) EXPECT_TRUE(c == 1 || c == -1);
  EXPECT_EQ(psi, euclidean_star(phi));
  // i_u phi ^ i_v phi ^ phi = 6 <u,v> vol
  Mask vol = mask_from_indices({0, 1, 2, 3, 4, 5, 6}, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      EXPECT_EQ(wedge(wedge(interior(i, phi), interior(j, phi)), phi).coeff(vol), Rational(i == j ? 6 : 0));
}

TEST(Model, DegenerateAndCayley) {
  auto s = M(Kind::degenerate2form, {.dim = 4});
  const auto& w = (*s.phi0_exact)[0];
  EXPECT_TRUE(wedge(w, w).is_zero());
  auto c = M(Kind::spin7);
  EXPECT_EQ((*c.phi0_exact)[0].terms().size(), 14u);
  EXPECT_EQ((*c.phi0_exact)[0], euclidean_star((*c.phi0_exact)[0]));  // self-dual
}

TEST(Model, InvalidParams) {
  EXPECT_THROW(M(Kind::symplectic, {.dim = 5}), std::invalid_argument);
  EXPECT_THROW(M(Kind::hk, {.m = 5}), std::invalid_argument);
  EXPECT_THROW(M(Kind::g2, {.dim = 8}), std::invalid_argument);
  EXPECT_THROW(parse_kind("kahler"), std::invalid_argument);
  EXPECT_EQ(parse_kind("spin7"), Kind::spin7);
}

struct DimRow {
  Kind kind;
  SpecParams p;
  int h;
  int e1;
};

TEST(Orbits, DimensionTable) {
  std::vector<DimRow> rows = {
      {Kind::symplectic, {.dim = 4}, 10, 6},  {Kind::symplectic, {.dim = 6}, 21, 15},
      {Kind::sl, {.complex_dim = 2}, 6, 10},  {Kind::sl, {.complex_dim = 3}, 16, 20},
      {Kind::cy, {.complex_dim = 2}, 3, 13},  {Kind::cy, {.complex_dim = 3}, 8, 28},
      {Kind::hk, {.m = 1}, 3, 13},            {Kind::g2, {}, 14, 35},
      {Kind::spin7, {}, 21, 43},              {Kind::degenerate2form, {.dim = 4}, 11, 5},
  };
  for (const auto& r : rows) {
    auto s = M(r.kind, r.p);
    auto h = isotropy_algebra(s);
    auto e1 = ek_space(s, 1);
    EXPECT_EQ(h.dim, r.h) << s.name() << " n=" << s.dim;
    EXPECT_EQ(e1.dim(), r.e1) << s.name() << " n=" << s.dim;
    EXPECT_EQ(h.dim + e1.dim(), s.dim * s.dim);
    // E^1 is the rho-hat image
    EXPECT_EQ(rank(rho_matrix(*s.phi0_exact)), e1.dim());
  }
}

TEST(Orbits, HyperKahlerFormulaForM2) {
  auto s = M(Kind::hk, {.m = 2});
  EXPECT_EQ(ek_space(s, 1).dim(), 14 * 4 - 2);
  EXPECT_EQ(isotropy_algebra(s).dim, 2 * 4 + 2);
}

TEST(Orbits, Lambda2HK) {
  for (int m : {1, 2}) {
    auto s = M(Kind::hk, {.m = m});
    auto e1 = ek_space(s, 1);
    EXPECT_EQ(lambda2_hk_dim_from_e1(s, e1), 2 * m * m + m);
    Eigen::MatrixXd L = lambda2_hk(s);
    EXPECT_EQ(L.cols(), 2 * m * m + m);
    // orthogonal to the hyperkahler forms themselves
    for (int x = 0; x < 3; ++x) EXPECT_LT((L.transpose() * form_to_eigen(s.phi0[x])).norm(), 1e-12);
    // and each element sits in E^1 as (alpha, 0, 0)
    for (int c = 0; c < L.cols(); ++c) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(e1.layout.size());
      v.head(L.rows()) = L.col(c);
      EXPECT_LT((v - e1.basis * (e1.basis.transpose() * v)).norm(), 1e-10);
    }
  }
}

TEST(Orbits, EkModuleClosure) {
  std::mt19937_64 rng(11);
  for (auto s : {M(Kind::g2), M(Kind::cy, {.complex_dim = 2}), M(Kind::symplectic, {.dim = 4})}) {
    for (int k = 0; k <= 2; ++k) {
      auto Ek = ek_space(s, k), Ek1 = ek_space(s, k + 1);
      for (int t = 0; t < 5; ++t) {
        Form<double> u = one_form(random_vec(rng, s.dim));
        Eigen::VectorXd x = Eigen::VectorXd::Random(Ek.dim());
        MultiForm<double> a = Ek.layout.from_eigen(Eigen::VectorXd(Ek.basis * x));
        Eigen::VectorXd y = Ek1.layout.to_eigen(wedge(u, a));
        EXPECT_LT((y - Ek1.basis * (Ek1.basis.transpose() * y)).norm(), 1e-10) << s.name() << " k=" << k;
      }
    }
  }
}

TEST(Orbits, MetricalTable) {
  for (auto s : {M(Kind::cy, {.complex_dim = 2}), M(Kind::cy, {.complex_dim = 3}), M(Kind::hk, {.m = 1}), M(Kind::g2),
                 M(Kind::spin7)}) {
    auto v = check_metrical(s, isotropy_algebra(s));
    EXPECT_TRUE(v.metrical) << s.name();
    EXPECT_FALSE(v.witness);
  }
  for (auto s : {M(Kind::symplectic, {.dim = 4}), M(Kind::sl, {.complex_dim = 2}), M(Kind::degenerate2form, {.dim = 4})}) {
    auto v = check_metrical(s, isotropy_algebra(s));
    EXPECT_FALSE(v.metrical) << s.name();
    ASSERT_TRUE(v.witness) << s.name();
    EXPECT_TRUE(v.witness_symmetric);
    Eigen::MatrixXd X = to_eigen(*v.witness);
    EXPECT_LT((X - X.transpose()).norm(), 1e-12);
    EXPECT_GT(X.norm(), 0.5);
    EXPECT_LT(std::sqrt(rho_hat(*v.witness, s.phi0).norm2()), 1e-12);
  }
}

TEST(Orbits, EllipticityTable) {
  struct Row {
    CalibrationSpec s;
    bool elliptic;
  };
  std::vector<Row> rows = {
      {M(Kind::symplectic, {.dim = 4}), true}, {M(Kind::symplectic, {.dim = 6}), true},
      {M(Kind::degenerate2form, {.dim = 4}), false}, {M(Kind::sl, {.complex_dim = 2}), true},
      {M(Kind::cy, {.complex_dim = 2}), true}, {M(Kind::cy, {.complex_dim = 3}), true},
      {M(Kind::hk, {.m = 1}), true}, {M(Kind::g2), true}, {M(Kind::spin7), true},
  };
  for (const auto& r : rows) {
    auto v = check_elliptic(r.s, 16, 42);
    EXPECT_EQ(v.elliptic, r.elliptic) << r.s.name() << " n=" << r.s.dim;
    EXPECT_TRUE(v.exact_arithmetic);
    EXPECT_EQ(v.checks.size(), static_cast<std::size_t>(r.s.dim + 16));  // exact specs add no structural covectors
    if (!r.elliptic) {
      ASSERT_TRUE(v.witness);
      EXPECT_NE(v.rank_gap, 0);
    }
  }
}

TEST(Orbits, DegenerateWitnessIsDx1) {
  auto v = check_elliptic(M(Kind::degenerate2form, {.dim = 4}), 0, 1);
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(v.witness->u, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(v.witness_position, 1);
}

TEST(Orbits, EllipticOrbitInvariantAndSeedIndependent) {
  std::mt19937_64 rng(3);
  for (auto s : {M(Kind::g2), M(Kind::degenerate2form, {.dim = 4}), M(Kind::cy, {.complex_dim = 2})}) {
    bool base = check_elliptic(s, 8, 42).elliptic;
    EXPECT_EQ(check_elliptic(s, 8, 7).elliptic, base);
    auto moved = respec(s, perturbed(s, rng));
    auto v = check_elliptic(moved, 8, 42);
    EXPECT_FALSE(v.exact_arithmetic);
    EXPECT_EQ(v.elliptic, base) << s.name();
    EXPECT_EQ(isotropy_algebra(moved).dim, isotropy_algebra(s).dim);
  }
}

// ---------------------------------------------------------------- irreps

void check_projectors(const CalibrationSpec& s, const IsotropyAlgebra& h, const IrrepDecomposition& d) {
  const int N = static_cast<int>(d.parts.front().P.rows());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t i = 0; i < d.parts.size(); ++i) {
    const auto& Pi = d.parts[i].P;
    sum += Pi;
    EXPECT_LT((Pi * Pi - Pi).norm(), 1e-10);
    for (std::size_t j = i + 1; j < d.parts.size(); ++j) EXPECT_LT((Pi * d.parts[j].P).norm(), 1e-10);
    for (const auto& xi : h.basis) {
      Eigen::MatrixXd R = action_matrix(xi, d.degree);
      EXPECT_LT((R * Pi - Pi * R).norm(), 1e-10) << s.name();
    }
  }
  EXPECT_LT((sum - Eigen::MatrixXd::Identity(N, N)).norm(), 1e-10);
}

TEST(Irreps, G2Splits) {
  auto s = M(Kind::g2);
  auto h = isotropy_algebra(s);
  auto d3 = irrep_projectors(s, h, 3);
  auto d2 = irrep_projectors(s, h, 2);
  EXPECT_EQ(d3.dims(), (std::vector<int>{1, 7, 27}));
  EXPECT_EQ(d2.dims(), (std::vector<int>{7, 14}));
  EXPECT_TRUE(d3.multiplicity_free);
  EXPECT_TRUE(d2.multiplicity_free);
  check_projectors(s, h, d3);
  check_projectors(s, h, d2);
  // closed forms: Lambda^2_14 = { g ^ psi = 0, *g = -g ^ phi }, Lambda^2_7 = { g ^ phi = 2 *g }
  const auto& phi = s.phi0[0];
  const auto& psi = s.phi0[1];
  const auto& p14 = d2.by_dim(14);
  for (int c = 0; c < 14; ++c) {
    Form<double> g = form_from_eigen(7, 2, p14.basis.col(c));
    EXPECT_LT(std::sqrt(wedge(g, psi).norm2()), 1e-12);
    EXPECT_LT(dist(euclidean_star(g), -wedge(g, phi)), 1e-12);
  }
  const auto& p7 = d2.by_dim(7);
  for (int c = 0; c < 7; ++c) {
    Form<double> g = form_from_eigen(7, 2, p7.basis.col(c));
    EXPECT_LT(dist(wedge(g, phi), 2.0 * euclidean_star(g)), 1e-12);
  }
  // the trivial piece of Lambda^3 is spanned by phi0
  Eigen::VectorXd f = form_to_eigen(phi);
  EXPECT_LT((d3.by_dim(1).P * f - f).norm(), 1e-12);
}

TEST(Irreps, Spin7Splits) {
  auto s = M(Kind::spin7);
  auto h = isotropy_algebra(s);
  auto d4 = irrep_projectors(s, h, 4);
  auto d3 = irrep_projectors(s, h, 3);
  EXPECT_EQ(d4.dims(), (std::vector<int>{1, 7, 27, 35}));
  EXPECT_EQ(d3.dims(), (std::vector<int>{8, 48}));
  check_projectors(s, h, d4);
  check_projectors(s, h, d3);
  EXPECT_TRUE(d4.multiplicity_free);
  // E^1 = Lambda^4_1 + Lambda^4_7 + Lambda^4_35
  auto e1 = ek_space(s, 1);
  Eigen::MatrixXd P = d4.by_dim(1).P + d4.by_dim(7).P + d4.by_dim(35).P;
  EXPECT_LT((P * e1.basis - e1.basis).norm(), 1e-10);
}

TEST(Irreps, NonMetricalRejected) {
  auto s = M(Kind::symplectic, {.dim = 4});
  EXPECT_THROW(irrep_projectors(s, isotropy_algebra(s), 2), std::invalid_argument);
}

TEST(Irreps, HyperKahlerTrivialPartIsDegenerate) {
  // sp(1) acts trivially on the span of the three Kahler forms: a repeated irrep, flagged
  auto s = M(Kind::hk, {.m = 1});
  auto d = irrep_projectors(s, isotropy_algebra(s), 2);
  EXPECT_EQ(d.dims(), (std::vector<int>{3, 3}));
  EXPECT_FALSE(d.multiplicity_free);
}

// ---------------------------------------------------------------- G2 operators

TEST(G2, JOperator) {
  auto s = M(Kind::g2);
  auto g = g2_operators(s);
  const auto& phi = s.phi0[0];
  const auto& psi = s.phi0[1];
  EXPECT_LT(dist(g2_J(g, phi), (4.0 / 3.0) * psi), 1e-12);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    Endo<double> xi = random_endo(rng, 7);
    EXPECT_LT(dist(g2_J(g, rho_hat(xi, phi)), rho_hat(xi, psi)), 1e-10);
  }
  Form<double> a = project(g.l3.by_dim(27), random_form(rng, 7, 3));
  EXPECT_LT(dist(g2_J(g, a), -euclidean_star(a)), 1e-12);
  EXPECT_THROW(g2_J(g, random_form(rng, 7, 2)), std::invalid_argument);
}

TEST(G2, Lemma64) {
  auto g = g2_operators(M(Kind::g2));
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> u = t == 0 ? std::vector<double>{1, 0, 0, 0, 0, 0, 0} : random_vec(rng, 7);
    Form<double> eta = random_form(rng, 7, 2, 1.0);
    auto r = lemma_6_4_solve(g, u, eta);
    EXPECT_LT(r.outer_residual, 1e-10);
    EXPECT_LT(r.membership_residual, 1e-10);
    EXPECT_LT(r.contraction_residual, 1e-10);
    // the intermediate step only holds up to a factor: u^J(u^gamma) is half of u^J(u^eta)
    EXPECT_NEAR(r.middle_ratio, 0.5, 1e-10);
  }
}

TEST(G2, Lemma64DegenerateInputs) {
  auto s = M(Kind::g2);
  auto g = g2_operators(s);
  std::mt19937_64 rng(9);
  std::vector<double> u = random_vec(rng, 7);
  Form<double> eta7 = interior(random_vec(rng, 7), s.phi0[0]);
  auto r = lemma_6_4_solve(g, u, eta7);
  EXPECT_LT(std::sqrt(wedge(one_form(u), g2_J(g, wedge(one_form(u), eta7))).norm2()), 1e-12);
  EXPECT_LT(std::sqrt(r.gamma.norm2()), 1e-12);
  Form<double> flat = wedge(one_form(u), one_form(random_vec(rng, 7)));
  EXPECT_LT(std::sqrt(lemma_6_4_solve(g, u, flat).gamma.norm2()), 1e-12);
  EXPECT_THROW(lemma_6_4_solve(g, std::vector<double>(7, 0.0), eta7), std::invalid_argument);
}

// ---------------------------------------------------------------- validation

TEST(Validate, ModelsPass) {
  for (auto s : {M(Kind::symplectic, {.dim = 4}), M(Kind::degenerate2form, {.dim = 4}), M(Kind::sl, {.complex_dim = 2}),
                 M(Kind::cy, {.complex_dim = 2}), M(Kind::cy, {.complex_dim = 3}), M(Kind::hk, {.m = 1}),
                 M(Kind::hk, {.m = 2}), M(Kind::g2), M(Kind::spin7)}) {
    auto d = validate_structure(s);
    for (const auto& c : d.checks) EXPECT_TRUE(c.pass) << s.name() << ": " << c.name << " " << c.residual;
  }
}

TEST(Validate, CyFlippedKahlerFormNotPositive) {
  auto s = M(Kind::cy, {.complex_dim = 2});
  MultiForm<double> phi = s.phi0;
  phi[2] = -phi[2];
  auto d = validate_structure(s, phi);
  EXPECT_FALSE(d.at("metric_positive").pass);
  EXPECT_TRUE(d.at("monge_ampere").pass);  // c_2 omega^2 is even in omega
  EXPECT_FALSE(d.pass());
}

TEST(Validate, PerturbationsStayInOrbit) {
  std::mt19937_64 rng(21);
  for (auto s : {M(Kind::symplectic, {.dim = 4}), M(Kind::sl, {.complex_dim = 2}), M(Kind::cy, {.complex_dim = 3}),
                 M(Kind::hk, {.m = 1}), M(Kind::g2), M(Kind::spin7)}) {
    for (int t = 0; t < 3; ++t) {
      auto d = validate_structure(s, perturbed(s, rng));
      for (const auto& c : d.checks) EXPECT_TRUE(c.pass) << s.name() << ": " << c.name << " " << c.residual;
    }
  }
}

TEST(Validate, OffOrbitG2NotCertified) {
  auto s = M(Kind::g2);
  MultiForm<double> phi = s.phi0;
  phi[0] = phi[0] + Form<double>::basis(7, {0, 1, 2}, 0.7);  // psi no longer matches phi
  auto d = validate_structure(s, phi);
  EXPECT_FALSE(d.at("orbit_membership").pass);
  EXPECT_THROW(validate_structure(s, MultiForm<double>(7, {3, 3})), std::invalid_argument);
}

TEST(Metric, FromCalibration) {
  auto s = M(Kind::g2);
  EXPECT_LT((metric_from_calibration(s, s.phi0).gram() - Eigen::MatrixXd::Identity(7, 7)).norm(), 1e-9);
  // scaling: (e^l)^* phi carries e^{2l} g_V
  double l = 0.3;
  auto scaled = rho_exp(l * Endo<double>::identity(7), s.phi0);
  EXPECT_LT((metric_from_calibration(s, scaled).gram() - std::exp(2 * l) * Eigen::MatrixXd::Identity(7, 7)).norm(), 1e-9);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    Endo<double> xi = random_endo(rng, 7, 0.1);
    Endo<double> gm = endo_exp(xi);
    auto phi = pullback(gm, s.phi0);
    Eigen::MatrixXd push = metric_from_group(s, gm).gram();
    EXPECT_LT((g2_intrinsic_metric(phi[0]).gram() - push).norm(), 1e-9);
    EXPECT_LT((metric_from_calibration(s, phi).gram() - push).norm(), 1e-9);
  }
  EXPECT_THROW(metric_from_calibration(M(Kind::symplectic, {.dim = 4}), M(Kind::symplectic, {.dim = 4}).phi0),
               std::invalid_argument);
}
