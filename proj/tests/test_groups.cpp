#include <doctest.h>

#include <cmath>

#include "fractalwalk/groups.hpp"
#include "fractalwalk/ifs.hpp"
#include "fractalwalk/rng.hpp"

using namespace fw;

namespace {

Eigen::Matrix2d rot2(double th) {
  return Eigen::Matrix2d{{std::cos(th), -std::sin(th)},
                         {std::sin(th), std::cos(th)}};
}

Eigen::MatrixXd random_invertible(int D, Rng& rng) {
  while (true) {
    Eigen::MatrixXd m(D, D);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) = rng.normal();
    if (std::abs(m.determinant()) > 0.1) return m;
  }
}

}  // namespace

TEST_CASE("group elements are det-normalized") {
  Rng rng(4, 0);
  for (int rep = 0; rep < 10; ++rep) {
    GroupElement g = make_group_element(5.0 * random_invertible(3, rng), 2, 1);
    CHECK(std::abs(std::abs(g.m.determinant()) - 1.0) < 1e-12);
  }
  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(make_group_element(sing, 1, 1), std::invalid_argument);
}

TEST_CASE("multiplication and inverse behave as a group") {
  Rng rng(5, 0);
  GroupElement a = make_group_element(random_invertible(3, rng), 2, 1);
  GroupElement b = make_group_element(random_invertible(3, rng), 2, 1);
  GroupElement ab = group_mul(a, b);
  CHECK((ab.m - (a.m * b.m).eval()).norm() <
        1e-9 * ab.m.norm() + 1e-12);  // normalization cannot move det-1 input
  GroupElement e = group_mul(a, group_inv(a));
  CHECK(same_projective(e.m, group_identity(2, 1).m, 1e-10));
}

TEST_CASE("projective comparison ignores the global sign only") {
  Rng rng(6, 0);
  Eigen::MatrixXd A = random_invertible(2, rng);
  CHECK(same_projective(A, A, 1e-12));
  CHECK(same_projective(A, (-A).eval(), 1e-12));
  Eigen::MatrixXd B = A;
  B(0, 0) += 1e-5;
  CHECK(!same_projective(A, B, 1e-9));
}

TEST_CASE("expansion rate depends on the split") {
  CHECK(gamma_rate(1, 1) == doctest::Approx(2.0));
  CHECK(gamma_rate(2, 1) == doctest::Approx(1.5));
  CHECK(gamma_rate(3, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(gamma_rate(2, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(gamma_rate(0, 1), std::invalid_argument);
}

TEST_CASE("diagonal flow has the advertised block scales") {
  GroupElement a = flow_a(0.6, 2, 1);
  CHECK(a.m(0, 0) == doctest::Approx(std::exp(0.3)));
  CHECK(a.m(1, 1) == doctest::Approx(std::exp(0.3)));
  CHECK(a.m(2, 2) == doctest::Approx(std::exp(-0.6)));
  CHECK(std::abs(a.m.determinant() - 1.0) < 1e-12);
}

TEST_CASE("unipotent element carries minus the parameter") {
  Eigen::MatrixXd al(2, 1);
  al << 0.3, -0.7;
  GroupElement u = unipotent_u(al, 2, 1);
  CHECK(u.m(0, 2) == doctest::Approx(-0.3));
  CHECK(u.m(1, 2) == doctest::Approx(0.7));
  CHECK(u.m.bottomLeftCorner(1, 2).norm() == 0.0);
  CHECK_THROWS_AS(unipotent_u(al.transpose().eval(), 2, 1),
                  std::invalid_argument);
}

TEST_CASE("flow conjugation contracts the unipotent parameter") {
  Eigen::MatrixXd m(2, 1);
  m << 0.4, -1.1;
  double t = 0.8;
  double gamma = gamma_rate(2, 1);
  Eigen::MatrixXd lhs = flow_a(-t, 2, 1).m * unipotent_u(m, 2, 1).m *
                        flow_a(t, 2, 1).m;
  Eigen::MatrixXd rhs = unipotent_u((std::exp(-gamma * t) * m).eval(), 2, 1).m;
  CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("aku decomposition round-trips block elements") {
  // canonical order: g = a_t k u_alpha
  Eigen::MatrixXd al(2, 1);
  al << 0.25, -0.6;
  GroupElement g = group_mul(
      flow_a(0.45, 2, 1),
      group_mul(block_k(rot2(1.1), Eigen::MatrixXd::Identity(1, 1), 2, 1),
                unipotent_u(al, 2, 1)));
  REQUIRE(in_block_group(g));
  AKUDecomposition d = aku_decompose(g);
  CHECK(d.t == doctest::Approx(0.45).epsilon(1e-10));
  CHECK(d.alpha(0, 0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(d.alpha(1, 0) == doctest::Approx(-0.6).epsilon(1e-10));
  CHECK((d.k.topLeftCorner(2, 2) - rot2(1.1)).norm() < 1e-10);
  CHECK(same_projective(aku_reconstruct(d, 2, 1), g.m, 1e-10));
}

TEST_CASE("aku rejects elements outside the block group") {
  // nonzero lower-left block
  Eigen::MatrixXd r = rot2(0.3);
  GroupElement g = make_group_element(r, 1, 1);
  CHECK(!in_block_group(g));
  CHECK_THROWS(aku_decompose(g));

  // block triangular but the upper-left part is not conformal
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = 0.5;
  GroupElement h = make_group_element(m, 2, 2);
  CHECK(!in_block_group(h));
  CHECK_THROWS(aku_decompose(h));
}

TEST_CASE("ternary branch maps to the pinned group matrices") {
  IFSDescription ifs = preset("cantor3");
  GroupElement s = similarity_to_group(widen(ifs.sims[1]), 1, 1);
  const double r3 = std::sqrt(3.0);
  Eigen::Matrix2d want{{1.0 / r3, -(2.0 / 3.0) * r3}, {0.0, r3}};
  CHECK(same_projective(s.m, want, 1e-12));

  GroupElement g = walk_generator(widen(ifs.sims[1]), 1, 1);
  Eigen::Matrix2d wantg{{r3, 2.0 / r3}, {0.0, 1.0 / r3}};
  CHECK(same_projective(g.m, wantg, 1e-12));
}

TEST_CASE("one-step walk generator factors through the coded point") {
  // phi(x) = lambda L x + v; its walk generator must equal
  // u_beta a_{t} k_L^{-1} u_{-phi(beta)} for every beta, with
  // t = -log(lambda)/gamma.
  AlgebraicSimilarity phi;
  phi.ratio = 0.4;
  phi.left = rot2(0.7);
  phi.right = Eigen::MatrixXd::Identity(1, 1);
  phi.trans = Eigen::MatrixXd(2, 1);
  phi.trans << 0.3, -0.2;

  GroupElement lhs = walk_generator(phi, 2, 1);
  double t = -std::log(phi.ratio) / gamma_rate(2, 1);
  Eigen::MatrixXd beta(2, 1);
  beta << 0.15, 0.45;
  Eigen::MatrixXd image = phi(beta);
  GroupElement rhs = group_mul(
      unipotent_u(beta, 2, 1),
      group_mul(flow_a(t, 2, 1),
                group_mul(block_k(phi.left.transpose(),
                                  Eigen::MatrixXd::Identity(1, 1), 2, 1),
                          unipotent_u((-image).eval(), 2, 1))));
  CHECK(same_projective(lhs.m, rhs.m, 1e-12));
}

TEST_CASE("boundary action of a similarity element scales by the ratio") {
  // The fractional-linear action x -> (ax + b)/(cx + d) of the group image
  // of a one-dimensional map contracts by exactly the map ratio.
  IFSDescription ifs = preset("ex1314");
  for (int e = 0; e < 2; ++e) {
    GroupElement s = similarity_to_group(widen(ifs.sims[size_t(e)]), 1, 1);
    auto act = [&](double x) {
      return (s.m(0, 0) * x + s.m(0, 1)) / (s.m(1, 0) * x + s.m(1, 1));
    };
    double d = (act(0.9) - act(0.1)) / 0.8;
    CHECK(std::abs(d) == doctest::Approx(ifs.ratio_of(e)).epsilon(1e-12));
  }
}

TEST_CASE("walk generators reject the wrong split") {
  IFSDescription ifs = preset("cantor3");
  CHECK(walk_generators(ifs, 1, 1).size() == 2);
  CHECK_THROWS_AS(walk_generators(ifs, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(walk_generators(preset("fN:3"), 1, 1), std::invalid_argument);
}

TEST_CASE("traceless basis is orthonormal with the right classes") {
  VBasis b = v_basis(2, 1);
  CHECK(b.dim() == 8);
  for (int i = 0; i < b.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j) {
      double ip = (b.mats[size_t(i)].cwiseProduct(b.mats[size_t(j)])).sum();
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  int pos = 0, neg = 0, zero = 0;
  for (int c : b.chi_class) {
    pos += (c == 1);
    neg += (c == -1);
    zero += (c == 0);
  }
  CHECK(pos == 2);  // M*N expanding directions
  CHECK(neg == 2);
  CHECK(zero == 4);
  CHECK(b.positive_indices().size() == 2);
  auto w = b.weights();
  for (size_t i = 0; i < w.size(); ++i)
    CHECK(w[i] == doctest::Approx(b.gamma * b.chi_class[i]));
}

TEST_CASE("adjoint representation is a homomorphism") {
  Rng rng(7, 0);
  VBasis basis = v_basis(1, 1);
  GroupElement a = make_group_element(random_invertible(2, rng), 1, 1);
  GroupElement b = make_group_element(random_invertible(2, rng), 1, 1);
  Eigen::MatrixXd lhs = adjoint_rep(group_mul(a, b), basis);
  Eigen::MatrixXd rhs = adjoint_rep(a, basis) * adjoint_rep(b, basis);
  CHECK((lhs - rhs).norm() < 1e-9);
}

TEST_CASE("adjoint of the flow is diagonal with class exponents") {
  VBasis basis = v_basis(2, 1);
  double t = 0.37;
  Eigen::MatrixXd A = adjoint_rep(flow_a(t, 2, 1), basis);
  for (int i = 0; i < basis.dim(); ++i) {
    for (int j = 0; j < basis.dim(); ++j) {
      double want = 0.0;
      if (i == j) want = std::exp(basis.gamma * basis.chi_class[size_t(i)] * t);
      CHECK(A(i, j) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("compound matrices multiply and have binomial size") {
  Rng rng(8, 0);
  Eigen::MatrixXd A = random_invertible(4, rng);
  Eigen::MatrixXd B = random_invertible(4, rng);
  Eigen::MatrixXd C2 = compound_matrix(A, 2);
  CHECK(C2.rows() == 6);
  CHECK((compound_matrix((A * B).eval(), 2) -
         (C2 * compound_matrix(B, 2)).eval())
            .norm() < 1e-9);
  CHECK((compound_matrix(Eigen::MatrixXd::Identity(4, 4), 3) -
         Eigen::MatrixXd::Identity(4, 4))
            .norm() < 1e-14);
  CHECK((compound_matrix(A, 1) - A).norm() == 0.0);
}

TEST_CASE("wedge weight space bookkeeping") {
  WeightSpaceBasis w = w_space(2, 1, 2);
  CHECK(w.dimV == 8);
  CHECK(w.dim() == 28);
  // classes of pairs range over sums of two coordinate classes
  for (size_t s = 0; s < w.subsets.size(); ++s) {
    int cls = 0;
    VBasis vb = v_basis(2, 1);
    for (int idx : w.subsets[s]) cls += vb.chi_class[size_t(idx)];
    CHECK(cls == w.chi_class[s]);
  }
  // top class is 2 with multiplicity C(2,2) = 1
  CHECK(w.eigenspaces.front().first == 2);
  CHECK(w.eigenspaces.front().second.size() == 1);
  auto psi = w.psi();
  for (size_t i = 0; i + 1 < psi.size(); ++i) CHECK(psi[i] > psi[i + 1]);
  CHECK(int(w.positive_indices.size()) > 0);
  CHECK_THROWS_AS(w_space(1, 1, 9), std::invalid_argument);
}

TEST_CASE("representation dimensions for the guiding split") {
  CHECK(make_representation(3, 1, 1).dimension() == 15);
  CHECK(make_representation(3, 1, 2).dimension() == 105);
  CHECK(make_representation(3, 1, 3).dimension() == 455);
}

TEST_CASE("representation operator is multiplicative and unimodular") {
  Rng rng(9, 0);
  Representation rep = make_representation(1, 1, 2);
  GroupElement a = make_group_element(random_invertible(2, rng), 1, 1);
  GroupElement b = make_group_element(random_invertible(2, rng), 1, 1);
  Eigen::MatrixXd Ra = rep(a);
  CHECK(std::abs(std::abs(Ra.determinant()) - 1.0) < 1e-9);
  CHECK((rep(group_mul(a, b)) - (Ra * rep(b)).eval()).norm() < 1e-8);
}

TEST_CASE("det normalization reports the log scale") {
  Eigen::MatrixXd A = 3.0 * Eigen::MatrixXd::Identity(2, 2);
  double logdet = det_normalize(A);
  CHECK(logdet == doctest::Approx(2.0 * std::log(3.0)));
  CHECK(std::abs(A.determinant() - 1.0) < 1e-12);
}

TEST_CASE("block form verification accepts the ternary walk") {
  IFSDescription ifs = preset("cantor3");
  auto gens = walk_generators(ifs, 1, 1);
  BlockFormReport r = verify_block_form(gens, ifs.weights);
  CHECK(r.all_in_P);
  CHECK(r.c1 == doctest::Approx(std::log(3.0) / 2.0).epsilon(1e-12));
  for (double th : r.theta1)
    CHECK(th == doctest::Approx(std::log(3.0) / 2.0).epsilon(1e-12));
  CHECK(r.c1_positive);
  CHECK(r.lie_rank == 1);
  CHECK(r.rank_pass);
  CHECK(r.unipotent_witness);
  CHECK(r.proxy_pass);
  CHECK(!r.note.empty());
}

TEST_CASE("block form verification flags non-triangular generators") {
  GroupElement g = make_group_element(rot2(0.3), 1, 1);
  BlockFormReport r = verify_block_form({g}, {1.0});
  CHECK(!r.all_in_P);
  CHECK(!r.proxy_pass);
}
