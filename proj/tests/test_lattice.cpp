#include <doctest.h>

#include <cmath>
#include <vector>

#include "fractalwalk/contfrac.hpp"
#include "fractalwalk/ifs.hpp"
#include "fractalwalk/lattice.hpp"
#include "fractalwalk/randwalk.hpp"
#include "fractalwalk/rng.hpp"
#include "oracles.hpp"

using namespace fw;

namespace {

// Independent shortest-vector search: all integer combinations with
// coefficients in [-R, R]. Valid once R covers the reduced coefficients;
// generous R on benign bases keeps it honest.
double brute_systole(const Eigen::MatrixXd& B, int R) {
  int D = int(B.rows());
  std::vector<int> c(size_t(D), -R);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    bool zero = true;
    for (int x : c) zero = zero && (x == 0);
    if (!zero) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
      for (int j = 0; j < D; ++j)
        v += double(c[size_t(j)]) * B.col(j);
      best = std::min(best, v.norm());
    }
    int k = 0;
    while (k < D && c[size_t(k)] == R) c[size_t(k++)] = -R;
    if (k == D) break;
    ++c[size_t(k)];
  }
  return best;
}

RatEnclosure golden_enc() {
  return quadratic_enclosure(Int(-1), Int(1), Int(5), Int(2), 80);
}

}  // namespace

TEST_CASE("lattice creation normalizes the covolume") {
  Eigen::MatrixXd m = 2.5 * Eigen::MatrixXd::Identity(2, 2);
  LatticeBasis b = make_lattice(m);
  CHECK(std::abs(std::abs(b.basis.determinant()) - 1.0) < 1e-12);
  CHECK_THROWS_AS(make_lattice(Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("systole pins on classical lattices") {
  CHECK(systole(make_lattice(Eigen::MatrixXd::Identity(2, 2))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(systole(make_lattice(Eigen::MatrixXd::Identity(3, 3))) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // u_{1/2} Z^2 still has covolume 1 and a vector of length 1
  Eigen::MatrixXd u{{1.0, -0.5}, {0.0, 1.0}};
  CHECK(systole(make_lattice(u)) == doctest::Approx(1.0).epsilon(1e-12));

  // hexagonal lattice: the densest planar packing, systole (4/3)^(1/4)
  Eigen::MatrixXd hex{{1.0, 0.5}, {0.0, std::sqrt(3.0) / 2.0}};
  CHECK(systole(make_lattice(hex)) ==
        doctest::Approx(std::pow(4.0 / 3.0, 0.25)).epsilon(1e-12));
}

TEST_CASE("systole equals brute enumeration on random unimodular bases") {
  Rng rng(31, 0);
  for (int D : {2, 3}) {
    for (int rep = 0; rep < 6; ++rep) {
      Eigen::MatrixXd U = random_unimodular(D, rng, 14);
      LatticeBasis b = make_lattice(U);
      LatticeBasis r = reduce_basis(b);
      CHECK(systole(b) == doctest::Approx(brute_systole(r.basis, 4))
                              .epsilon(1e-10));
    }
  }
}

TEST_CASE("reduction preserves the lattice scale and the systole") {
  Rng rng(32, 0);
  Eigen::MatrixXd U = random_unimodular(3, rng, 20);
  LatticeBasis b = make_lattice(U);
  LatticeBasis r = reduce_basis(b);
  CHECK(std::abs(std::abs(r.basis.determinant()) - 1.0) < 1e-9);
  CHECK(systole(r) == doctest::Approx(systole(b)).epsilon(1e-10));
  // reduced vectors are no longer than the raw ones on average
  CHECK(r.basis.colwise().norm().sum() <=
        b.basis.colwise().norm().sum() + 1e-9);
}

TEST_CASE("minkowski bound dominates every unimodular systole") {
  CHECK(minkowski_bound(2) == doctest::Approx(2.0 / std::sqrt(M_PI))
                                  .epsilon(1e-12));
  Rng rng(33, 0);
  for (int rep = 0; rep < 8; ++rep) {
    Eigen::MatrixXd U = random_unimodular(2, rng, 16);
    CHECK(systole(make_lattice(U)) <= minkowski_bound(2) + 1e-9);
  }
}

TEST_CASE("random unimodular matrices have unit determinant") {
  Rng rng(34, 0);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd U = random_unimodular(3, rng, 10);
    CHECK(std::abs(std::abs(U.determinant()) - 1.0) < 1e-9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(U(i, j) == std::round(U(i, j)));
  }
}

TEST_CASE("hermite form is a unimodular invariant") {
  std::vector<std::vector<Int>> gens{{Int(2), Int(0)}, {Int(1), Int(1)}};
  auto h = hermite_normal_form(gens);
  // lattice Z(2,0) + Z(1,1): canonical rows (1,1), (0,2)
  REQUIRE(h.size() == 2);
  CHECK(h[0] == std::vector<Int>{Int(1), Int(1)});
  CHECK(h[1] == std::vector<Int>{Int(0), Int(2)});
  // another generating set of the same lattice
  std::vector<std::vector<Int>> gens2{{Int(3), Int(1)}, {Int(1), Int(1)}};
  CHECK(hermite_normal_form(gens2) == h);
}

TEST_CASE("scalar flow matches the double path at shallow times") {
  FlowTrace exact = flow_trace(golden_enc(), 10.0, 0.25);
  Eigen::MatrixXd alpha(1, 1);
  alpha(0, 0) = 0.61803398874989484820;
  FlowTrace dbl = flow_trace(alpha, 1, 1, 10.0, 0.25);
  REQUIRE(exact.systoles.size() == dbl.systoles.size());
  for (size_t i = 0; i < exact.systoles.size(); ++i) {
    CHECK(exact.times[i] == doctest::Approx(dbl.times[i]).epsilon(1e-12));
    CHECK(exact.systoles[i] ==
          doctest::Approx(dbl.systoles[i]).epsilon(1e-6));
  }
}

TEST_CASE("deep golden flow stays high while a rational flow escapes") {
  FlowTrace g = flow_trace(golden_enc(), 40.0, 0.05);
  double gmin = 1e9;
  for (double s : g.systoles) gmin = std::min(gmin, s);
  CHECK(gmin == doctest::Approx(oracle::kGoldenFlowMinSystole).epsilon(1e-9));

  FlowTrace r = flow_trace(exact_enclosure(Rat(1, 2)), 40.0, 0.05);
  long long below = 0;
  for (double s : r.systoles) below += (s < 0.05);
  CHECK(double(below) / double(r.systoles.size()) ==
        doctest::Approx(oracle::kHalfFlowEscape).epsilon(1e-12));
}

TEST_CASE("zero target flows along the pure diagonal") {
  FlowTrace z = flow_trace(exact_enclosure(Rat(0)), 5.0, 0.5);
  for (size_t i = 0; i < z.times.size(); ++i)
    CHECK(z.systoles[i] ==
          doctest::Approx(std::exp(-z.times[i])).epsilon(1e-12));
}

TEST_CASE("flow refuses an enclosure too wide for its window") {
  RatEnclosure wide{Rat(3, 10), Rat(31, 100)};
  CHECK_THROWS_AS(flow_trace(wide, 40.0, 0.5), std::domain_error);
  // the same enclosure is fine on a short window
  CHECK_NOTHROW(flow_trace(wide, 2.0, 0.5));
}

TEST_CASE("walk systole series starts at the integer lattice") {
  IFSDescription ifs = preset("cantor3");
  auto gens = walk_generators(ifs, 1, 1);
  WalkSampler walk = make_walk_sampler(gens, ifs.weights);
  auto series = walk_systole_series(walk, 50, 3);
  REQUIRE(series.size() == 51);
  CHECK(series[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : series) {
    CHECK(s > 0.0);
    CHECK(s <= minkowski_bound(2) + 1e-9);
  }
  auto again = walk_systole_series(walk, 50, 3);
  CHECK(series == again);
}

TEST_CASE("walk and flow bookkeeping agree along ternary words") {
  IFSDescription ifs = preset("cantor3");
  Word w = sample_word(ifs, 70, 41, 0);
  IdentityCheck c = walk_flow_identity_check(ifs, w, 10, 1, 1);
  CHECK(c.pass);
  CHECK(c.n == 10);
  CHECK(c.t_n == doctest::Approx(oracle::kCantorT10).epsilon(1e-12));
  CHECK(c.rel_error <= c.budget_rel);
  CHECK(c.budget_rel < 1e-9);

  // two-ratio system: the a-part follows the sampled letters
  IFSDescription two = preset("ex1314");
  Word w2 = sample_word(two, 70, 42, 0);
  IdentityCheck c2 = walk_flow_identity_check(two, w2, 12, 1, 1);
  CHECK(c2.pass);
  double want_t = 0.0;
  for (int i = 0; i < 12; ++i)
    want_t += -std::log(two.ratio_of(w2.symbols[size_t(i)])) / 2.0;
  CHECK(c2.t_n == doctest::Approx(want_t).epsilon(1e-12));
}

TEST_CASE("identity check demands a word longer than the walk") {
  IFSDescription ifs = preset("cantor3");
  Word w = sample_word(ifs, 10, 43, 0);
  CHECK_THROWS_AS(walk_flow_identity_check(ifs, w, 10, 1, 1),
                  std::invalid_argument);
  // a short coding tail cannot certify a 1e-9 budget
  Word w2 = sample_word(ifs, 13, 44, 0);
  CHECK_THROWS_AS(walk_flow_identity_check(ifs, w2, 10, 1, 1),
                  std::domain_error);
}

TEST_CASE("badly approximable evidence for pinned targets") {
  BaResult g = ba_test_direct(golden_enc(), Int(10000));
  CHECK(g.c_min == doctest::Approx(oracle::kGoldenCmin).epsilon(1e-9));
  REQUIRE(g.argmin_q.size() == 1);
  CHECK(g.argmin_q[0] == Int(1));
  CHECK(g.c_tail == doctest::Approx(oracle::kInvSqrt5).epsilon(5e-3));
  CHECK(g.c_tail >= 0.44);
  CHECK(g.c_tail <= 0.45);
  CHECK(!g.exact);

  BaResult r = ba_test_direct(exact_enclosure(Rat(3, 7)), Int(100));
  CHECK(r.exact);
  CHECK(r.c_min == 0.0);
  CHECK(r.argmin_q[0] == Int(7));
  CHECK(r.uncertainty == 0.0);
}

TEST_CASE("matrix ba probe agrees with the scalar one on rationals") {
  BaResult s = ba_test_direct(exact_enclosure(Rat(13, 30)), Int(200));
  BaResult m = ba_test_direct({{Rat(13, 30)}}, 1, 1, Int(200));
  CHECK(m.c_min == doctest::Approx(s.c_min).epsilon(1e-12));
  CHECK(m.c_tail == doctest::Approx(s.c_tail).epsilon(1e-12));
  CHECK(m.argmin_q == s.argmin_q);
}

TEST_CASE("two-dimensional ba probe matches a direct scan") {
  std::vector<std::vector<Rat>> alpha{{Rat(1, 3)}, {Rat(1, 2)}};
  BaResult r = ba_test_direct(alpha, 2, 1, Int(30));
  // brute force over q in [-30, 30] with N/M = 1/2
  double best = 1e18;
  for (int q = 1; q <= 30; ++q) {
    auto frac_dist = [&](double x) {
      double f = x - std::floor(x);
      return std::min(f, 1.0 - f);
    };
    double d = std::hypot(frac_dist(q / 3.0), frac_dist(q / 2.0));
    best = std::min(best, std::sqrt(double(q)) * d);
  }
  CHECK(r.c_min == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("dirichlet improvement verdicts") {
  // lambda = 1 is the classical theorem: every target passes
  auto v = di_test(golden_enc(), Rat(1), {Int(10), Int(100), Int(1000)});
  for (const auto& d : v) CHECK(d.verdict == 1);

  // golden ratio improves at 9/10 as well
  auto v2 = di_test(golden_enc(), Rat(9, 10), {Int(10), Int(60), Int(400)});
  for (const auto& d : v2) {
    CHECK(d.verdict == 1);
    CHECK(d.margin > 0.0);
  }

  // but not at 1/100 for mid-range Q
  auto v3 = di_test(golden_enc(), Rat(1, 100), {Int(50)});
  CHECK(v3[0].verdict == 0);

  // a rational target eventually hits distance zero and passes any lambda
  auto v4 = di_test(exact_enclosure(Rat(1, 3)), Rat(1, 100), {Int(10)});
  CHECK(v4[0].verdict == 1);

  // an enclosure can be too coarse to decide
  RatEnclosure coarse{Rat(1, 4) - Rat(1, 1000), Rat(1, 4) + Rat(1, 1000)};
  auto v5 = di_test(coarse, Rat(1, 100), {Int(10)});
  CHECK(v5[0].verdict == -1);
}

TEST_CASE("equidistribution diagnostics on synthetic series") {
  std::vector<double> flat(200, 0.5);
  EquidistReport r = equidist_diagnostics(flat);
  CHECK(r.length == 200);
  CHECK(r.split_stable);
  CHECK(r.escape_fraction == 0.0);
  REQUIRE(!r.s_grid.empty());
  for (size_t i = 0; i < r.s_grid.size(); ++i) {
    double want = r.s_grid[i] > 0.5 ? 1.0 : 0.0;
    CHECK(r.means[i] == doctest::Approx(want));
  }

  // an escaping series counts its time below the threshold
  std::vector<double> esc(100, 1.0);
  for (size_t i = 0; i < 30; ++i) esc[i] = 0.01;
  EquidistReport e = equidist_diagnostics(esc);
  CHECK(e.escape_fraction == doctest::Approx(0.3));

  CHECK_THROWS_AS(equidist_diagnostics(std::vector<double>(5, 1.0)),
                  std::invalid_argument);
}
