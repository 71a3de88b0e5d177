#include <doctest.h>

#include <cmath>

#include "fractalwalk/groups.hpp"
#include "fractalwalk/ifs.hpp"
#include "fractalwalk/randwalk.hpp"
#include "fractalwalk/rng.hpp"

using namespace fw;

namespace {

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("matrix sampler validates its input") {
  CHECK_THROWS_AS(make_matrix_sampler({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_matrix_sampler({diag2(1, 1)}, {0.5, 0.5}),
                  std::invalid_argument);
  Eigen::MatrixXd bad = diag2(1, 1);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(make_matrix_sampler({bad}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(
      make_matrix_sampler({diag2(1, 1), Eigen::MatrixXd::Identity(3, 3)},
                          {0.5, 0.5}),
      std::invalid_argument);
}

TEST_CASE("product ledger tracks the scaled product") {
  ProductLedger led(2);
  Eigen::MatrixXd a = diag2(3.0, 0.5);
  Eigen::MatrixXd b = diag2(0.25, 2.0);
  led.multiply_left(a);
  led.multiply_left(b);
  CHECK(led.steps == 2);
  Eigen::MatrixXd full = std::exp(led.log_scale) * led.current;
  CHECK((full - (b * a).eval()).norm() < 1e-12);
  // scale keeps the working matrix near unit size
  CHECK(led.current.norm() < 10.0);
}

TEST_CASE("deterministic product walk") {
  auto s = make_matrix_sampler({diag2(2, 0.5), diag2(0.5, 2)}, {0.5, 0.5});
  ProductLedger a = product_walk(s, 50, 13);
  ProductLedger b = product_walk(s, 50, 13);
  CHECK(a.log_scale == b.log_scale);
  CHECK((a.current - b.current).norm() == 0.0);
  ProductLedger c = product_walk(s, 50, 14);
  CHECK(a.log_scale != c.log_scale);
}

TEST_CASE("spectrum of a single diagonal matrix is exact") {
  auto s = make_matrix_sampler({diag2(2.0, 0.5)}, {1.0});
  LyapunovEstimate est = lyapunov_spectrum(s, 200, 1);
  REQUIRE(est.exponents.size() == 2);
  CHECK(est.exponents[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(est.exponents[1] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  // flag basis aligns with the coordinate axes
  CHECK(std::abs(est.flag_basis(0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectrum of a rotation is null") {
  double th = 0.9;
  Eigen::MatrixXd r{{std::cos(th), -std::sin(th)},
                    {std::sin(th), std::cos(th)}};
  auto s = make_matrix_sampler({r}, {1.0});
  LyapunovEstimate est = lyapunov_spectrum(s, 500, 1);
  CHECK(std::abs(est.exponents[0]) < 1e-10);
  CHECK(std::abs(est.exponents[1]) < 1e-10);
}

TEST_CASE("commuting diagonal walk averages the log factors") {
  auto s = make_matrix_sampler({diag2(2, 0.5), diag2(8, 0.125)}, {0.75, 0.25});
  // exponents are weighted means: 0.75 log2 + 0.25 log8 = 1.5 log2
  LyapunovEstimate est = lyapunov_spectrum(s, 20000, 3);
  CHECK(est.exponents[0] ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(0.05));
  CHECK(est.exponents[1] ==
        doctest::Approx(-1.5 * std::log(2.0)).epsilon(0.05));
}

TEST_CASE("cluster and subspace helpers on a clean spectrum") {
  LyapunovEstimate est;
  est.exponents = {1.0, 0.98, 0.0, -1.0};
  est.flag_basis = Eigen::MatrixXd::Identity(4, 4);
  auto cl = est.clusters(0.1);
  REQUIRE(cl.size() == 3);
  CHECK(cl[0].first == doctest::Approx(0.99));
  CHECK(cl[0].second == 2);
  CHECK(est.below_top(0.1).cols() == 2);
  CHECK(est.nonpositive(1e-9).cols() == 2);
}

TEST_CASE("seeded spectra agree across streams within error") {
  auto s = make_matrix_sampler({diag2(2, 0.5), diag2(0.5, 2)}, {0.5, 0.5});
  SpectrumStats st = spectrum_with_error(s, 4000, 21, 5);
  CHECK(st.seeds == 5);
  REQUIRE(st.per_seed.size() == 5);
  REQUIRE(st.exponents.size() == 2);
  for (double se : st.stderrs) CHECK(se >= 0.0);
  // symmetric sampler: both exponents near zero at a few stderr
  CHECK(std::abs(st.exponents[0]) <= 5 * st.stderrs[0] + 0.02);
}

TEST_CASE("block oracle computes weighted means with multiplicity") {
  std::vector<BlockSpec> blocks{{1, {0.3, -0.1}}, {2, {-0.4, -0.2}}};
  std::vector<double> w{0.5, 0.5};
  BlockOracle o = block_exponent_oracle(blocks, w);
  REQUIRE(o.exponents.size() == 3);
  CHECK(o.exponents[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(o.exponents[1] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(o.exponents[2] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(o.block_means[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(o.hypotheses_ok);

  // one generator breaking the per-letter domination flips the flag
  std::vector<BlockSpec> badblocks{{1, {0.3, -0.1}}, {1, {0.1, 0.2}}};
  BlockOracle bad = block_exponent_oracle(badblocks, w);
  CHECK(!bad.hypotheses_ok);
}

TEST_CASE("synthetic walk realizes its oracle") {
  std::vector<BlockSpec> blocks{{1, {0.35, 0.1}}, {1, {-0.3, -0.05}}};
  std::vector<double> w{0.4, 0.6};
  SyntheticWalk sw = synthetic_block_walk(blocks, w, 77);
  CHECK(sw.dim == 2);
  BlockOracle o = block_exponent_oracle(blocks, w);
  LyapunovEstimate est = lyapunov_spectrum(sw.sampler, 40000, 5);
  for (size_t i = 0; i < o.exponents.size(); ++i)
    CHECK(est.exponents[i] == doctest::Approx(o.exponents[i]).epsilon(0.08));
}

TEST_CASE("distance to coordinate subspaces") {
  Eigen::VectorXd v(3);
  v << 1.0, 0.0, 0.0;
  CHECK(dist_to_coordinate_subspace(v, {0}) == doctest::Approx(0.0));
  CHECK(dist_to_coordinate_subspace(v, {1, 2}) == doctest::Approx(1.0));
  Eigen::VectorXd m(2);
  m << 1.0, 1.0;
  CHECK(dist_to_coordinate_subspace(m, {0}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("principal angle between spans") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 2);
  Eigen::MatrixXd B(3, 1);
  B << 0.0, 0.0, 1.0;
  CHECK(min_principal_angle(A, B) ==
        doctest::Approx(M_PI / 2).epsilon(1e-10));
  CHECK(min_principal_angle(A, A) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("walk attraction to the expanding coordinates") {
  IFSDescription ifs = preset("cantor3");
  auto gens = walk_generators(ifs, 1, 1);
  WalkSampler walk = make_walk_sampler(gens, ifs.weights);
  AttractionStats st = attraction_to_w(walk, 1, 1, 30, 40, 19);
  REQUIRE(st.checkpoints.size() >= 3);
  CHECK(st.checkpoints.back() == 30);
  // contraction toward the expanding line at rate gamma * c1 = log 3
  CHECK(st.median_dist.front() > st.median_dist.back());
  CHECK(st.median_dist.back() < 1e-10);
  for (size_t i = 0; i < st.median_dist.size(); ++i) {
    CHECK(st.q10[i] <= st.median_dist[i] + 1e-18);
    CHECK(st.median_dist[i] <= st.q90[i] + 1e-18);
  }
  if (st.slope_valid)
    CHECK(st.slope == doctest::Approx(-std::log(3.0)).epsilon(0.2));
}

TEST_CASE("positivity probe on the ternary adjoint walk") {
  IFSDescription ifs = preset("cantor3");
  auto gens = walk_generators(ifs, 1, 1);
  WalkSampler walk = make_walk_sampler(gens, ifs.weights);
  PositivityResult r = positivity_check(walk, 1, 1, 1, 60, 24, 23);
  CHECK(r.estimate > 0.5);  // true growth is log 3 on every probe
  CHECK(r.estimate - 3 * r.stderr_of_min > 0.0);
  REQUIRE(!r.labels.empty());
  bool has_random = false, has_wspace = false, has_adversarial = false;
  for (const auto& l : r.labels) {
    if (l.find("random") != std::string::npos) has_random = true;
    if (l.find("wspace") != std::string::npos) has_wspace = true;
    if (l.find("adversarial") != std::string::npos) has_adversarial = true;
  }
  CHECK(has_random);
  CHECK(has_wspace);
  CHECK(has_adversarial);
  PositivityResult again = positivity_check(walk, 1, 1, 1, 60, 24, 23);
  CHECK(again.estimate == r.estimate);
}
