#include <doctest.h>

#include <cmath>
#include <vector>

#include "fractalwalk/contfrac.hpp"
#include "fractalwalk/ifs.hpp"
#include "oracles.hpp"

using namespace fw;

namespace {

RatEnclosure golden_enc(int prec = 80) {
  // (sqrt 5 - 1)/2
  return quadratic_enclosure(Int(-1), Int(1), Int(5), Int(2), prec);
}

Rat rational_from_digits(const std::vector<long long>& d) {
  Rat x(0);
  for (auto it = d.rbegin(); it != d.rend(); ++it) x = Rat(1) / (Rat(*it) + x);
  return x;
}

}  // namespace

TEST_CASE("euclidean digits of simple rationals") {
  CHECK(cf_euclid(Rat(0), 10).empty());
  CHECK(cf_euclid(Rat(1, 3), 10) == std::vector<long long>{3});
  CHECK(cf_euclid(Rat(2, 5), 10) == std::vector<long long>{2, 2});
  CHECK(cf_euclid(Rat(113, 355), 10) == std::vector<long long>{3, 7, 16});
  // canonical form: never a trailing 1
  CHECK(cf_euclid(Rat(1, 2), 10) == std::vector<long long>{2});
  for (int p = 1; p < 40; ++p)
    for (int q = p + 1; q <= 40; ++q) {
      auto d = cf_euclid(Rat(p, q), 50);
      REQUIRE(!d.empty());
      CHECK(d.back() >= 2);
      CHECK(rational_from_digits(d) == Rat(p, q));
    }
}

TEST_CASE("validated digits of quadratic targets") {
  CFExpansion g = cf_validated(golden_enc(), 40);
  REQUIRE(g.certified_length() >= 30);
  for (int i = 0; i < 30; ++i) CHECK(g.digits[size_t(i)] == 1);
  CHECK(!g.terminated);

  // sqrt2 - 1 = [0; 2, 2, 2, ...]
  CFExpansion s2 = cf_validated(
      quadratic_enclosure(Int(-1), Int(1), Int(2), Int(1), 80), 40);
  REQUIRE(s2.certified_length() >= 30);
  for (int i = 0; i < 30; ++i) CHECK(s2.digits[size_t(i)] == 2);

  // sqrt3 - 1 = [0; 1, 2, 1, 2, ...]
  CFExpansion s3 = cf_validated(
      quadratic_enclosure(Int(-1), Int(1), Int(3), Int(1), 80), 40);
  REQUIRE(s3.certified_length() >= 30);
  for (int i = 0; i < 30; ++i) CHECK(s3.digits[size_t(i)] == (i % 2 ? 2 : 1));
}

TEST_CASE("validated digits agree with the euclidean expansion on exact input") {
  for (int p : {1, 3, 7, 13, 29})
    for (int q : {31, 57, 101}) {
      CFExpansion e = cf_validated(exact_enclosure(Rat(p, q)), 100);
      CHECK(e.terminated);
      CHECK(e.digits == cf_euclid(Rat(p, q), 100));
    }
}

TEST_CASE("wide enclosures certify conservatively") {
  // straddles 1/2, the boundary between first-digit cylinders 1 and 2
  CFExpansion c = cf_validated(RatEnclosure{Rat(49, 100), Rat(51, 100)}, 10);
  CHECK(c.certified_length() == 0);
  // interval touching 0 certifies nothing rather than erroring
  CFExpansion z = cf_validated(RatEnclosure{Rat(0), Rat(1, 100)}, 10);
  CHECK(z.certified_length() == 0);
  // a subinterval of one deep cylinder still certifies the shared prefix
  CFExpansion deep =
      cf_validated(RatEnclosure{Rat(41, 100), Rat(42, 100)}, 10);
  CHECK(deep.certified_length() >= 2);
  CHECK(deep.digits[0] == 2);
}

TEST_CASE("gauss orbit iterates and reads digits consistently") {
  GaussOrbit o = gauss_orbit(exact_enclosure(Rat(13, 30)), 10);
  CHECK(o.terminated);
  auto d = cf_euclid(Rat(13, 30), 10);
  REQUIRE(o.certified >= int(d.size()));
  for (size_t i = 0; i < d.size(); ++i) CHECK(o.digit_reads[i] == d[i]);
  CHECK(o.iterates.front().lo == Rat(13, 30));

  GaussOrbit g = gauss_orbit(golden_enc(), 20);
  CHECK(g.certified >= 15);
  for (int i = 0; i < 15; ++i) CHECK(g.digit_reads[size_t(i)] == 1);
}

TEST_CASE("digit mass matches the closed form") {
  for (int k = 1; k <= 10; ++k)
    CHECK(gauss_digit_probability(k) ==
          doctest::Approx(oracle::kDigitP[k]).epsilon(1e-14));
  double sum = 0.0;
  for (int k = 1; k <= 10; ++k) sum += gauss_digit_probability(k);
  CHECK(1.0 - sum ==
        doctest::Approx(oracle::kDigitTailOver10).epsilon(1e-12));
}

TEST_CASE("digit histogram layout and reference column") {
  std::vector<long long> ones(200, 1);
  ones.push_back(11);  // one tail digit
  DigitHistogram h = digit_frequencies(ones, 10);
  CHECK(h.total == 201);
  CHECK(h.counts[1] == 200);
  CHECK(h.tail_count == 1);
  CHECK(h.max_digit == 11);
  REQUIRE(h.empirical.size() == 11);
  CHECK(h.empirical[0] == doctest::Approx(200.0 / 201));
  CHECK(h.reference[0] == doctest::Approx(oracle::kDigitP[1]).epsilon(1e-14));
  CHECK(h.reference[10] ==
        doctest::Approx(oracle::kDigitTailOver10).epsilon(1e-12));
  CHECK(h.sup_deviation ==
        doctest::Approx(200.0 / 201 - oracle::kDigitP[1]).epsilon(1e-9));
}

TEST_CASE("best approximations of the golden ratio are the fibonacci scale") {
  BestApproxSequence b = best_approximations(golden_enc(), Int(100));
  std::vector<long long> fib{1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  REQUIRE(b.pq.size() == fib.size());
  for (size_t i = 0; i < fib.size(); ++i) CHECK(b.pq[i].second == Int(fib[i]));
  CHECK(b.certified == int(b.pq.size()));
  CHECK(!b.exhausted);
  // y is the q-sequence rescaled to start at 1
  CHECK(b.y[0] == Rat(1));
  CHECK(b.y[4] == Rat(8));
}

TEST_CASE("best approximations of a rational terminate with the exact hit") {
  BestApproxSequence b =
      best_approximations(exact_enclosure(Rat(2, 7)), Int(50));
  // [0; 3, 2]: denominators 1, 3, 7, then nothing beats the exact hit
  REQUIRE(b.pq.size() == 3);
  CHECK(b.pq[0] == std::make_pair(Int(0), Int(1)));
  CHECK(b.pq[1] == std::make_pair(Int(1), Int(3)));
  CHECK(b.pq[2] == std::make_pair(Int(2), Int(7)));
  CHECK(b.exhausted);
}

TEST_CASE("ladder construction matches the exhaustive scan") {
  // golden: digits all 1, above 1/2
  BestApproxSequence brute = best_approximations(golden_enc(), Int(1000));
  std::vector<long long> ones(16, 1);
  BestApproxSequence ladder = best_approx_from_digits(ones, true);
  REQUIRE(ladder.pq.size() >= brute.pq.size());
  for (size_t i = 0; i < brute.pq.size(); ++i)
    CHECK(ladder.pq[i] == brute.pq[i]);

  // a below-half rational with mixed digits
  Rat x(13, 30);  // [0; 2, 3, 4]
  BestApproxSequence rb = best_approximations(exact_enclosure(x), Int(1000));
  BestApproxSequence rl = best_approx_from_digits(cf_euclid(x, 10), false);
  REQUIRE(rl.pq.size() == rb.pq.size());
  for (size_t i = 0; i < rb.pq.size(); ++i) CHECK(rl.pq[i] == rb.pq[i]);
}

TEST_CASE("floor ratios reproduce the omitted digits") {
  BestApproxSequence g = best_approximations(golden_enc(), Int(10000));
  auto d = f2_floor_ratios(g.y);
  REQUIRE(d.size() >= 4);
  CHECK(d[0] == 2);
  for (size_t i = 1; i < d.size(); ++i) CHECK(d[i] == 1);
  // 1 - golden = [0; 2, 1, 1, 1, ...]: the digits of min(alpha, 1 - alpha)
  RatEnclosure flipped{Rat(1) - golden_enc().hi, Rat(1) - golden_enc().lo};
  CFExpansion ref = cf_validated(flipped, 20);
  for (size_t i = 0; i + 1 < std::min(d.size(), ref.digits.size()); ++i)
    CHECK(d[i] == ref.digits[i]);
}

TEST_CASE("floor ratio identity on below-half targets") {
  // alpha < 1/2: min(alpha, 1-alpha) = alpha, so the floors replay the digits
  Rat x(13, 30);
  BestApproxSequence b = best_approximations(exact_enclosure(x), Int(1000));
  auto d = f2_floor_ratios(b.y);
  auto ref = cf_euclid(x, 10);  // {2, 3, 4}
  REQUIRE(d.size() >= ref.size());
  for (size_t i = 0; i < ref.size(); ++i) CHECK(d[i] == ref[i]);
}

TEST_CASE("float floor ratios certify away from boundaries") {
  std::vector<double> y{1.0, 2.5, 3.3, 7.13};
  FloorRatios f = f2_floor_ratios_float(y);
  CHECK(f.digits == std::vector<long long>{2, 1, 2});
  CHECK(f.certified == 3);
  // a ratio within tol of an integer is unstable and cuts certification
  std::vector<double> edge{1.0, 2.5, 2.5 * 3.0000000001};
  FloorRatios e = f2_floor_ratios_float(edge, 1e-9);
  CHECK(e.certified == 1);
  CHECK(e.digits == std::vector<long long>{2});
  CHECK_THROWS_AS(f2_floor_ratios_float({2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("float y-sequence of a unimodular basis matches the exact ladder") {
  const double phi = 0.6180339887498948;
  Eigen::Matrix2d basis{{1.0, -phi}, {0.0, 1.0}};
  YSequence ys = f1_y_sequence(basis, 10);
  REQUIRE(ys.certified >= 6);
  std::vector<double> fib{1, 2, 3, 5, 8, 13};
  for (size_t i = 0; i < fib.size(); ++i)
    CHECK(ys.y[i] == doctest::Approx(fib[i]).epsilon(1e-9));
}

TEST_CASE("convergents rebuild the digit data") {
  std::vector<long long> d{3, 1, 4, 1, 5};
  auto pq = convergents_from_digits(d);
  REQUIRE(pq.size() == d.size());
  // continuant recursion: q_k = a_k q_{k-1} + q_{k-2}
  CHECK(pq[0].second == Int(3));
  CHECK(pq[1].second == Int(4));
  CHECK(pq[2].second == Int(19));
  CHECK(pq[3].second == Int(23));
  CHECK(pq[4].second == Int(134));
  CHECK(Rat(pq[4].first, pq[4].second) == rational_from_digits(d));

  CFExpansion e = cf_validated(exact_enclosure(rational_from_digits(d)), 20);
  CHECK(e.convergents() == pq);
}

TEST_CASE("parse_alpha covers the documented forms") {
  ParsedAlpha g = parse_alpha("golden");
  CHECK(!g.is_rational);
  CHECK(g.enc.width() > 0);
  CHECK(std::abs(g.enc.mid() - 0.6180339887) < 1e-9);
  ParsedAlpha r = parse_alpha("3/7");
  CHECK(r.is_rational);
  CHECK(r.enc.lo == Rat(3, 7));
  ParsedAlpha c = parse_alpha("cf:2,3,4");
  CHECK(c.is_rational);
  CHECK(c.enc.lo == Rat(13, 30));
  CHECK_THROWS(parse_alpha("not-a-number"));
}

TEST_CASE("pooled fractal digit statistics are deterministic and certified") {
  IFSDescription ifs = preset("cantor3");
  FractalCFReport a = fractal_cf_experiment(ifs, 20, 200, 60, 5);
  FractalCFReport b = fractal_cf_experiment(ifs, 20, 200, 60, 5);
  CHECK(a.shortfall_points == 0);
  CHECK(a.pooled.total == b.pooled.total);
  CHECK(a.pooled.sup_deviation == b.pooled.sup_deviation);
  for (int c : a.certified_per_point) CHECK(c >= 60);
  CHECK(a.pooled.total >= 20 * 60);
  // 1200 digits already land in the right ballpark
  CHECK(a.pooled.empirical[0] ==
        doctest::Approx(oracle::kDigitP[1]).epsilon(0.2));
}
