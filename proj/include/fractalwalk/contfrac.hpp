#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fractalwalk/ifs.hpp"
#include "fractalwalk/rational.hpp"

namespace fw {

// Certified partial quotients of a real target known through an enclosure.
// Only digits provable for every point of the enclosure are reported.
struct CFExpansion {
  std::vector<long long> digits;
  bool terminated = false;  // exact rational whose expansion completed
  int certified_length() const { return int(digits.size()); }
  std::vector<std::pair<Int, Int>> convergents() const;
};

// Canonical Euclidean expansion of a rational in [0,1): x = [0; a1, a2, ...],
// final digit >= 2 except for x = 0 (empty).  Truncated at max_digits.
std::vector<long long> cf_euclid(Rat x, int max_digits);

// Longest common certified prefix over the whole interval; conservative at
// cylinder boundaries.  Intervals touching 0 or containing points >= 1
// certify zero digits rather than erroring.
CFExpansion cf_validated(const RatEnclosure& x, int max_digits = 1000);

struct GaussOrbit {
  std::vector<RatEnclosure> iterates;  // starts with the input
  std::vector<long long> digit_reads;  // floor(1/x_k) when certifiable
  int certified;                       // number of certified digit reads
  bool terminated;                     // hit 0 exactly (rational input)
};
GaussOrbit gauss_orbit(const RatEnclosure& alpha, int n);

// P(k) = log2((k+1)^2 / (k (k+2))): mass the invariant density gives digit k.
double gauss_digit_probability(int k);

struct DigitHistogram {
  int k_max;
  long long total;
  std::vector<long long> counts;   // counts[k] for k = 1..k_max; [0] unused
  long long tail_count;            // digits > k_max
  std::vector<double> empirical;   // k = 1..k_max then tail, length k_max+1
  std::vector<double> reference;   // same layout
  double sup_deviation;            // max abs difference over the k_max+1 bins
  long long max_digit;
};
DigitHistogram digit_frequencies(const std::vector<long long>& digits,
                                 int k_max);

// Best approximations in the lattice u_alpha Z^2: points (p - q alpha, q),
// q >= 1, where |p - q alpha| strictly beats every smaller q and the nearest
// p is unique.  Exhaustive over q <= q_max; certification stops at the first
// comparison the enclosure cannot decide.
struct BestApproxSequence {
  std::vector<std::pair<Int, Int>> pq;  // (p, q), q strictly increasing
  std::vector<Rat> y;                   // q's rescaled so y[0] = 1
  int certified;                        // entries proven over the enclosure
  bool exhausted;  // rational target: exact hit reached, list complete
};
BestApproxSequence best_approximations(const RatEnclosure& alpha,
                                       const Int& q_max);

// Same sequence built from certified partial quotients via the convergent
// ladder q_{n+1} = a_{n+1} q_n + q_{n-1} (duplicate q = 1 collapsed, ties
// dropped).  Agrees with the exhaustive scan on certified ranges.
BestApproxSequence best_approx_from_digits(const std::vector<long long>& digits,
                                           bool alpha_above_half);

// Floor ratios floor(y_{n+1}/y_n) of a strictly increasing sequence.
std::vector<long long> f2_floor_ratios(const std::vector<Rat>& y);
struct FloorRatios {
  std::vector<long long> digits;
  int certified;  // prefix length where the floor is stable under tol
};
FloorRatios f2_floor_ratios_float(const std::vector<double>& y,
                                  double tol = 1e-9);

// Ascending second coordinates of best approximations of a planar lattice
// given by an arbitrary unimodular basis (float path; certification by
// tolerance gaps).  Entries with xi2 >= 1 only, rescaled to start at 1.
struct YSequence {
  std::vector<double> y;
  int certified;
};
YSequence f1_y_sequence(const Eigen::Matrix2d& basis, int count,
                        double xi2_cap = 1e7, double tol = 1e-9);

struct FractalCFReport {
  int n_points;
  int requested_digits;
  int initial_depth;
  int max_depth_used;
  std::vector<int> certified_per_point;
  int shortfall_points;  // points below requested_digits after deepening
  DigitHistogram pooled;
};
FractalCFReport fractal_cf_experiment(const IFSDescription& ifs, int n_points,
                                      int depth, int digits_per_point,
                                      uint64_t seed, int k_max = 10,
                                      int depth_cap = 3000);

}  // namespace fw
