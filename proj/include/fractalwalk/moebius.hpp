#pragma once
#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "fractalwalk/ifs.hpp"
#include "fractalwalk/rational.hpp"

namespace fw {

// 2x2 real matrix up to scalar, acting by fractional linear maps.  When
// integer_flag is set, int_entries holds an exact representative with
// determinant +-1.
struct MoebiusMap {
  Eigen::Matrix2d m;
  bool integer_flag = false;
  std::array<long long, 4> int_entries{0, 0, 0, 0};  // row major a,b,c,d
  double det() const { return m.determinant(); }
};

// boundary action on R u {infinity}; the pole maps to infinity (nullopt)
std::optional<Rat> apply_moebius(const std::array<Int, 4>& g,
                                 const std::optional<Rat>& x);
double apply_moebius(const Eigen::Matrix2d& g, double x);  // inf not handled

// upper half-plane action; det < 0 acts through the conjugate
std::complex<double> apply_moebius_h(const Eigen::Matrix2d& g,
                                     std::complex<double> z);

double hyperbolic_distance(std::complex<double> z, std::complex<double> w);

// x -> 1/(n + x) for n = 1..N, matrices [[0,1],[1,n]].  N = 1 is allowed but
// degenerate (single map, one-point attractor).
std::vector<MoebiusMap> fn_preset(int N);

// Exact image of [0,1] under the coding composite phi_{b_1} o ... o phi_{b_k}
// of the branch system x -> 1/(n+x); symbols are 0-based.
RatEnclosure fn_word_interval(const std::vector<int>& symbols, int N);

// exact integer representatives of maps whose integer_flag is set
std::vector<std::array<Int, 4>> integer_matrices(
    const std::vector<MoebiusMap>& maps);

struct ReductionStep {
  char kind;     // 'T' (translate by n) or 'S' (inversion -1/z)
  long long n;   // translation amount; 0 for S
};

struct ReducedPoint {
  std::complex<double> z;            // in the closed standard domain
  std::vector<ReductionStep> word;   // applied left to right maps input to z
  int steps;
};

// standard |Re z| <= 1/2, |z| >= 1 reduction
ReducedPoint reduce_to_fundamental_domain(std::complex<double> z,
                                          int max_steps = 20000);

// Height series of the coding orbit: for k <= n, the hyperbolic distance of
// the reduced point of (phi_{b_1} o ... o phi_{b_k})(i) to i.  Distance to i
// after reduction differs from true distance to the lattice orbit of i by at
// most the diameter of the fundamental-domain neighborhood of i; bounded
// versus unbounded classification is unaffected.
// The orbit is evaluated exactly: integer matrix products, a rational stand-in
// for the conjugation offset, and rational fundamental-domain reduction, so
// no precision is lost to the hyperbolic metric's exponential sensitivity.
// conj_offset = 0 means no conjugation; maps must carry integer
// representatives.
struct UrProbeResult {
  std::vector<double> heights;
  double max_height;
};
UrProbeResult ur_probe(const std::vector<MoebiusMap>& maps, const Word& word,
                       const Rat& conj_offset = Rat(0));

// Routes an F_N word through certified digit extraction: the coded point's
// continued-fraction digits must equal the word's symbols in coding order
// (hence all <= N).
struct QuotientCheckResult {
  std::vector<long long> digits;  // certified digits of the coded point
  int certified;
  bool digits_match_word;         // digits == 1-based symbols prefix
  bool all_within_branch_count;
  bool shortfall;                 // no digit could be certified
};
QuotientCheckResult bounded_quotient_check(const Word& word, int N, int depth);

std::vector<MoebiusMap> load_moebius_file(const std::string& path);

}  // namespace fw
