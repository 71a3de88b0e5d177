#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fractalwalk/ifs.hpp"
#include "fractalwalk/randwalk.hpp"
#include "fractalwalk/rational.hpp"

namespace fw {

// Unimodular lattice: columns generate, |det| rescaled to 1.
struct LatticeBasis {
  Eigen::MatrixXd basis;

  int dim() const { return static_cast<int>(basis.rows()); }
};

LatticeBasis make_lattice(const Eigen::MatrixXd& m);

// Same lattice, shorter basis: exact two-dimensional reduction when D = 2,
// size-reduction with neighbor swaps otherwise.
LatticeBasis reduce_basis(const LatticeBasis& b);

// Exact shortest nonzero vector length, by enumeration inside a radius
// derived from the reduced basis.
double systole(const LatticeBasis& b);

// Upper bound 2 / vol(unit ball)^{1/D} on the systole of any unimodular
// lattice in dimension D.
double minkowski_bound(int D);

// Systole along the diagonal-flow orbit of the lattice twisted by alpha.
struct FlowTrace {
  Eigen::MatrixXd alpha;
  int M = 1;
  int N = 1;
  std::vector<double> times;
  std::vector<double> systoles;
};

FlowTrace flow_trace(const Eigen::MatrixXd& alpha, int M, int N, double t_max,
                     double dt);

// Exact scalar path (M = N = 1). The minimum over the lattice at each time
// is taken over the certified best-approximation pairs of alpha, so the
// trace stays sound at flow times far beyond double resolution, where the
// float path would fabricate short vectors. Throws std::domain_error when
// the enclosure cannot certify candidates across the whole window.
FlowTrace flow_trace(const RatEnclosure& alpha, double t_max, double dt);

// Systole along the random-walk orbit started at the integer lattice; entry
// k is the systole after k steps. The basis is reduced after every step so
// entries stay representable.
std::vector<double> walk_systole_series(const WalkSampler& walk, long long n,
                                        std::uint64_t seed);

// Consistency check between the length-n walk product and its predicted
// factorization u_{beta} a_t k u_{-pi}: the a-part as the sum of the
// per-letter a-parts, the k-part as the product of the per-letter k-parts,
// and the two unipotent parameters as coded points of the full word and of
// the word with its first n letters removed. Every right-hand ingredient is
// computed independently of the left-hand product.
struct IdentityCheck {
  double rel_error = 0.0;   // max-entry discrepancy over the product scale
  double budget_rel = 0.0;  // coding radii plus roundoff allowance
  double t_n = 0.0;
  int n = 0;
  bool pass = false;
};

// word must be longer than n; the surplus letters are the coding tail.
// Throws std::domain_error when the coding radii cannot certify rel_tol.
IdentityCheck walk_flow_identity_check(const IFSDescription& ifs,
                                       const Word& word, int n, int M, int N,
                                       double rel_tol = 1e-9);

// Badly-approximable evidence: minimum of ||q||^{N/M} dist(alpha q, Z^M)
// over integer q with 0 < ||q||_inf <= q_max. c_tail restricts the minimum
// to ||q|| in (q_max/10, q_max], the scale-local version that does not
// remember small-q flukes.
struct BaResult {
  double c_min = 0.0;
  std::vector<Int> argmin_q;
  double c_tail = 0.0;
  bool exact = false;        // input was exactly rational
  double uncertainty = 0.0;  // interval slack in the reported minima
  Int q_max;
};

BaResult ba_test_direct(const RatEnclosure& alpha, const Int& q_max);
BaResult ba_test_direct(const std::vector<std::vector<Rat>>& alpha, int M,
                        int N, const Int& q_max);

// Dirichlet-improvability evidence: for each Q, does some 0 < ||q|| <= Q
// satisfy dist(alpha q, Z^M) <= lambda Q^{-N/M}? verdict: 1 pass, 0 fail,
// -1 undecidable at the enclosure width.
struct DiVerdict {
  Int Q;
  int verdict = -1;
  double margin = 0.0;  // threshold minus best distance, in doubles
};

std::vector<DiVerdict> di_test(const RatEnclosure& alpha, const Rat& lambda,
                               const std::vector<Int>& Q_list);
std::vector<DiVerdict> di_test(const std::vector<std::vector<Rat>>& alpha,
                               int M, int N, const Rat& lambda,
                               const std::vector<Int>& Q_list);

// Observational equidistribution diagnostics for a systole series: Birkhoff
// means of the indicators 1{systole < s} on a grid of s, split-half
// agreement, batch-means error bars, and the fraction of time spent below
// the escape threshold 0.05.
struct EquidistReport {
  std::vector<double> s_grid;
  std::vector<double> means;
  std::vector<double> first_half;
  std::vector<double> second_half;
  std::vector<double> batch_stderr;
  bool split_stable = false;
  double escape_fraction = 0.0;
  std::size_t length = 0;
};

EquidistReport equidist_diagnostics(const std::vector<double>& systoles,
                                    std::vector<double> s_grid = {});

// Row-style Hermite normal form of the lattice generated by the columns;
// canonical, so two integer bases generate the same lattice iff their forms
// match.
std::vector<std::vector<Int>> hermite_normal_form(
    const std::vector<std::vector<Int>>& columns);

// Random product of elementary integer column operations; |det| = 1.
Eigen::MatrixXd random_unimodular(int D, Rng& rng, int ops = 12);

}  // namespace fw
