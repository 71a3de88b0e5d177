#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fractalwalk/groups.hpp"
#include "fractalwalk/rng.hpp"

namespace fw {

// Weighted sampler over raw matrices, the engine under every walk. Matrices
// are validated at construction: finite entries, positive norm.
struct MatrixSampler {
  std::vector<Eigen::MatrixXd> mats;
  std::vector<double> cumw;

  int dim() const {
    return mats.empty() ? 0 : static_cast<int>(mats[0].rows());
  }
  const Eigen::MatrixXd& draw(Rng& rng) const {
    return mats[rng.pick_cumulative(cumw)];
  }
};

MatrixSampler make_matrix_sampler(std::vector<Eigen::MatrixXd> mats,
                                  const std::vector<double>& weights);

// Weighted sampler over group elements.
struct WalkSampler {
  std::vector<GroupElement> gens;
  std::vector<double> weights;
  std::vector<double> cumw;

  const GroupElement& draw(Rng& rng) const {
    return gens[rng.pick_cumulative(cumw)];
  }
};

WalkSampler make_walk_sampler(std::vector<GroupElement> gens,
                              const std::vector<double>& weights);

// Sampler whose matrices are the representation applied to each generator.
MatrixSampler rep_sampler(const WalkSampler& walk, const Representation& rep);

// Left product with per-step rescaling: exp(log_scale) * current equals the
// product of all factors applied so far, newest factor leftmost. The scale
// pulled out is the max-row-sum operator norm, so the projective action is
// untouched.
struct ProductLedger {
  Eigen::MatrixXd current;
  double log_scale = 0.0;
  long long steps = 0;

  explicit ProductLedger(int dim);
  void multiply_left(const Eigen::MatrixXd& factor);
};

ProductLedger product_walk(const WalkSampler& walk, const Representation& rep,
                           long long n, std::uint64_t seed);
ProductLedger product_walk(const MatrixSampler& sampler, long long n,
                           std::uint64_t seed);

// Forward-frame estimate of the full Lyapunov spectrum: orthonormal frame
// advanced by each factor, log diagonal stretches accumulated in compensated
// summation, re-orthonormalized every reorth_period steps.
struct LyapunovEstimate {
  std::vector<double> exponents;  // descending
  Eigen::MatrixXd flag_basis;     // columns ordered with exponents
  long long steps = 0;
  int reorth_period = 1;

  // Groups exponents whose gaps are below gap_tol; (mean, multiplicity).
  std::vector<std::pair<double, int>> clusters(double gap_tol) const;
  // Estimated span of all non-top directions (columns past the top cluster).
  Eigen::MatrixXd below_top(double gap_tol) const;
  // Estimated span of the directions with exponent <= tol.
  Eigen::MatrixXd nonpositive(double tol) const;
};

LyapunovEstimate lyapunov_spectrum(const MatrixSampler& sampler, long long n,
                                   std::uint64_t seed, int reorth_period = 1);
LyapunovEstimate lyapunov_spectrum(const WalkSampler& walk,
                                   const Representation& rep, long long n,
                                   std::uint64_t seed, int reorth_period = 1);

// Spectrum averaged over independent seed streams, with per-exponent
// standard error across the streams.
struct SpectrumStats {
  std::vector<double> exponents;
  std::vector<double> stderrs;
  std::vector<std::vector<double>> per_seed;
  long long n = 0;
  int seeds = 0;
};

SpectrumStats spectrum_with_error(const MatrixSampler& sampler, long long n,
                                  std::uint64_t seed, int seeds,
                                  int reorth_period = 1);

// Monte Carlo estimate of the n-step growth rate min over probe vectors v of
// mean (1/n) log ||product * v||. Probes: random unit vectors, the positive
// weight-space coordinate vectors, and directions drawn from the estimated
// nonpositive flag.
struct PositivityResult {
  double estimate = 0.0;  // minimum over probes of the per-probe mean
  double stderr_of_min = 0.0;
  std::string argmin_label;
  std::vector<std::string> labels;
  std::vector<double> per_probe_mean;
  std::vector<double> per_probe_stderr;
};

PositivityResult positivity_check(const WalkSampler& walk, int M, int N, int d,
                                  long long n, int trials, std::uint64_t seed);

// Distance of a projective class to the span of a coordinate index set:
// sine of the principal angle, computed as the mass outside the indices.
double dist_to_coordinate_subspace(const Eigen::VectorXd& v,
                                   const std::vector<int>& indices);

// Smallest principal angle between the column spans (radians).
double min_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Decay of dist([Ad(product) v], [W]) for random unit v, tracked at evenly
// spaced checkpoints; slope is the least-squares rate of log(median) per step.
struct AttractionStats {
  std::vector<long long> checkpoints;
  std::vector<double> median_dist;
  std::vector<double> q10;
  std::vector<double> q90;
  double slope = 0.0;
  bool slope_valid = false;
  int trials = 0;
};

AttractionStats attraction_to_w(const WalkSampler& walk, int M, int N,
                                long long n, int trials, std::uint64_t seed);

// Closed-form exponents of an upper block-triangular walk whose i-th
// diagonal block is a similarity with per-generator log factor
// log_factors[e]: the weighted mean of each block's factors, with the block
// dimension as multiplicity.
struct BlockSpec {
  int dim = 1;
  std::vector<double> log_factors;  // one per generator
};

struct BlockOracle {
  std::vector<double> exponents;  // multiset, descending
  std::vector<double> block_means;
  bool hypotheses_ok = true;  // strict per-realization domination of blocks
};

BlockOracle block_exponent_oracle(const std::vector<BlockSpec>& blocks,
                                  const std::vector<double>& weights);

// Synthetic upper block-triangular sampler realizing a BlockSpec list:
// diagonal block i of generator e is exp(log_factors[e]) times a fixed
// seeded rotation, off-diagonal blocks filled with seeded noise.
struct SyntheticWalk {
  MatrixSampler sampler;
  std::vector<BlockSpec> blocks;
  std::vector<double> weights;
  int dim = 0;
};

SyntheticWalk synthetic_block_walk(const std::vector<BlockSpec>& blocks,
                                   const std::vector<double>& weights,
                                   std::uint64_t seed,
                                   double offdiag_scale = 0.5);

}  // namespace fw
