#include "fractalwalk/randwalk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fw {

namespace {

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double operator_norm_inf(const Eigen::MatrixXd& A) {
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

Eigen::MatrixXd random_rotation(int n, Rng& rng) {
  if (n == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  if (Q.determinant() < 0.0) Q.col(0) *= -1.0;
  return Q;
}

Eigen::VectorXd random_unit_vector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    nrm = v.norm();
  } while (!(nrm > 1e-12));
  return v / nrm;
}

}  // namespace

MatrixSampler make_matrix_sampler(std::vector<Eigen::MatrixXd> mats,
                                  const std::vector<double>& weights) {
  if (mats.empty()) throw std::invalid_argument("sampler needs matrices");
  if (weights.size() != mats.size()) {
    throw std::invalid_argument("one weight per matrix required");
  }
  const int dim = static_cast<int>(mats[0].rows());
  for (const auto& m : mats) {
    if (m.rows() != dim || m.cols() != dim) {
      throw std::invalid_argument("sampler matrices must share one shape");
    }
    if (!m.allFinite() || !(operator_norm_inf(m) > 0.0)) {
      throw std::invalid_argument("sampler matrix has no usable norm");
    }
  }
  MatrixSampler s;
  s.mats = std::move(mats);
  s.cumw = cumulative(weights);
  return s;
}

WalkSampler make_walk_sampler(std::vector<GroupElement> gens,
                              const std::vector<double>& weights) {
  if (gens.empty()) throw std::invalid_argument("sampler needs generators");
  if (weights.size() != gens.size()) {
    throw std::invalid_argument("one weight per generator required");
  }
  for (const auto& g : gens) {
    if (g.M != gens[0].M || g.N != gens[0].N) {
      throw std::invalid_argument("generators use different block splits");
    }
  }
  WalkSampler s;
  s.gens = std::move(gens);
  s.weights = weights;
  s.cumw = cumulative(weights);
  return s;
}

MatrixSampler rep_sampler(const WalkSampler& walk, const Representation& rep) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(walk.gens.size());
  for (const auto& g : walk.gens) mats.push_back(rep(g));
  return make_matrix_sampler(std::move(mats), walk.weights);
}

ProductLedger::ProductLedger(int dim)
    : current(Eigen::MatrixXd::Identity(dim, dim)) {}

void ProductLedger::multiply_left(const Eigen::MatrixXd& factor) {
  Eigen::MatrixXd next = factor * current;
  const double nrm = operator_norm_inf(next);
  if (!std::isfinite(nrm) || !(nrm > 0.0)) {
    throw std::runtime_error("product renormalization lost all scale");
  }
  current = next / nrm;
  log_scale += std::log(nrm);
  ++steps;
}

ProductLedger product_walk(const MatrixSampler& sampler, long long n,
                           std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("step count must be >= 0");
  ProductLedger ledger(sampler.dim());
  Rng rng(seed, 0);
  for (long long i = 0; i < n; ++i) ledger.multiply_left(sampler.draw(rng));
  return ledger;
}

ProductLedger product_walk(const WalkSampler& walk, const Representation& rep,
                           long long n, std::uint64_t seed) {
  return product_walk(rep_sampler(walk, rep), n, seed);
}

std::vector<std::pair<double, int>> LyapunovEstimate::clusters(
    double gap_tol) const {
  std::vector<std::pair<double, int>> out;
  size_t i = 0;
  while (i < exponents.size()) {
    size_t j = i + 1;
    double sum = exponents[i];
    while (j < exponents.size() &&
           exponents[j - 1] - exponents[j] <= gap_tol) {
      sum += exponents[j];
      ++j;
    }
    out.emplace_back(sum / static_cast<double>(j - i),
                     static_cast<int>(j - i));
    i = j;
  }
  return out;
}

Eigen::MatrixXd LyapunovEstimate::below_top(double gap_tol) const {
  size_t top = 1;
  while (top < exponents.size() &&
         exponents[top - 1] - exponents[top] <= gap_tol) {
    ++top;
  }
  return flag_basis.rightCols(flag_basis.cols() - static_cast<int>(top));
}

Eigen::MatrixXd LyapunovEstimate::nonpositive(double tol) const {
  int count = 0;
  for (double e : exponents) {
    if (e <= tol) ++count;
  }
  return flag_basis.rightCols(count);
}

LyapunovEstimate lyapunov_spectrum(const MatrixSampler& sampler, long long n,
                                   std::uint64_t seed, int reorth_period) {
  if (n < 1) throw std::invalid_argument("step count must be >= 1");
  if (reorth_period < 1) {
    throw std::invalid_argument("re-orthonormalization period must be >= 1");
  }
  const int dim = sampler.dim();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(dim, dim);
  std::vector<Kahan> logs(dim);
  double pending = 0.0;
  long long in_block = 0;
  Rng rng(seed, 0);

  auto flush = [&]() {
    if (in_block == 0) return;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
    Eigen::MatrixXd R =
        qr.matrixQR().triangularView<Eigen::Upper>();
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const double r = std::abs(R(i, i));
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::runtime_error("walk frame degenerated");
      }
      logs[i].add(std::log(r) + pending);
    }
    pending = 0.0;
    in_block = 0;
  };

  for (long long step = 0; step < n; ++step) {
    Q = sampler.draw(rng) * Q;
    const double nrm = Q.cwiseAbs().maxCoeff();
    if (!std::isfinite(nrm) || !(nrm > 0.0)) {
      throw std::runtime_error("walk frame lost all scale");
    }
    Q /= nrm;
    pending += std::log(nrm);
    if (++in_block >= reorth_period) flush();
  }
  flush();

  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return logs[a].sum > logs[b].sum;
  });
  LyapunovEstimate est;
  est.steps = n;
  est.reorth_period = reorth_period;
  est.exponents.resize(dim);
  est.flag_basis.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    est.exponents[i] = logs[order[i]].sum / static_cast<double>(n);
    est.flag_basis.col(i) = Q.col(order[i]);
  }
  return est;
}

LyapunovEstimate lyapunov_spectrum(const WalkSampler& walk,
                                   const Representation& rep, long long n,
                                   std::uint64_t seed, int reorth_period) {
  return lyapunov_spectrum(rep_sampler(walk, rep), n, seed, reorth_period);
}

SpectrumStats spectrum_with_error(const MatrixSampler& sampler, long long n,
                                  std::uint64_t seed, int seeds,
                                  int reorth_period) {
  if (seeds < 2) throw std::invalid_argument("need at least 2 seed streams");
  SpectrumStats stats;
  stats.n = n;
  stats.seeds = seeds;
  Rng master(seed, 1);
  const int dim = sampler.dim();
  stats.exponents.assign(dim, 0.0);
  stats.stderrs.assign(dim, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t sub = master.bits();
    LyapunovEstimate est = lyapunov_spectrum(sampler, n, sub, reorth_period);
    stats.per_seed.push_back(est.exponents);
    for (int i = 0; i < dim; ++i) stats.exponents[i] += est.exponents[i];
  }
  for (int i = 0; i < dim; ++i) {
    stats.exponents[i] /= seeds;
  }
  for (int i = 0; i < dim; ++i) {
    double var = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const double d = stats.per_seed[s][i] - stats.exponents[i];
      var += d * d;
    }
    var /= (seeds - 1);
    stats.stderrs[i] = std::sqrt(var / seeds);
  }
  return stats;
}

double dist_to_coordinate_subspace(const Eigen::VectorXd& v,
                                   const std::vector<int>& indices) {
  const double total = v.squaredNorm();
  if (!(total > 0.0)) {
    throw std::invalid_argument("zero vector has no projective class");
  }
  double inside = 0.0;
  for (int i : indices) inside += v(i) * v(i);
  const double out = std::max(0.0, 1.0 - inside / total);
  return std::sqrt(out);
}

double min_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() < 1 || B.cols() < 1 || A.rows() != B.rows()) {
    throw std::invalid_argument("principal angles need nonempty equal-height bases");
  }
  auto orth = [](const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    return Eigen::MatrixXd(qr.householderQ() *
                           Eigen::MatrixXd::Identity(X.rows(), X.cols()));
  };
  const Eigen::MatrixXd Qa = orth(A);
  const Eigen::MatrixXd Qb = orth(B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qa.transpose() * Qb);
  const double c = std::clamp(svd.singularValues()(0), -1.0, 1.0);
  return std::acos(c);
}

PositivityResult positivity_check(const WalkSampler& walk, int M, int N, int d,
                                  long long n, int trials, std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("need at least 2 trials");
  if (n < 1) throw std::invalid_argument("step count must be >= 1");
  const Representation rep = make_representation(M, N, d);
  const MatrixSampler sampler = rep_sampler(walk, rep);
  const int dim = sampler.dim();

  std::vector<std::string> labels;
  std::vector<Eigen::VectorXd> probes;
  Rng vec_rng(seed, 2);
  for (int i = 0; i < 8; ++i) {
    probes.push_back(random_unit_vector(dim, vec_rng));
    labels.push_back("random-" + std::to_string(i));
  }
  {
    std::vector<int> pos = rep.wspace.positive_indices;
    const size_t cap = 12;
    for (size_t i = 0; i < pos.size() && i < cap; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
      v(pos[i]) = 1.0;
      probes.push_back(v);
      labels.push_back("wspace-" + std::to_string(pos[i]));
    }
  }
  {
    // Directions from the estimated nonpositive flag stress the minimum.
    LyapunovEstimate est =
        lyapunov_spectrum(sampler, std::min<long long>(n, 400),
                          Rng(seed, 1).bits(), 1);
    Eigen::MatrixXd cols = est.nonpositive(1e-6);
    if (cols.cols() > 0) {
      Rng adv_rng(seed, 3);
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd c = random_unit_vector(static_cast<int>(cols.cols()),
                                               adv_rng);
        Eigen::VectorXd v = cols * c;
        const double nrm = v.norm();
        if (nrm > 1e-12) {
          probes.push_back(v / nrm);
          labels.push_back("adversarial-" + std::to_string(i));
        }
      }
    }
  }

  const size_t P = probes.size();
  std::vector<std::vector<double>> values(P);
  std::vector<int> word;
  word.reserve(static_cast<size_t>(n));
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 10 + static_cast<std::uint64_t>(t));
    word.clear();
    for (long long i = 0; i < n; ++i) {
      word.push_back(static_cast<int>(rng.pick_cumulative(walk.cumw)));
    }
    for (size_t p = 0; p < P; ++p) {
      Eigen::VectorXd v = probes[p];
      Kahan acc;
      for (long long i = 0; i < n; ++i) {
        v = sampler.mats[word[static_cast<size_t>(i)]] * v;
        const double nrm = v.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
          throw std::runtime_error("probe vector lost all scale");
        }
        acc.add(std::log(nrm));
        v /= nrm;
      }
      values[p].push_back(acc.sum / static_cast<double>(n));
    }
  }

  PositivityResult res;
  res.labels = labels;
  res.estimate = std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < P; ++p) {
    double mean = 0.0;
    for (double x : values[p]) mean += x;
    mean /= trials;
    double var = 0.0;
    for (double x : values[p]) var += (x - mean) * (x - mean);
    var /= (trials - 1);
    const double se = std::sqrt(var / trials);
    res.per_probe_mean.push_back(mean);
    res.per_probe_stderr.push_back(se);
    if (mean < res.estimate) {
      res.estimate = mean;
      res.stderr_of_min = se;
      res.argmin_label = labels[p];
    }
  }
  return res;
}

AttractionStats attraction_to_w(const WalkSampler& walk, int M, int N,
                                long long n, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("need at least 1 trial");
  if (n < 0) throw std::invalid_argument("step count must be >= 0");
  const Representation rep = make_representation(M, N, 1);
  const MatrixSampler sampler = rep_sampler(walk, rep);
  const int dim = sampler.dim();
  const std::vector<int>& pos = rep.wspace.positive_indices;

  std::vector<long long> checkpoints;
  for (int k = 0; k <= 8; ++k) {
    const long long c = (n * k) / 8;
    if (checkpoints.empty() || checkpoints.back() != c) checkpoints.push_back(c);
  }

  std::vector<std::vector<double>> dists(checkpoints.size());
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 100 + static_cast<std::uint64_t>(t));
    Eigen::VectorXd v = random_unit_vector(dim, rng);
    size_t ci = 0;
    for (long long step = 0; step <= n; ++step) {
      if (ci < checkpoints.size() && checkpoints[ci] == step) {
        dists[ci].push_back(dist_to_coordinate_subspace(v, pos));
        ++ci;
      }
      if (step == n) break;
      v = sampler.draw(rng) * v;
      const double nrm = v.norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw std::runtime_error("trial vector lost all scale");
      }
      v /= nrm;
    }
  }

  AttractionStats stats;
  stats.checkpoints = checkpoints;
  stats.trials = trials;
  for (auto& col : dists) {
    std::sort(col.begin(), col.end());
    stats.median_dist.push_back(quantile_sorted(col, 0.5));
    stats.q10.push_back(quantile_sorted(col, 0.1));
    stats.q90.push_back(quantile_sorted(col, 0.9));
  }
  // Least-squares rate of log(median) per step over usable checkpoints.
  std::vector<double> xs, ys;
  for (size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > 0 && stats.median_dist[i] > 1e-300) {
      xs.push_back(static_cast<double>(checkpoints[i]));
      ys.push_back(std::log(stats.median_dist[i]));
    }
  }
  if (xs.size() >= 2 && xs.front() != xs.back()) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    if (den > 0) {
      stats.slope = num / den;
      stats.slope_valid = true;
    }
  }
  return stats;
}

BlockOracle block_exponent_oracle(const std::vector<BlockSpec>& blocks,
                                  const std::vector<double>& weights) {
  if (blocks.empty()) throw std::invalid_argument("need at least one block");
  cumulative(weights);  // validates positivity and normalization
  for (const auto& b : blocks) {
    if (b.dim < 1) throw std::invalid_argument("block dimensions must be >= 1");
    if (b.log_factors.size() != weights.size()) {
      throw std::invalid_argument("one log factor per generator per block");
    }
  }
  BlockOracle oracle;
  for (const auto& b : blocks) {
    double mean = 0.0;
    for (size_t e = 0; e < weights.size(); ++e) {
      mean += weights[e] * b.log_factors[e];
    }
    oracle.block_means.push_back(mean);
    for (int i = 0; i < b.dim; ++i) oracle.exponents.push_back(mean);
  }
  for (size_t i = 0; i + 1 < oracle.block_means.size(); ++i) {
    if (!(oracle.block_means[i] > oracle.block_means[i + 1])) {
      oracle.hypotheses_ok = false;
    }
  }
  std::sort(oracle.exponents.begin(), oracle.exponents.end(),
            std::greater<double>());
  return oracle;
}

SyntheticWalk synthetic_block_walk(const std::vector<BlockSpec>& blocks,
                                   const std::vector<double>& weights,
                                   std::uint64_t seed, double offdiag_scale) {
  if (blocks.empty()) throw std::invalid_argument("need at least one block");
  const size_t E = weights.size();
  int dim = 0;
  for (const auto& b : blocks) {
    if (b.log_factors.size() != E) {
      throw std::invalid_argument("one log factor per generator per block");
    }
    dim += b.dim;
  }
  std::vector<Eigen::MatrixXd> mats;
  for (size_t e = 0; e < E; ++e) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    int off = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
      Rng rot_rng(seed, 50 + 64 * i + e);
      const int s = blocks[i].dim;
      m.block(off, off, s, s) =
          std::exp(blocks[i].log_factors[e]) * random_rotation(s, rot_rng);
      off += s;
    }
    Rng noise_rng(seed, 7000 + e);
    int row_off = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
      int col_off = row_off + blocks[i].dim;
      for (size_t j = i + 1; j < blocks.size(); ++j) {
        for (int r = 0; r < blocks[i].dim; ++r) {
          for (int c = 0; c < blocks[j].dim; ++c) {
            m(row_off + r, col_off + c) = offdiag_scale * noise_rng.normal();
          }
        }
        col_off += blocks[j].dim;
      }
      row_off += blocks[i].dim;
    }
    mats.push_back(m);
  }
  SyntheticWalk walk;
  walk.sampler = make_matrix_sampler(std::move(mats), weights);
  walk.blocks = blocks;
  walk.weights = weights;
  walk.dim = dim;
  return walk;
}

}  // namespace fw
