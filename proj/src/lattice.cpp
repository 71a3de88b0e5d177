#include "fractalwalk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "fractalwalk/contfrac.hpp"
#include "fractalwalk/groups.hpp"

namespace fw {

namespace {

constexpr double kEscapeThreshold = 0.05;

void lagrange_reduce(Eigen::MatrixXd& B) {
  Eigen::VectorXd b1 = B.col(0), b2 = B.col(1);
  for (int guard = 0; guard < 10000; ++guard) {
    if (b1.squaredNorm() > b2.squaredNorm()) std::swap(b1, b2);
    const double mu = std::round(b2.dot(b1) / b1.squaredNorm());
    if (mu == 0.0) break;
    b2 -= mu * b1;
  }
  if (b1.squaredNorm() > b2.squaredNorm()) std::swap(b1, b2);
  B.col(0) = b1;
  B.col(1) = b2;
}

void lll_reduce(Eigen::MatrixXd& B, double delta = 0.99) {
  const int D = static_cast<int>(B.cols());
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(D, D);
  Eigen::VectorXd star2 = Eigen::VectorXd::Zero(D);
  Eigen::MatrixXd star = B;

  auto gram_schmidt = [&]() {
    for (int i = 0; i < D; ++i) {
      star.col(i) = B.col(i);
      for (int j = 0; j < i; ++j) {
        mu(i, j) = B.col(i).dot(star.col(j)) / star2(j);
        star.col(i) -= mu(i, j) * star.col(j);
      }
      star2(i) = star.col(i).squaredNorm();
      if (!(star2(i) > 0.0)) {
        throw std::invalid_argument("basis is numerically singular");
      }
    }
  };

  gram_schmidt();
  int k = 1;
  for (int guard = 0; k < D && guard < 100000; ++guard) {
    for (int j = k - 1; j >= 0; --j) {
      const double q = std::round(mu(k, j));
      if (q != 0.0) {
        B.col(k) -= q * B.col(j);
      }
    }
    gram_schmidt();
    if (star2(k) >= (delta - mu(k, k - 1) * mu(k, k - 1)) * star2(k - 1)) {
      ++k;
    } else {
      B.col(k).swap(B.col(k - 1));
      gram_schmidt();
      k = std::max(1, k - 1);
    }
  }
}

// Visits every integer coefficient vector c with |c_i| <= bound_i, c != 0,
// first nonzero entry positive.
void visit_half_box(const std::vector<long long>& bounds,
                    const std::function<void(const std::vector<long long>&)>&
                        visit) {
  const size_t D = bounds.size();
  std::vector<long long> c(D, 0);
  std::function<void(size_t, bool)> rec = [&](size_t i, bool leading_zero) {
    if (i == D) {
      if (!leading_zero) visit(c);
      return;
    }
    const long long lo = leading_zero ? 0 : -bounds[i];
    for (long long v = lo; v <= bounds[i]; ++v) {
      c[i] = v;
      rec(i + 1, leading_zero && v == 0);
    }
    c[i] = 0;
  };
  rec(0, true);
}

double shortest_from_reduced(const Eigen::MatrixXd& B) {
  const int D = static_cast<int>(B.cols());
  double R2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < D; ++i) R2 = std::min(R2, B.col(i).squaredNorm());
  const double R = std::sqrt(R2);
  const Eigen::MatrixXd Binv = B.inverse();
  std::vector<long long> bounds(D);
  double count = 1.0;
  for (int i = 0; i < D; ++i) {
    bounds[i] = static_cast<long long>(
        std::floor(R * Binv.row(i).norm() + 1e-9));
    count *= 2.0 * bounds[i] + 1.0;
  }
  if (count > 3e6) {
    throw std::runtime_error("systole enumeration box too large");
  }
  double best2 = R2;
  Eigen::VectorXd x(D);
  visit_half_box(bounds, [&](const std::vector<long long>& c) {
    x.setZero();
    for (int i = 0; i < D; ++i) {
      if (c[i] != 0) x += static_cast<double>(c[i]) * B.col(i);
    }
    best2 = std::min(best2, x.squaredNorm());
  });
  return std::sqrt(best2);
}

Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

Rat dist_to_int(const Rat& x) {
  const Int n = floor_rat(x + Rat(1, 2));
  return rat_abs(x - Rat(n));
}

struct DistInt {
  Rat lo, hi;
};

// Range of dist(x, Z) over x in [a, b].
DistInt dist_interval(const Rat& a, const Rat& b) {
  if (b - a >= 1) return {Rat(0), Rat(1, 2)};
  const Rat da = dist_to_int(a), db = dist_to_int(b);
  const bool has_int = floor_rat(b) >= -floor_rat(-a);
  DistInt out;
  out.lo = has_int ? Rat(0) : std::min(da, db);
  const Int A = -floor_rat(-(2 * a));
  const Int B = floor_rat(2 * b);
  bool has_half = false;
  if (B >= A) {
    has_half = (A % 2 != 0) || (B > A);
  }
  out.hi = has_half ? Rat(1, 2) : std::max(da, db);
  return out;
}

Rat rat_pow(const Rat& x, int e) {
  Rat out(1);
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

std::vector<double> default_s_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(0.1 * i);
  return g;
}

}  // namespace

LatticeBasis make_lattice(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("lattice basis must be square");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("lattice basis has non-finite entries");
  }
  LatticeBasis b;
  b.basis = m;
  det_normalize(b.basis);
  return b;
}

LatticeBasis reduce_basis(const LatticeBasis& b) {
  LatticeBasis out = b;
  if (out.dim() == 1) return out;
  if (out.dim() == 2) {
    lagrange_reduce(out.basis);
  } else {
    lll_reduce(out.basis);
  }
  return out;
}

double systole(const LatticeBasis& b) {
  const LatticeBasis red = reduce_basis(b);
  return shortest_from_reduced(red.basis);
}

double minkowski_bound(int D) {
  if (D < 1) throw std::invalid_argument("dimension must be >= 1");
  const double ball =
      std::pow(M_PI, D / 2.0) / std::tgamma(D / 2.0 + 1.0);
  return 2.0 / std::pow(ball, 1.0 / D);
}

FlowTrace flow_trace(const Eigen::MatrixXd& alpha, int M, int N, double t_max,
                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (t_max < 0.0) throw std::invalid_argument("t_max must be >= 0");
  FlowTrace tr;
  tr.alpha = alpha;
  tr.M = M;
  tr.N = N;
  const Eigen::MatrixXd u = unipotent_u(alpha, M, N).m;
  const long long K = static_cast<long long>(std::floor(t_max / dt + 1e-9));
  for (long long k = 0; k <= K; ++k) {
    const double t = k * dt;
    tr.times.push_back(t);
    tr.systoles.push_back(systole(make_lattice(flow_a(t, M, N).m * u)));
  }
  return tr;
}

FlowTrace flow_trace(const RatEnclosure& alpha, double t_max, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (t_max < 0.0) throw std::invalid_argument("t_max must be >= 0");

  // Any vector with e^{-t} q above the planar Minkowski bound is never the
  // minimum, so candidates with larger q are irrelevant over the window.
  const double q_cap = std::exp(t_max) * minkowski_bound(2) * 1.001;

  CFExpansion cf = cf_validated(alpha, 400);
  auto conv = convergents_from_digits(cf.digits);
  conv.insert(conv.begin(), {{Int(0), Int(1)}, {Int(1), Int(1)}});
  struct Cand {
    double d;  // |q alpha - p|
    double q;
  };
  std::vector<Cand> cands;
  bool truncated = false;
  for (const auto& [p, q] : conv) {
    if (to_double(Rat(q)) > q_cap) {
      truncated = true;
      break;
    }
    Rat lo = Rat(q) * alpha.lo - Rat(p);
    Rat hi = Rat(q) * alpha.hi - Rat(p);
    Rat d = lo >= 0 ? lo : (hi <= 0 ? Rat(-hi) : Rat(0));
    cands.push_back({to_double(d), to_double(Rat(q))});
  }
  // A rational target ends its expansion with an exact lattice hit, which
  // dominates every larger q.  Otherwise the candidate list is complete for
  // the window iff the first uncertified convergent denominator provably
  // exceeds the cap: q_next = a_next q_k + q_{k-1} with a_next at least
  // floor(1/hi) of the residual enclosure after the certified digits.
  if (!truncated && !cf.terminated) {
    Rat rlo = alpha.lo, rhi = alpha.hi;
    for (long long a : cf.digits) {
      Rat nlo = Rat(1) / rhi - a;
      Rat nhi = Rat(1) / rlo - a;
      rlo = nlo < 0 ? Rat(0) : nlo;
      rhi = nhi;
    }
    bool sound = false;
    if (rhi <= 0) {
      sound = true;  // residual pinned at an exact hit
    } else {
      Int a_min = floor_rat(Rat(1) / rhi);
      if (a_min < 1) a_min = 1;
      const size_t k = cf.digits.size();
      auto raw = convergents_from_digits(cf.digits);
      Int qk = k >= 1 ? raw[k - 1].second : Int(1);
      Int qkm1 = k >= 2 ? raw[k - 2].second : (k == 1 ? Int(1) : Int(0));
      sound = to_double(Rat(a_min * qk + qkm1)) > q_cap;
    }
    if (!sound)
      throw std::domain_error(
          "flow window outruns the certified digits of the target");
  }

  FlowTrace tr;
  tr.alpha = Eigen::MatrixXd::Constant(1, 1, to_double(alpha.mid()));
  tr.M = 1;
  tr.N = 1;
  const long long K = static_cast<long long>(std::floor(t_max / dt + 1e-9));
  for (long long k = 0; k <= K; ++k) {
    const double t = k * dt;
    const double et = std::exp(t), emt = std::exp(-t);
    double best = et;  // the q = 0 vector (1, 0)
    for (const auto& c : cands)
      best = std::min(best, std::hypot(et * c.d, emt * c.q));
    tr.times.push_back(t);
    tr.systoles.push_back(best);
  }
  return tr;
}

std::vector<double> walk_systole_series(const WalkSampler& walk, long long n,
                                        std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("step count must be >= 0");
  const int D = walk.gens[0].dim();
  LatticeBasis B = make_lattice(Eigen::MatrixXd::Identity(D, D));
  std::vector<double> series;
  series.reserve(static_cast<size_t>(n) + 1);
  series.push_back(systole(B));
  Rng rng(seed, 0);
  for (long long i = 0; i < n; ++i) {
    const GroupElement& g = walk.draw(rng);
    B = reduce_basis(make_lattice(g.m * B.basis));
    series.push_back(systole(B));
  }
  return series;
}

IdentityCheck walk_flow_identity_check(const IFSDescription& ifs,
                                       const Word& word, int n, int M, int N,
                                       double rel_tol) {
  if (n < 0) throw std::invalid_argument("prefix length must be >= 0");
  if (static_cast<int>(word.symbols.size()) <= n) {
    throw std::invalid_argument("word must extend past the checked prefix");
  }
  const std::vector<GroupElement> gens = walk_generators(ifs, M, N);
  std::vector<AKUDecomposition> parts;
  parts.reserve(gens.size());
  for (const auto& g : gens) parts.push_back(aku_decompose(g));

  GroupElement lhs = group_identity(M, N);
  double t_n = 0.0;
  Eigen::MatrixXd k_n = Eigen::MatrixXd::Identity(M + N, M + N);
  for (int i = 0; i < n; ++i) {
    const int e = word.symbols[static_cast<size_t>(i)];
    if (e < 0 || e >= static_cast<int>(gens.size())) {
      throw std::invalid_argument("word symbol out of range");
    }
    lhs = group_mul(gens[static_cast<size_t>(e)], lhs);
    t_n += parts[static_cast<size_t>(e)].t;
    k_n = parts[static_cast<size_t>(e)].k * k_n;
  }

  const CodedPoint pi_b = coding_point(ifs, word);
  Word tail;
  tail.symbols.assign(word.symbols.begin() + n, word.symbols.end());
  const CodedPoint beta = coding_point(ifs, tail);

  const Eigen::MatrixXd left = unipotent_u(beta.value, M, N).m;
  const Eigen::MatrixXd mid = flow_a(t_n, M, N).m * k_n;
  const Eigen::MatrixXd right = unipotent_u(-pi_b.value, M, N).m;
  const Eigen::MatrixXd rhs = left * mid * right;

  const double scale = std::max(1.0, lhs.m.cwiseAbs().maxCoeff());
  const double plus = (lhs.m - rhs).cwiseAbs().maxCoeff();
  const double minus = (lhs.m + rhs).cwiseAbs().maxCoeff();
  const double disc = std::min(plus, minus);

  auto op_norm = [](const Eigen::MatrixXd& A) {
    return A.cwiseAbs().rowwise().sum().maxCoeff();
  };
  const double budget_abs = pi_b.error_radius * op_norm(left * mid) +
                            beta.error_radius * op_norm(mid * right) +
                            (n + 10) * 1e-15 * scale;

  IdentityCheck out;
  out.n = n;
  out.t_n = t_n;
  out.rel_error = disc / scale;
  out.budget_rel = budget_abs / scale;
  if (out.budget_rel > rel_tol) {
    throw std::domain_error(
        "coding radii too large to certify the requested tolerance");
  }
  out.pass = out.rel_error <= rel_tol;
  return out;
}

BaResult ba_test_direct(const RatEnclosure& alpha, const Int& q_max) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  if (q_max > Int(2000000)) {
    throw std::invalid_argument("q_max too large for the scalar scan");
  }
  const Int tail_start = q_max / 10;
  BaResult res;
  res.q_max = q_max;
  res.exact = alpha.exact();
  Rat best_lo, best_hi;
  Rat tail_lo, tail_hi;
  bool have_best = false, have_tail = false;
  Int best_q = 0;
  for (Int q = 1; q <= q_max; ++q) {
    const Rat rq(q);
    const DistInt d = dist_interval(alpha.lo * rq, alpha.hi * rq);
    const Rat clo = d.lo * rq;
    const Rat chi = d.hi * rq;
    if (!have_best || clo < best_lo) {
      best_lo = clo;
      best_hi = chi;
      best_q = q;
      have_best = true;
    }
    if (q > tail_start && (!have_tail || clo < tail_lo)) {
      tail_lo = clo;
      tail_hi = chi;
      have_tail = true;
    }
  }
  res.c_min = to_double(best_lo);
  res.argmin_q = {best_q};
  res.c_tail = have_tail ? to_double(tail_lo) : res.c_min;
  double unc = to_double(best_hi - best_lo);
  if (have_tail) unc = std::max(unc, to_double(tail_hi - tail_lo));
  res.uncertainty = unc;
  return res;
}

BaResult ba_test_direct(const std::vector<std::vector<Rat>>& alpha, int M,
                        int N, const Int& q_max) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  if (static_cast<int>(alpha.size()) != M) {
    throw std::invalid_argument("alpha must have M rows");
  }
  for (const auto& row : alpha) {
    if (static_cast<int>(row.size()) != N) {
      throw std::invalid_argument("alpha must have N columns");
    }
  }
  const long long qm = static_cast<long long>(q_max);
  double count = 1.0;
  for (int i = 0; i < N; ++i) count *= 2.0 * static_cast<double>(qm) + 1.0;
  if (count > 2e7) {
    throw std::invalid_argument("q_max too large for the matrix scan");
  }
  const long long tail_start = qm / 10;
  const double exponent = static_cast<double>(N) / M;

  BaResult res;
  res.q_max = q_max;
  res.exact = true;
  double best_c = std::numeric_limits<double>::infinity();
  double tail_c = std::numeric_limits<double>::infinity();
  std::vector<Int> best_q;
  std::vector<long long> bounds(static_cast<size_t>(N), qm);
  visit_half_box(bounds, [&](const std::vector<long long>& q) {
    long long norm = 0;
    for (long long v : q) norm = std::max(norm, std::llabs(v));
    Rat dist(0);
    for (int i = 0; i < M; ++i) {
      Rat x(0);
      for (int j = 0; j < N; ++j) x += alpha[static_cast<size_t>(i)]
                                           [static_cast<size_t>(j)] * q[static_cast<size_t>(j)];
      dist = std::max(dist, dist_to_int(x));
    }
    const double c =
        std::pow(static_cast<double>(norm), exponent) * to_double(dist);
    if (c < best_c) {
      best_c = c;
      best_q.assign(q.begin(), q.end());
    }
    if (norm > tail_start) tail_c = std::min(tail_c, c);
  });
  res.c_min = best_c;
  res.argmin_q = best_q;
  res.c_tail = std::isfinite(tail_c) ? tail_c : best_c;
  res.uncertainty = 0.0;
  return res;
}

std::vector<DiVerdict> di_test(const RatEnclosure& alpha, const Rat& lambda,
                               const std::vector<Int>& Q_list) {
  if (!(lambda > 0) || lambda > 1) {
    throw std::invalid_argument("lambda must lie in (0, 1]");
  }
  if (Q_list.empty()) throw std::invalid_argument("Q list is empty");
  std::vector<Int> sorted = Q_list;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() < 1) throw std::invalid_argument("Q must be >= 1");
  if (sorted.back() > Int(200000)) {
    throw std::invalid_argument("Q too large for the scalar scan");
  }
  std::map<Int, DiVerdict> verdicts;
  Rat run_lo, run_hi;
  bool have = false;
  size_t next = 0;
  for (Int q = 1; q <= sorted.back() && next < sorted.size(); ++q) {
    const Rat rq(q);
    const DistInt d = dist_interval(alpha.lo * rq, alpha.hi * rq);
    if (!have || d.lo < run_lo) run_lo = d.lo;
    if (!have || d.hi < run_hi) run_hi = d.hi;
    have = true;
    while (next < sorted.size() && sorted[next] == q) {
      const Int Q = sorted[next];
      const Rat thresh = lambda / Q;
      DiVerdict v;
      v.Q = Q;
      if (run_hi <= thresh) {
        v.verdict = 1;
      } else if (run_lo > thresh) {
        v.verdict = 0;
      } else {
        v.verdict = -1;
      }
      v.margin = to_double(thresh) - to_double((run_lo + run_hi) / 2);
      verdicts[Q] = v;
      ++next;
    }
  }
  std::vector<DiVerdict> out;
  out.reserve(Q_list.size());
  for (const Int& Q : Q_list) out.push_back(verdicts.at(Q));
  return out;
}

std::vector<DiVerdict> di_test(const std::vector<std::vector<Rat>>& alpha,
                               int M, int N, const Rat& lambda,
                               const std::vector<Int>& Q_list) {
  if (!(lambda > 0) || lambda > 1) {
    throw std::invalid_argument("lambda must lie in (0, 1]");
  }
  if (static_cast<int>(alpha.size()) != M) {
    throw std::invalid_argument("alpha must have M rows");
  }
  for (const auto& row : alpha) {
    if (static_cast<int>(row.size()) != N) {
      throw std::invalid_argument("alpha must have N columns");
    }
  }
  const Rat lamM = rat_pow(lambda, M);
  std::vector<DiVerdict> out;
  for (const Int& Q : Q_list) {
    if (Q < 1) throw std::invalid_argument("Q must be >= 1");
    const long long qm = static_cast<long long>(Q);
    double count = 1.0;
    for (int i = 0; i < N; ++i) count *= 2.0 * static_cast<double>(qm) + 1.0;
    if (count > 2e6) {
      throw std::invalid_argument("Q too large for the matrix scan");
    }
    // Pass iff some q satisfies dist^M * Q^N <= lambda^M, an exact test.
    Rat qpow(1);
    for (int i = 0; i < N; ++i) qpow *= Q;
    bool pass = false;
    Rat best_lhs;
    bool have = false;
    std::vector<long long> bounds(static_cast<size_t>(N), qm);
    visit_half_box(bounds, [&](const std::vector<long long>& q) {
      Rat dist(0);
      for (int i = 0; i < M; ++i) {
        Rat x(0);
        for (int j = 0; j < N; ++j) x += alpha[static_cast<size_t>(i)]
                                             [static_cast<size_t>(j)] * q[static_cast<size_t>(j)];
        dist = std::max(dist, dist_to_int(x));
      }
      const Rat lhs = rat_pow(dist, M) * qpow;
      if (!have || lhs < best_lhs) {
        best_lhs = lhs;
        have = true;
      }
      if (lhs <= lamM) pass = true;
    });
    DiVerdict v;
    v.Q = Q;
    v.verdict = pass ? 1 : 0;
    const double thresh = to_double(lambda) *
                          std::pow(static_cast<double>(qm),
                                   -static_cast<double>(N) / M);
    v.margin = thresh - std::pow(to_double(best_lhs) /
                                     to_double(qpow),
                                 1.0 / M);
    out.push_back(v);
  }
  return out;
}

EquidistReport equidist_diagnostics(const std::vector<double>& systoles,
                                    std::vector<double> s_grid) {
  if (systoles.size() < 20) {
    throw std::invalid_argument("series too short for diagnostics");
  }
  for (double s : systoles) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("series has non-finite entries");
    }
  }
  if (s_grid.empty()) s_grid = default_s_grid();
  EquidistReport rep;
  rep.s_grid = s_grid;
  rep.length = systoles.size();
  const size_t n = systoles.size();
  const size_t half = n / 2;

  auto mean_below = [&](size_t lo, size_t hi, double s) {
    size_t cnt = 0;
    for (size_t i = lo; i < hi; ++i) {
      if (systoles[i] < s) ++cnt;
    }
    return static_cast<double>(cnt) / static_cast<double>(hi - lo);
  };
  auto batch_se = [&](size_t lo, size_t hi, double s) {
    const size_t len = hi - lo;
    const size_t B = std::max<size_t>(2, std::min<size_t>(20, len / 2));
    std::vector<double> bm;
    for (size_t b = 0; b < B; ++b) {
      const size_t a = lo + b * len / B;
      const size_t z = lo + (b + 1) * len / B;
      bm.push_back(mean_below(a, z, s));
    }
    double m = 0;
    for (double x : bm) m += x;
    m /= bm.size();
    double var = 0;
    for (double x : bm) var += (x - m) * (x - m);
    var /= (bm.size() - 1);
    return std::sqrt(var / bm.size());
  };

  rep.split_stable = true;
  for (double s : s_grid) {
    rep.means.push_back(mean_below(0, n, s));
    const double m1 = mean_below(0, half, s);
    const double m2 = mean_below(half, n, s);
    rep.first_half.push_back(m1);
    rep.second_half.push_back(m2);
    rep.batch_stderr.push_back(batch_se(0, n, s));
    const double se1 = batch_se(0, half, s);
    const double se2 = batch_se(half, n, s);
    if (std::abs(m1 - m2) >
        3.0 * std::sqrt(se1 * se1 + se2 * se2) + 1e-12) {
      rep.split_stable = false;
    }
  }
  rep.escape_fraction = mean_below(0, n, kEscapeThreshold);
  return rep;
}

std::vector<std::vector<Int>> hermite_normal_form(
    const std::vector<std::vector<Int>>& columns) {
  if (columns.empty()) throw std::invalid_argument("no generators");
  const size_t D = columns[0].size();
  for (const auto& c : columns) {
    if (c.size() != D) throw std::invalid_argument("ragged generator list");
  }
  // Rows of the working matrix are the generators.
  std::vector<std::vector<Int>> rows = columns;
  size_t r = 0;
  for (size_t c = 0; c < D && r < rows.size(); ++c) {
    // Clear column c below a single pivot via integer row operations.
    while (true) {
      size_t piv = rows.size();
      for (size_t i = r; i < rows.size(); ++i) {
        if (rows[i][c] != 0 &&
            (piv == rows.size() ||
             abs(rows[i][c]) < abs(rows[piv][c]))) {
          piv = i;
        }
      }
      if (piv == rows.size()) break;  // column already clear
      std::swap(rows[r], rows[piv]);
      bool cleared = true;
      for (size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        const Int q = floor_div(rows[i][c], rows[r][c]);
        for (size_t j = 0; j < D; ++j) rows[i][j] -= q * rows[r][j];
        if (rows[i][c] != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0) {
      for (size_t j = 0; j < D; ++j) rows[r][j] = -rows[r][j];
    }
    for (size_t i = 0; i < r; ++i) {
      const Int q = floor_div(rows[i][c], rows[r][c]);
      if (q != 0) {
        for (size_t j = 0; j < D; ++j) rows[i][j] -= q * rows[r][j];
      }
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

Eigen::MatrixXd random_unimodular(int D, Rng& rng, int ops) {
  if (D < 1) throw std::invalid_argument("dimension must be >= 1");
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(D, D);
  for (int k = 0; k < ops; ++k) {
    const int kind = static_cast<int>(rng.bits() % 3);
    const int i = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(D));
    int j = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(D));
    if (D > 1) {
      while (j == i) j = static_cast<int>(rng.bits() %
                                          static_cast<std::uint64_t>(D));
    }
    if (kind == 0 && D > 1) {
      const double c = static_cast<double>(1 + rng.bits() % 2) *
                       (rng.bits() % 2 == 0 ? 1.0 : -1.0);
      U.col(i) += c * U.col(j);
    } else if (kind == 1 && D > 1) {
      U.col(i).swap(U.col(j));
    } else {
      U.col(i) *= -1.0;
    }
  }
  return U;
}

}  // namespace fw
