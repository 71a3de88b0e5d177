#include "fractalwalk/contfrac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fractalwalk/moebius.hpp"
#include "fractalwalk/rng.hpp"

namespace fw {

std::vector<std::pair<Int, Int>> CFExpansion::convergents() const {
  return convergents_from_digits(digits);
}

std::vector<long long> cf_euclid(Rat x, int max_digits) {
  if (x < 0 || x >= 1) throw std::invalid_argument("cf_euclid needs x in [0,1)");
  std::vector<long long> out;
  while (x != 0 && int(out.size()) < max_digits) {
    Rat inv = Rat(1) / x;
    Int a = floor_rat(inv);
    out.push_back(a.convert_to<long long>());
    x = inv - Rat(a);
  }
  return out;
}

CFExpansion cf_validated(const RatEnclosure& x, int max_digits) {
  CFExpansion out;
  if (x.lo < 0 || x.hi >= 1 || x.lo > x.hi) return out;  // certify nothing
  if (x.lo == 0) {
    out.terminated = (x.hi == 0);  // the point is exactly 0: empty expansion
    return out;
  }
  if (x.exact()) {
    out.digits = cf_euclid(x.lo, max_digits + 1);
    out.terminated = int(out.digits.size()) <= max_digits;
    if (!out.terminated) out.digits.pop_back();
    return out;
  }
  // common prefix of the endpoint expansions certifies the whole interval:
  // both endpoints lie in the closed cylinder of the prefix, so the interval
  // does, and interior points cannot cross a cylinder boundary unseen
  auto dlo = cf_euclid(x.lo, max_digits + 1);
  auto dhi = cf_euclid(x.hi, max_digits + 1);
  size_t n = std::min(dlo.size(), dhi.size());
  for (size_t i = 0; i < n && int(out.digits.size()) < max_digits; ++i) {
    if (dlo[i] != dhi[i]) break;
    out.digits.push_back(dlo[i]);
  }
  return out;
}

GaussOrbit gauss_orbit(const RatEnclosure& alpha, int n) {
  if (alpha.lo <= 0 || alpha.hi >= 1)
    throw std::invalid_argument("gauss_orbit needs an enclosure inside (0,1)");
  GaussOrbit out;
  out.certified = 0;
  out.terminated = false;
  RatEnclosure cur = alpha;
  out.iterates.push_back(cur);
  for (int k = 0; k < n; ++k) {
    if (cur.exact() && cur.lo == 0) {
      out.terminated = true;  // rational orbit ended; stays at 0
      break;
    }
    if (cur.lo <= 0) break;  // cannot bound 1/x over the enclosure
    Rat inv_lo = Rat(1) / cur.hi, inv_hi = Rat(1) / cur.lo;
    Int a_lo = floor_rat(inv_lo), a_hi = floor_rat(inv_hi);
    if (a_lo != a_hi) break;  // straddles a reciprocal-integer boundary
    long long a = a_lo.convert_to<long long>();
    RatEnclosure next{inv_lo - Rat(a_lo), inv_hi - Rat(a_hi)};
    out.digit_reads.push_back(a);
    out.certified += 1;
    out.iterates.push_back(next);
    cur = next;
  }
  return out;
}

double gauss_digit_probability(int k) {
  if (k < 1) throw std::invalid_argument("digit index must be >= 1");
  double kd = double(k);
  return std::log2((kd + 1) * (kd + 1) / (kd * (kd + 2)));
}

DigitHistogram digit_frequencies(const std::vector<long long>& digits,
                                 int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  DigitHistogram h;
  h.k_max = k_max;
  h.total = (long long)digits.size();
  h.counts.assign(size_t(k_max) + 1, 0);
  h.tail_count = 0;
  h.max_digit = 0;
  for (long long d : digits) {
    if (d < 1) throw std::invalid_argument("digit < 1 in stream");
    h.max_digit = std::max(h.max_digit, d);
    if (d <= k_max)
      h.counts[size_t(d)] += 1;
    else
      h.tail_count += 1;
  }
  h.empirical.assign(size_t(k_max) + 1, 0.0);
  h.reference.assign(size_t(k_max) + 1, 0.0);
  double ref_sum = 0;
  for (int k = 1; k <= k_max; ++k) {
    h.reference[size_t(k) - 1] = gauss_digit_probability(k);
    ref_sum += h.reference[size_t(k) - 1];
    if (h.total > 0)
      h.empirical[size_t(k) - 1] = double(h.counts[size_t(k)]) / double(h.total);
  }
  h.reference[size_t(k_max)] = 1.0 - ref_sum;  // tail bin
  if (h.total > 0)
    h.empirical[size_t(k_max)] = double(h.tail_count) / double(h.total);
  h.sup_deviation = 0;
  for (size_t i = 0; i < h.empirical.size(); ++i)
    h.sup_deviation =
        std::max(h.sup_deviation, std::abs(h.empirical[i] - h.reference[i]));
  return h;
}

namespace {

struct ErrInterval {
  Rat lo, hi;  // bounds on |q alpha - p| over the alpha enclosure
};

ErrInterval err_interval(const Rat& qlo, const Rat& qhi, const Int& p) {
  // qlo <= q*alpha <= qhi; distance to p
  Rat a = qlo - Rat(p), b = qhi - Rat(p);  // a <= b
  if (a >= 0) return {a, b};
  if (b <= 0) return {-b, -a};
  return {Rat(0), std::max(Rat(-a), b)};
}

}  // namespace

BestApproxSequence best_approximations(const RatEnclosure& alpha,
                                       const Int& q_max) {
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  if (alpha.lo < 0 || alpha.hi > 1)
    throw std::invalid_argument("best_approximations expects alpha in [0,1]");
  BestApproxSequence out;
  out.certified = 0;
  out.exhausted = false;
  // strict running minimum of the distance to the nearest integer; an entry
  // qualifies only when it beats every smaller q and its nearest p is unique
  Rat run_lo, run_hi;  // interval bounds on min_{q' <= q} err(q')
  bool have_run = false;
  for (Int q = 1; q <= q_max; ++q) {
    Rat qlo = Rat(q) * alpha.lo, qhi = Rat(q) * alpha.hi;
    Int p_first = floor_rat(qlo), p_last = floor_rat(qhi) + 1;
    // candidate nearest integers for q*alpha: pick the one with minimal
    // distance, then demand strict separation from every other candidate
    std::vector<std::pair<Int, ErrInterval>> cand;
    for (Int p = p_first; p <= p_last; ++p)
      cand.emplace_back(p, err_interval(qlo, qhi, p));
    size_t best_i = 0;
    for (size_t i = 1; i < cand.size(); ++i)
      if (cand[i].second.lo < cand[best_i].second.lo) best_i = i;
    Int best_p = cand[best_i].first;
    ErrInterval best_e = cand[best_i].second;
    bool tie_exact = false;
    for (size_t i = 0; i < cand.size(); ++i) {
      if (i == best_i) continue;
      if (cand[i].second.lo > best_e.hi) continue;  // strictly separated
      if (alpha.exact() && cand[i].second.lo == best_e.lo) {
        tie_exact = true;  // two integers equally near: not a best approx
      } else if (!alpha.exact()) {
        return out;  // enclosure too wide to identify the nearest integer
      }
    }
    bool beats = !have_run || best_e.hi < run_lo;
    bool beaten = have_run && best_e.lo >= run_hi;
    if (!alpha.exact() && !beats && !beaten) return out;  // undecidable
    if (beats && !tie_exact) {
      out.pq.emplace_back(best_p, q);
      out.certified += 1;
      if (alpha.exact() && best_e.lo == 0) {
        out.exhausted = true;  // exact hit: nothing can strictly beat 0
        break;
      }
    }
    if (!have_run) {
      run_lo = best_e.lo;
      run_hi = best_e.hi;
      have_run = true;
    } else {
      run_lo = std::min(run_lo, best_e.lo);
      run_hi = std::min(run_hi, best_e.hi);
    }
  }
  if (!out.pq.empty()) {
    Rat y0(out.pq.front().second);
    for (auto& [p, q] : out.pq) out.y.push_back(Rat(q) / y0);
  }
  return out;
}

BestApproxSequence best_approx_from_digits(const std::vector<long long>& digits,
                                           bool terminated) {
  BestApproxSequence out;
  out.exhausted = terminated;
  out.pq.emplace_back(0, 1);
  Int pm1 = 1, qm1 = 0, p0 = 0, q0 = 1;
  for (long long a : digits) {
    if (a < 1) throw std::invalid_argument("digit < 1");
    Int p = Int(a) * p0 + pm1;
    Int q = Int(a) * q0 + qm1;
    if (q == out.pq.back().second)
      out.pq.back() = {p, q};  // same height: the later convergent is closer
    else
      out.pq.emplace_back(p, q);
    pm1 = p0;
    qm1 = q0;
    p0 = p;
    q0 = q;
  }
  // alpha = 1/2 exactly: at q = 1 both integers are equally near, so (0,1)
  // is not a best approximation
  if (terminated && digits.size() == 1 && digits[0] == 2 &&
      out.pq.size() == 2 && out.pq.front() == std::pair<Int, Int>(0, 1))
    out.pq.erase(out.pq.begin());
  out.certified = int(out.pq.size());
  Rat y0(out.pq.front().second);
  for (auto& [p, q] : out.pq) out.y.push_back(Rat(q) / y0);
  return out;
}

std::vector<long long> f2_floor_ratios(const std::vector<Rat>& y) {
  std::vector<long long> out;
  for (size_t i = 0; i + 1 < y.size(); ++i) {
    if (!(y[i] < y[i + 1]))
      throw std::invalid_argument("y sequence must be strictly increasing");
    out.push_back(floor_rat(y[i + 1] / y[i]).convert_to<long long>());
  }
  return out;
}

FloorRatios f2_floor_ratios_float(const std::vector<double>& y, double tol) {
  FloorRatios out;
  out.certified = 0;
  for (size_t i = 0; i + 1 < y.size(); ++i) {
    if (!(y[i] < y[i + 1]))
      throw std::invalid_argument("y sequence must be strictly increasing");
    double r = y[i + 1] / y[i];
    double f_lo = std::floor(r * (1 - tol)), f_hi = std::floor(r * (1 + tol));
    if (f_lo != f_hi) break;  // a ratio this close to an integer is uncertifiable
    out.digits.push_back((long long)f_lo);
    out.certified += 1;
  }
  return out;
}

namespace {

struct PlanarPoint {
  double xi1, xi2;
};

// integer points of B*Z^2 inside [-C, C] x [-Y, Y], via a basis reduced in
// the box-scaled metric so coefficient ranges stay small
std::vector<PlanarPoint> enumerate_box(const Eigen::Matrix2d& B, double C,
                                       double Y) {
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  S(0, 0) = 1.0 / C;
  S(1, 1) = 1.0 / Y;
  Eigen::Matrix2d Bs = S * B;
  Eigen::Matrix2d U = Eigen::Matrix2d::Identity();  // integer-valued entries
  // Lagrange reduction of the scaled basis
  for (int it = 0; it < 200; ++it) {
    if (Bs.col(0).squaredNorm() > Bs.col(1).squaredNorm()) {
      Bs.col(0).swap(Bs.col(1));
      U.col(0).swap(U.col(1));
    }
    double mu = std::round(Bs.col(1).dot(Bs.col(0)) / Bs.col(0).squaredNorm());
    if (mu == 0) break;
    Bs.col(1) -= mu * Bs.col(0);
    U.col(1) -= mu * U.col(0);
  }
  if (Bs.col(0).squaredNorm() > Bs.col(1).squaredNorm()) {
    Bs.col(0).swap(Bs.col(1));
    U.col(0).swap(U.col(1));
  }
  Eigen::Vector2d e1 = Bs.col(0);
  Eigen::Vector2d e2 = Bs.col(1) - (Bs.col(1).dot(e1) / e1.squaredNorm()) * e1;
  double mu = Bs.col(1).dot(e1) / e1.squaredNorm();
  double r = std::sqrt(2.0) * 1.0000001;  // scaled box fits in this ball
  long long K2 = (long long)std::floor(r / e2.norm()) + 1;
  std::vector<PlanarPoint> out;
  if (K2 > 2000000) throw std::runtime_error("lattice enumeration too large");
  for (long long k2 = -K2; k2 <= K2; ++k2) {
    double center = -double(k2) * mu;
    double half = r / e1.norm() + 1;
    long long k1_lo = (long long)std::floor(center - half);
    long long k1_hi = (long long)std::ceil(center + half);
    for (long long k1 = k1_lo; k1 <= k1_hi; ++k1) {
      if (k1 == 0 && k2 == 0) continue;
      Eigen::Vector2d c0 = U * Eigen::Vector2d(double(k1), double(k2));
      Eigen::Vector2d p = B * c0;
      if (std::abs(p(0)) <= C * (1 + 1e-12) && std::abs(p(1)) <= Y * (1 + 1e-12))
        out.push_back(PlanarPoint{p(0), p(1)});
    }
  }
  return out;
}

}  // namespace

YSequence f1_y_sequence(const Eigen::Matrix2d& basis, int count, double xi2_cap,
                        double tol) {
  double det = std::abs(basis.determinant());
  if (!(det > 0)) throw std::invalid_argument("degenerate basis");
  Eigen::Matrix2d B = basis / std::sqrt(det);
  // Records of min |xi1| over increasing xi2, kept across box growth.  The
  // width C shrinks to the current record, so re-enumeration may drop points
  // already accepted; comparisons always run against the persistent record.
  std::vector<double> chain_xi2;
  double record = std::numeric_limits<double>::infinity();
  double last_h = tol;  // largest height handled so far
  double C = 1.001, Y = 1.001;
  bool stopped = false;
  while (!stopped && int(chain_xi2.size()) < count + 4 && Y < xi2_cap) {
    auto pts = enumerate_box(B, C, Y);
    // same height: only the smallest |xi1| can be a record
    std::sort(pts.begin(), pts.end(),
              [](const PlanarPoint& a, const PlanarPoint& b) {
                if (a.xi2 != b.xi2) return a.xi2 < b.xi2;
                return std::abs(a.xi1) < std::abs(b.xi1);
              });
    for (size_t i = 0; i < pts.size() && !stopped; ++i) {
      if (pts[i].xi2 <= last_h) continue;  // lower half plane or handled
      double a1 = std::abs(pts[i].xi1);
      if (a1 >= record + tol) continue;  // not a record at any ordering
      if (pts[i].xi2 - last_h <= tol) {
        stopped = true;  // heights this close cannot be ordered reliably
        break;
      }
      if (a1 < record - tol) {
        chain_xi2.push_back(pts[i].xi2);
        last_h = pts[i].xi2;
        record = a1;
        if (a1 <= tol) stopped = true;  // a (near-)vertical vector ends it
        if (int(chain_xi2.size()) >= count + 4) break;
      } else {
        stopped = true;  // improvement too close to call
      }
    }
    if (stopped) break;
    C = std::min(C, record + tol);
    Y *= 4;
  }
  std::vector<double> filtered;
  for (double x : chain_xi2)
    if (x >= 1.0 - 1e-12) filtered.push_back(x);
  YSequence out;
  if (filtered.empty()) {
    out.certified = 0;
    return out;
  }
  double y0 = filtered.front();
  for (size_t i = 0; i < filtered.size() && int(i) < count; ++i)
    out.y.push_back(filtered[i] / y0);
  out.certified = int(out.y.size());
  return out;
}

FractalCFReport fractal_cf_experiment(const IFSDescription& ifs, int n_points,
                                      int depth, int digits_per_point,
                                      uint64_t seed, int k_max, int depth_cap) {
  if (n_points < 1 || depth < 1 || digits_per_point < 1)
    throw std::invalid_argument("fractal_cf_experiment needs positive sizes");
  bool moebius = ifs.kind == MapKind::moebius_family;
  if (!moebius && !ifs.has_exact1d())
    throw std::invalid_argument(
        "certified digits need a 1-d rational system (or a moebius family)");
  std::pair<Rat, Rat> hull;
  if (!moebius) hull = attractor_interval_exact(ifs);
  FractalCFReport rep;
  rep.n_points = n_points;
  rep.requested_digits = digits_per_point;
  rep.initial_depth = depth;
  rep.max_depth_used = depth;
  rep.shortfall_points = 0;
  std::vector<long long> pooled;
  auto cumw = cumulative(ifs.weights);
  for (int i = 0; i < n_points; ++i) {
    Rng rng(seed, uint64_t(i) + 1);
    Word w;
    for (int k = 0; k < depth; ++k) w.symbols.push_back(rng.pick_cumulative(cumw));
    CFExpansion cf;
    while (true) {
      RatEnclosure enc;
      if (moebius) {
        enc = fn_word_interval(w.symbols, ifs.moebius_branches);
      } else {
        RationalAffine f = compose_prefix_exact(ifs, w);
        Rat a = f(hull.first), b = f(hull.second);
        if (a > b) std::swap(a, b);
        enc = RatEnclosure{a, b};
      }
      cf = cf_validated(enc, digits_per_point);
      if (cf.terminated || cf.certified_length() >= digits_per_point) break;
      if (w.length() >= depth_cap) break;
      int extend = std::min(300, depth_cap - w.length());
      for (int k = 0; k < extend; ++k)
        w.symbols.push_back(rng.pick_cumulative(cumw));
      rep.max_depth_used = std::max(rep.max_depth_used, w.length());
    }
    int certified = cf.certified_length();
    rep.certified_per_point.push_back(certified);
    if (!cf.terminated && certified < digits_per_point) rep.shortfall_points += 1;
    int take = std::min(certified, digits_per_point);
    pooled.insert(pooled.end(), cf.digits.begin(), cf.digits.begin() + take);
  }
  rep.pooled = digit_frequencies(pooled, k_max);
  return rep;
}

}  // namespace fw
