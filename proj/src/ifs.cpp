#include "fractalwalk/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fractalwalk/rng.hpp"

namespace fw {

Similarity Similarity::identity(int d) {
  return Similarity{1.0, Eigen::MatrixXd::Identity(d, d),
                    Eigen::VectorXd::Zero(d)};
}

Similarity compose(const Similarity& f, const Similarity& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("dimension mismatch");
  Similarity h;
  h.ratio = f.ratio * g.ratio;
  h.orth = f.orth * g.orth;
  h.trans = f.ratio * (f.orth * g.trans) + f.trans;
  return h;
}

AlgebraicSimilarity AlgebraicSimilarity::identity(int m, int n) {
  return AlgebraicSimilarity{1.0, Eigen::MatrixXd::Identity(m, m),
                             Eigen::MatrixXd::Identity(n, n),
                             Eigen::MatrixXd::Zero(m, n)};
}

AlgebraicSimilarity compose(const AlgebraicSimilarity& f,
                            const AlgebraicSimilarity& g) {
  if (f.rows() != g.rows() || f.cols() != g.cols())
    throw std::invalid_argument("dimension mismatch");
  AlgebraicSimilarity h;
  h.ratio = f.ratio * g.ratio;
  h.left = f.left * g.left;
  h.right = g.right * f.right;  // right factors accumulate in reverse
  h.trans = f.ratio * (f.left * g.trans * f.right) + f.trans;
  return h;
}

AlgebraicSimilarity widen(const Similarity& f) {
  AlgebraicSimilarity a;
  a.ratio = f.ratio;
  a.left = f.orth;
  a.right = Eigen::MatrixXd::Identity(1, 1);
  a.trans = f.trans;
  return a;
}

int IFSDescription::alphabet_size() const {
  switch (kind) {
    case MapKind::similarity: return int(sims.size());
    case MapKind::algebraic: return int(algs.size());
    case MapKind::moebius_family: return moebius_branches;
  }
  return 0;
}

int IFSDescription::ambient_dim() const {
  switch (kind) {
    case MapKind::similarity: return sims.empty() ? 0 : sims[0].dim();
    case MapKind::algebraic:
      return algs.empty() ? 0 : algs[0].rows() * algs[0].cols();
    case MapKind::moebius_family: return 1;
  }
  return 0;
}

double IFSDescription::ratio_of(int e) const {
  switch (kind) {
    case MapKind::similarity: return sims.at(size_t(e)).ratio;
    case MapKind::algebraic: return algs.at(size_t(e)).ratio;
    case MapKind::moebius_family:
      throw std::invalid_argument("moebius family has no per-map ratio");
  }
  return 0;
}

namespace {

bool is_orthogonal(const Eigen::MatrixXd& q, double tol) {
  if (q.rows() != q.cols()) return false;
  Eigen::MatrixXd r = q.transpose() * q -
                      Eigen::MatrixXd::Identity(q.rows(), q.cols());
  return r.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

void IFSDescription::validate() const {
  const double tol = 1e-12;
  int n = alphabet_size();
  if (n == 0) throw std::invalid_argument("empty alphabet");
  if (int(weights.size()) != n)
    throw std::invalid_argument("weights / alphabet size mismatch");
  double sum = 0;
  for (double w : weights) {
    if (!(w > 0)) throw std::invalid_argument("weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("weights must sum to 1");
  if (kind == MapKind::similarity) {
    int d = sims[0].dim();
    for (auto& f : sims) {
      if (f.dim() != d || f.orth.rows() != d)
        throw std::invalid_argument("map dimensions disagree");
      if (!(f.ratio > 0)) throw std::invalid_argument("ratio must be positive");
      if (!is_orthogonal(f.orth, tol))
        throw std::invalid_argument("orthogonal part fails tolerance");
    }
  } else if (kind == MapKind::algebraic) {
    int m = algs[0].rows(), c = algs[0].cols();
    for (auto& f : algs) {
      if (f.rows() != m || f.cols() != c)
        throw std::invalid_argument("map dimensions disagree");
      if (!(f.ratio > 0)) throw std::invalid_argument("ratio must be positive");
      if (!is_orthogonal(f.left, tol) || !is_orthogonal(f.right, tol))
        throw std::invalid_argument("orthogonal part fails tolerance");
    }
  } else if (moebius_branches < 1) {
    throw std::invalid_argument("moebius family needs at least one branch");
  }
  if (!exact1d.empty()) {
    if (int(exact1d.size()) != n || kind != MapKind::similarity ||
        ambient_dim() != 1)
      throw std::invalid_argument("exact mirror only valid for 1-d systems");
    for (int e = 0; e < n; ++e)
      if (std::abs(std::abs(to_double(exact1d[size_t(e)].a)) -
                   sims[size_t(e)].ratio) > 1e-12)
        throw std::invalid_argument("exact mirror disagrees with float maps");
  }
}

Similarity compose_prefix(const IFSDescription& ifs, const Word& w) {
  if (ifs.kind != MapKind::similarity)
    throw std::invalid_argument("compose_prefix needs a similarity system");
  int n = ifs.alphabet_size();
  Similarity acc = Similarity::identity(ifs.sims[0].dim());
  // word (b_1..b_n) codes phi_{b_1} after ... after phi_{b_n}: fold from the
  // left so acc = phi_{b_1} ... phi_{b_k} after k symbols
  for (int s : w.symbols) {
    if (s < 0 || s >= n) throw std::invalid_argument("symbol out of range");
    acc = compose(acc, ifs.sims[size_t(s)]);
  }
  return acc;
}

AlgebraicSimilarity compose_prefix_algebraic(const IFSDescription& ifs,
                                             const Word& w) {
  std::vector<AlgebraicSimilarity> maps;
  if (ifs.kind == MapKind::algebraic) {
    maps = ifs.algs;
  } else if (ifs.kind == MapKind::similarity) {
    for (auto& f : ifs.sims) maps.push_back(widen(f));
  } else {
    throw std::invalid_argument("moebius family is not an affine system");
  }
  AlgebraicSimilarity acc =
      AlgebraicSimilarity::identity(maps[0].rows(), maps[0].cols());
  for (int s : w.symbols) {
    if (s < 0 || s >= int(maps.size()))
      throw std::invalid_argument("symbol out of range");
    acc = compose(acc, maps[size_t(s)]);
  }
  return acc;
}

RationalAffine compose_prefix_exact(const IFSDescription& ifs, const Word& w) {
  if (!ifs.has_exact1d())
    throw std::invalid_argument("no exact rational mirror for this system");
  RationalAffine acc{Rat(1), Rat(0)};
  for (int s : w.symbols) {
    if (s < 0 || s >= int(ifs.exact1d.size()))
      throw std::invalid_argument("symbol out of range");
    const RationalAffine& g = ifs.exact1d[size_t(s)];
    acc = RationalAffine{acc.a * g.a, acc.a * g.b + acc.b};
  }
  return acc;
}

double attractor_radius(const IFSDescription& ifs) {
  double cmax = 0, tsum = 0;
  if (ifs.kind == MapKind::similarity) {
    for (auto& f : ifs.sims) {
      cmax = std::max(cmax, f.ratio);
      tsum += f.trans.norm();
    }
  } else if (ifs.kind == MapKind::algebraic) {
    for (auto& f : ifs.algs) {
      cmax = std::max(cmax, f.ratio);
      tsum += f.trans.norm();
    }
  } else {
    return 1.0;  // moebius branches preserve [0,1]
  }
  if (cmax >= 1)
    throw std::invalid_argument("attractor radius needs strict contractions");
  return tsum / (1.0 - cmax);
}

CodedPoint coding_point(const IFSDescription& ifs, const Word& w,
                        const Eigen::MatrixXd& anchor) {
  double cmax = 0, prod = 1;
  for (int s : w.symbols) {
    double c = ifs.ratio_of(s);
    prod *= c;
    cmax = std::max(cmax, c);
  }
  (void)cmax;
  double radius = attractor_radius(ifs);  // throws on non-contracting systems
  Eigen::MatrixXd value;
  if (ifs.kind == MapKind::similarity) {
    Similarity f = compose_prefix(ifs, w);
    value = f(Eigen::VectorXd(anchor.col(0)));
  } else {
    AlgebraicSimilarity f = compose_prefix_algebraic(ifs, w);
    value = f(anchor);
  }
  return CodedPoint{value, prod * (anchor.norm() + radius)};
}

CodedPoint coding_point(const IFSDescription& ifs, const Word& w) {
  int r, c;
  if (ifs.kind == MapKind::algebraic) {
    r = ifs.algs[0].rows();
    c = ifs.algs[0].cols();
  } else {
    r = ifs.ambient_dim();
    c = 1;
  }
  return coding_point(ifs, w, Eigen::MatrixXd::Zero(r, c));
}

std::pair<Rat, Rat> attractor_interval_exact(const IFSDescription& ifs) {
  if (!ifs.has_exact1d())
    throw std::invalid_argument("no exact rational mirror for this system");
  // fixed point of x -> ax+b is b/(1-a); the attractor lies in the convex
  // hull of the fixed points (1-d, every map contracts toward its own)
  Rat lo, hi;
  bool first = true;
  for (auto& f : ifs.exact1d) {
    if (abs(f.a) >= 1)
      throw std::invalid_argument("exact attractor needs strict contractions");
    Rat fix = f.b / (Rat(1) - f.a);
    if (first) {
      lo = hi = fix;
      first = false;
    } else {
      lo = std::min(lo, fix);
      hi = std::max(hi, fix);
    }
  }
  // hull check: each map must send [lo,hi] into itself
  for (auto& f : ifs.exact1d) {
    Rat a = f(lo), b = f(hi);
    if (a > b) std::swap(a, b);
    if (a < lo || b > hi)
      throw std::invalid_argument("maps do not preserve the fixed-point hull");
  }
  return {lo, hi};
}

Word sample_word(const IFSDescription& ifs, int n, uint64_t seed,
                 uint64_t stream) {
  if (n < 0) throw std::invalid_argument("negative word length");
  auto cumw = cumulative(ifs.weights);
  Rng rng(seed, stream);
  Word w;
  w.symbols.reserve(size_t(n));
  for (int i = 0; i < n; ++i) w.symbols.push_back(rng.pick_cumulative(cumw));
  return w;
}

double contraction_on_average(const IFSDescription& ifs) {
  double acc = 0;
  for (int e = 0; e < ifs.alphabet_size(); ++e)
    acc += ifs.weights[size_t(e)] * std::log(ifs.ratio_of(e));
  return acc;
}

DimensionResult similarity_dimension(const IFSDescription& ifs) {
  int n = ifs.alphabet_size();
  std::vector<double> ratios(static_cast<size_t>(n), 0.0);
  for (int e = 0; e < n; ++e) {
    ratios[size_t(e)] = ifs.ratio_of(e);
    if (!(ratios[size_t(e)] > 0 && ratios[size_t(e)] < 1))
      throw std::invalid_argument("similarity dimension needs ratios in (0,1)");
  }
  auto F = [&](double s) {
    double acc = 0;
    for (double c : ratios) acc += std::pow(c, s);
    return acc - 1.0;
  };
  DimensionResult out;
  out.degenerate = (n == 1);
  if (out.degenerate) {
    out.s = 0.0;
    out.natural_weights = {1.0};
    return out;
  }
  double lo = 0.0, hi = 1.0;
  while (F(hi) > 0) hi *= 2;  // F is strictly decreasing, F(0) = n-1 > 0
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    (F(mid) > 0 ? lo : hi) = mid;
  }
  out.s = 0.5 * (lo + hi);
  out.natural_weights.resize(size_t(n));
  for (int e = 0; e < n; ++e)
    out.natural_weights[size_t(e)] = std::pow(ratios[size_t(e)], out.s);
  return out;
}

std::vector<std::string> irreducibility_probe(const IFSDescription& ifs,
                                              int depth) {
  std::vector<std::string> warnings;
  if (ifs.kind == MapKind::moebius_family) return warnings;
  int d = ifs.ambient_dim();
  int n = ifs.alphabet_size();
  // generic base point
  Eigen::VectorXd x0(d);
  for (int i = 0; i < d; ++i) x0[i] = 0.37 + 0.21 * i;
  std::vector<Eigen::VectorXd> pts{x0};
  long long total = 1;
  for (int k = 0; k < depth; ++k) {
    total *= n;
    if (total > 4096) break;
    std::vector<Eigen::VectorXd> next;
    for (auto& p : pts)
      for (int e = 0; e < n; ++e) {
        if (ifs.kind == MapKind::similarity) {
          next.push_back(ifs.sims[size_t(e)](p));
        } else {
          const auto& f = ifs.algs[size_t(e)];
          Eigen::MatrixXd pm =
              Eigen::Map<const Eigen::MatrixXd>(p.data(), f.rows(), f.cols());
          Eigen::MatrixXd q = f(pm);
          next.push_back(Eigen::Map<Eigen::VectorXd>(q.data(), d));
        }
      }
    pts = std::move(next);
  }
  if (pts.size() < 2) return warnings;
  Eigen::MatrixXd diffs(d, int(pts.size()) - 1);
  for (size_t i = 1; i < pts.size(); ++i)
    diffs.col(int(i) - 1) = pts[i] - pts[0];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
  lu.setThreshold(1e-9);
  int rank = int(lu.rank());
  if (rank < d) {
    std::ostringstream ss;
    ss << "depth-" << depth << " orbit spans an affine subspace of dimension "
       << rank << " < " << d << "; the system may be reducible";
    warnings.push_back(ss.str());
  }
  return warnings;
}

namespace {

Similarity affine1d(double a, double b) {
  Similarity f;
  f.ratio = std::abs(a);
  f.orth = Eigen::MatrixXd::Constant(1, 1, a < 0 ? -1.0 : 1.0);
  f.trans = Eigen::VectorXd::Constant(1, b);
  return f;
}

Eigen::MatrixXd rot2(double theta) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Similarity planar(double ratio, double theta, double tx, double ty) {
  Similarity f;
  f.ratio = ratio;
  f.orth = rot2(theta);
  f.trans = Eigen::Vector2d(tx, ty);
  return f;
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon != std::string::npos)
    return {spec.substr(0, colon), spec.substr(colon + 1)};
  auto open = spec.find('(');
  if (open != std::string::npos && spec.back() == ')')
    return {spec.substr(0, open), spec.substr(open + 1, spec.size() - open - 2)};
  return {spec, ""};
}

}  // namespace

IFSDescription preset(const std::string& spec) {
  auto [name, param] = split_spec(spec);
  IFSDescription ifs;
  ifs.name = spec;
  if (name == "cantor3" || name == "middle_eps") {
    Rat eps = name == "cantor3" ? Rat(1, 3) : parse_rational(param);
    if (eps <= 0 || eps >= 1)
      throw std::invalid_argument("middle_eps needs eps in (0,1)");
    Rat c = (Rat(1) - eps) / 2;
    ifs.sims = {affine1d(to_double(c), 0.0),
                affine1d(to_double(c), to_double(Rat(1) - c))};
    ifs.exact1d = {RationalAffine{c, Rat(0)}, RationalAffine{c, Rat(1) - c}};
    ifs.weights = {0.5, 0.5};
    ifs.osc_note = "open set (0,1): images are disjoint subintervals";
  } else if (name == "ex1314") {
    ifs.sims = {affine1d(1.0 / 3.0, 0.0), affine1d(0.25, 0.75)};
    ifs.exact1d = {RationalAffine{Rat(1, 3), Rat(0)},
                   RationalAffine{Rat(1, 4), Rat(3, 4)}};
    ifs.weights = {0.5, 0.5};
    ifs.osc_note = "open set (0,1): images (0,1/3) and (3/4,1) are disjoint";
  } else if (name == "koch") {
    const double s3 = std::sqrt(3.0);
    ifs.sims = {planar(1.0 / 3.0, 0.0, 0.0, 0.0),
                planar(1.0 / 3.0, M_PI / 3.0, 1.0 / 3.0, 0.0),
                planar(1.0 / 3.0, -M_PI / 3.0, 0.5, s3 / 6.0),
                planar(1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0)};
    ifs.weights = {0.25, 0.25, 0.25, 0.25};
    ifs.osc_note = "open set: triangle neighborhood of the curve";
  } else if (name == "sierpinski") {
    const double s3 = std::sqrt(3.0);
    ifs.sims = {planar(0.5, 0.0, 0.0, 0.0), planar(0.5, 0.0, 0.5, 0.0),
                planar(0.5, 0.0, 0.25, s3 / 4.0)};
    ifs.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    ifs.osc_note = "open set: interior of the spanning triangle";
  } else if (name == "cantor_x_cantor") {
    IFSDescription line = preset("cantor3");
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Similarity f;
        f.ratio = 1.0 / 3.0;
        f.orth = Eigen::MatrixXd::Identity(2, 2);
        f.trans = Eigen::Vector2d(line.sims[size_t(i)].trans[0],
                                  line.sims[size_t(j)].trans[0]);
        ifs.sims.push_back(f);
      }
    ifs.weights = {0.25, 0.25, 0.25, 0.25};
    ifs.osc_note = "open set (0,1)^2: images are disjoint subsquares";
  } else if (name == "fN") {
    int N = param.empty() ? 0 : std::stoi(param);
    if (N < 1) throw std::invalid_argument("fN needs a branch count >= 1");
    ifs.kind = MapKind::moebius_family;
    ifs.moebius_branches = N;
    ifs.weights.assign(size_t(N), 1.0 / N);
    ifs.osc_note = "branch images of [0,1] overlap only at endpoints";
  } else {
    throw std::invalid_argument("unknown preset: " + spec);
  }
  ifs.validate();
  return ifs;
}

IFSDescription load_ifs_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open IFS file: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  IFSDescription ifs;
  ifs.name = path;
  int d = j.at("dim").get<int>();
  bool algebraic = j.contains("shape");
  int M = 0, N = 0;
  if (algebraic) {
    M = j.at("shape").at(0).get<int>();
    N = j.at("shape").at(1).get<int>();
    if (M * N != d) throw std::invalid_argument("shape does not match dim");
    ifs.kind = MapKind::algebraic;
  }
  for (auto& jm : j.at("maps")) {
    double ratio = jm.at("ratio").get<double>();
    if (algebraic) {
      AlgebraicSimilarity a;
      a.ratio = ratio;
      a.left = Eigen::MatrixXd::Identity(M, M);
      a.right = Eigen::MatrixXd::Identity(N, N);
      a.trans = Eigen::MatrixXd::Zero(M, N);
      if (jm.contains("left"))
        for (int r = 0; r < M; ++r)
          for (int c = 0; c < M; ++c)
            a.left(r, c) = jm.at("left").at(size_t(r)).at(size_t(c)).get<double>();
      if (jm.contains("right"))
        for (int r = 0; r < N; ++r)
          for (int c = 0; c < N; ++c)
            a.right(r, c) =
                jm.at("right").at(size_t(r)).at(size_t(c)).get<double>();
      auto& tr = jm.at("translation");
      for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c)
          a.trans(r, c) = tr.at(size_t(r * N + c)).get<double>();
      ifs.algs.push_back(a);
    } else {
      Similarity s;
      s.ratio = ratio;
      s.orth = Eigen::MatrixXd::Identity(d, d);
      s.trans = Eigen::VectorXd::Zero(d);
      if (jm.contains("orthogonal"))
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c)
            s.orth(r, c) =
                jm.at("orthogonal").at(size_t(r)).at(size_t(c)).get<double>();
      auto& tr = jm.at("translation");
      for (int r = 0; r < d; ++r) s.trans[r] = tr.at(size_t(r)).get<double>();
      ifs.sims.push_back(s);
    }
  }
  if (j.contains("weights")) {
    for (auto& w : j.at("weights")) ifs.weights.push_back(w.get<double>());
  } else {
    int n = ifs.alphabet_size();
    ifs.weights.assign(size_t(n), 1.0 / n);
  }
  if (j.contains("osc_note")) ifs.osc_note = j.at("osc_note").get<std::string>();
  ifs.validate();
  return ifs;
}

IFSDescription resolve_system(const std::string& spec) {
  auto [name, param] = split_spec(spec);
  (void)param;
  static const std::set<std::string> catalog = {
      "cantor3", "middle_eps", "ex1314",         "koch",
      "sierpinski", "fN",       "cantor_x_cantor"};
  if (catalog.count(name)) return preset(spec);
  return load_ifs_file(spec);
}

}  // namespace fw
