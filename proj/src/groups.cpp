#include "fractalwalk/groups.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fw {

namespace {

void check_split(int M, int N) {
  if (M < 1 || N < 1) {
    throw std::invalid_argument("block split requires M >= 1 and N >= 1");
  }
}

double log_abs_det(const Eigen::MatrixXd& A) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd& U = lu.matrixLU();
  double s = 0.0;
  for (int i = 0; i < A.rows(); ++i) {
    double d = std::abs(U(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("matrix is numerically singular");
    }
    s += std::log(d);
  }
  return s;
}

// Lexicographically ordered d-element subsets of {0, ..., n-1}.
std::vector<std::vector<int>> lex_subsets(int n, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(d);
  for (int i = 0; i < d; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = d - 1;
    while (i >= 0 && cur[i] == n - d + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < d; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

double minor_det(const Eigen::MatrixXd& A, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  const int d = static_cast<int>(rows.size());
  switch (d) {
    case 1:
      return A(rows[0], cols[0]);
    case 2:
      return A(rows[0], cols[0]) * A(rows[1], cols[1]) -
             A(rows[0], cols[1]) * A(rows[1], cols[0]);
    case 3: {
      double a = A(rows[0], cols[0]), b = A(rows[0], cols[1]),
             c = A(rows[0], cols[2]);
      double d1 = A(rows[1], cols[0]), e = A(rows[1], cols[1]),
             f = A(rows[1], cols[2]);
      double g = A(rows[2], cols[0]), h = A(rows[2], cols[1]),
             i = A(rows[2], cols[2]);
      return a * (e * i - f * h) - b * (d1 * i - f * g) + c * (d1 * h - e * g);
    }
    default: {
      Eigen::MatrixXd sub(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) sub(r, c) = A(rows[r], cols[c]);
      return sub.determinant();
    }
  }
}

bool aku_impl(const GroupElement& g, double tol, AKUDecomposition* out,
              std::string* why) {
  const int M = g.M, N = g.N, D = g.dim();
  const Eigen::MatrixXd& m = g.m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd A21 = m.bottomLeftCorner(N, M);
  if (A21.cwiseAbs().maxCoeff() > tol * scale) {
    if (why) *why = "lower-left block is not negligible";
    return false;
  }
  const Eigen::MatrixXd A11 = m.topLeftCorner(M, M);
  const Eigen::MatrixXd A12 = m.topRightCorner(M, N);
  const Eigen::MatrixXd A22 = m.bottomRightCorner(N, N);

  double log_det11;
  try {
    log_det11 = log_abs_det(A11);
  } catch (const std::invalid_argument&) {
    if (why) *why = "leading block is singular";
    return false;
  }
  // |det| of the whole representative is 1, so |det A11| = e^t.
  const double t = log_det11;
  const Eigen::MatrixXd O1 = A11 / std::exp(t / M);
  const Eigen::MatrixXd O2 = A22 / std::exp(-t / N);
  const double orth_tol = std::max(tol, 1e-9) * 10.0;
  if ((O1.transpose() * O1 - Eigen::MatrixXd::Identity(M, M))
              .cwiseAbs()
              .maxCoeff() > orth_tol ||
      (O2.transpose() * O2 - Eigen::MatrixXd::Identity(N, N))
              .cwiseAbs()
              .maxCoeff() > orth_tol) {
    if (why) *why = "diagonal blocks are not conformal";
    return false;
  }
  if (out) {
    out->t = t;
    out->k = Eigen::MatrixXd::Zero(D, D);
    out->k.topLeftCorner(M, M) = O1;
    out->k.bottomRightCorner(N, N) = O2;
    out->alpha = -A11.partialPivLu().solve(A12);
  }
  return true;
}

}  // namespace

GroupElement make_group_element(const Eigen::MatrixXd& m, int M, int N) {
  check_split(M, N);
  const int D = M + N;
  if (m.rows() != D || m.cols() != D) {
    throw std::invalid_argument("matrix shape does not match the block split");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("matrix has non-finite entries");
  }
  const double ld = log_abs_det(m);
  GroupElement g;
  g.m = m * std::exp(-ld / D);
  g.M = M;
  g.N = N;
  return g;
}

GroupElement group_mul(const GroupElement& a, const GroupElement& b) {
  if (a.M != b.M || a.N != b.N) {
    throw std::invalid_argument("block splits differ");
  }
  return make_group_element(a.m * b.m, a.M, a.N);
}

GroupElement group_inv(const GroupElement& g) {
  return make_group_element(g.m.inverse(), g.M, g.N);
}

GroupElement group_identity(int M, int N) {
  check_split(M, N);
  GroupElement g;
  g.m = Eigen::MatrixXd::Identity(M + N, M + N);
  g.M = M;
  g.N = N;
  return g;
}

bool same_projective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     double tol) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) return false;
  const double scale = std::max(
      {A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff(), 1.0});
  const double plus = (A - B).cwiseAbs().maxCoeff();
  const double minus = (A + B).cwiseAbs().maxCoeff();
  return std::min(plus, minus) <= tol * scale;
}

double gamma_rate(int M, int N) {
  check_split(M, N);
  return 1.0 / M + 1.0 / N;
}

GroupElement flow_a(double t, int M, int N) {
  check_split(M, N);
  const int D = M + N;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(D, D);
  for (int i = 0; i < M; ++i) m(i, i) = std::exp(t / M);
  for (int i = M; i < D; ++i) m(i, i) = std::exp(-t / N);
  GroupElement g;
  g.m = m;
  g.M = M;
  g.N = N;
  return g;
}

GroupElement unipotent_u(const Eigen::MatrixXd& alpha, int M, int N) {
  check_split(M, N);
  if (alpha.rows() != M || alpha.cols() != N) {
    throw std::invalid_argument("unipotent parameter must be M x N");
  }
  const int D = M + N;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(D, D);
  m.topRightCorner(M, N) = -alpha;
  GroupElement g;
  g.m = m;
  g.M = M;
  g.N = N;
  return g;
}

GroupElement block_k(const Eigen::MatrixXd& O1, const Eigen::MatrixXd& O2,
                     int M, int N) {
  check_split(M, N);
  if (O1.rows() != M || O1.cols() != M || O2.rows() != N || O2.cols() != N) {
    throw std::invalid_argument("block shapes must be M x M and N x N");
  }
  const int D = M + N;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(D, D);
  m.topLeftCorner(M, M) = O1;
  m.bottomRightCorner(N, N) = O2;
  return make_group_element(m, M, N);
}

bool in_block_group(const GroupElement& g, double tol) {
  return aku_impl(g, tol, nullptr, nullptr);
}

AKUDecomposition aku_decompose(const GroupElement& g, double tol) {
  AKUDecomposition d;
  std::string why;
  if (!aku_impl(g, tol, &d, &why)) {
    throw std::domain_error("element is outside the block group: " + why);
  }
  return d;
}

Eigen::MatrixXd aku_reconstruct(const AKUDecomposition& d, int M, int N) {
  return flow_a(d.t, M, N).m * d.k * unipotent_u(d.alpha, M, N).m;
}

GroupElement similarity_to_group(const AlgebraicSimilarity& map, int M, int N) {
  check_split(M, N);
  if (map.left.rows() != M || map.left.cols() != M || map.right.rows() != N ||
      map.right.cols() != N || map.trans.rows() != M || map.trans.cols() != N) {
    throw std::invalid_argument("similarity dimensions do not match (M, N)");
  }
  if (!(map.ratio > 0.0)) {
    throw std::invalid_argument("similarity ratio must be positive");
  }
  const double t = std::log(map.ratio) / gamma_rate(M, N);
  const Eigen::MatrixXd k_mat =
      block_k(map.left, map.right.transpose(), M, N).m;
  return make_group_element(unipotent_u(map.trans, M, N).m * flow_a(t, M, N).m *
                                k_mat,
                            M, N);
}

GroupElement walk_generator(const AlgebraicSimilarity& map, int M, int N) {
  return group_inv(similarity_to_group(map, M, N));
}

std::vector<GroupElement> walk_generators(const IFSDescription& ifs, int M,
                                          int N) {
  check_split(M, N);
  std::vector<GroupElement> out;
  if (ifs.kind == MapKind::algebraic) {
    for (const auto& f : ifs.algs) out.push_back(walk_generator(f, M, N));
    return out;
  }
  if (ifs.kind == MapKind::similarity) {
    if (N != 1 || M != ifs.ambient_dim()) {
      throw std::invalid_argument(
          "a plain similarity system widens only to the one-column split");
    }
    for (const auto& f : ifs.sims) out.push_back(walk_generator(widen(f), M, N));
    return out;
  }
  throw std::invalid_argument(
      "no linear-group generators for a fractional-linear family");
}

std::vector<double> VBasis::weights() const {
  std::vector<double> w(chi_class.size());
  for (size_t i = 0; i < chi_class.size(); ++i) w[i] = gamma * chi_class[i];
  return w;
}

std::vector<int> VBasis::positive_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < chi_class.size(); ++i) {
    if (chi_class[i] > 0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

VBasis v_basis(int M, int N) {
  check_split(M, N);
  const int D = M + N;
  VBasis b;
  b.M = M;
  b.N = N;
  b.gamma = gamma_rate(M, N);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      if (i == j) continue;
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(D, D);
      E(i, j) = 1.0;
      b.mats.push_back(E);
      int cls = 0;
      if (i < M && j >= M) cls = 1;
      if (i >= M && j < M) cls = -1;
      b.chi_class.push_back(cls);
    }
  }
  for (int k = 1; k < D; ++k) {
    Eigen::MatrixXd Dk = Eigen::MatrixXd::Zero(D, D);
    const double s = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) Dk(i, i) = s;
    Dk(k, k) = -k * s;
    b.mats.push_back(Dk);
    b.chi_class.push_back(0);
  }
  return b;
}

Eigen::MatrixXd adjoint_rep(const GroupElement& g, const VBasis& basis) {
  if (g.dim() != basis.D()) {
    throw std::invalid_argument("group element does not match the basis");
  }
  const int n = basis.dim();
  const Eigen::MatrixXd ginv = g.m.inverse();
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXd C = g.m * basis.mats[j] * ginv;
    for (int i = 0; i < n; ++i) {
      A(i, j) = (C.cwiseProduct(basis.mats[i])).sum();
    }
  }
  return A;
}

Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& A, int d) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("compound matrix needs a square input");
  }
  const int n = static_cast<int>(A.rows());
  if (d < 1 || d > n) {
    throw std::invalid_argument("compound order out of range");
  }
  const auto subsets = lex_subsets(n, d);
  const int m = static_cast<int>(subsets.size());
  if (m > 200000) {
    throw std::invalid_argument("wedge dimension too large");
  }
  Eigen::MatrixXd C(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      C(r, c) = minor_det(A, subsets[r], subsets[c]);
    }
  }
  return C;
}

Eigen::MatrixXd exterior_power_rep(const Eigen::MatrixXd& A_on_V, int d) {
  return compound_matrix(A_on_V, d);
}

double det_normalize(Eigen::MatrixXd& A) {
  const double ld = log_abs_det(A);
  A *= std::exp(-ld / static_cast<double>(A.rows()));
  return ld;
}

std::vector<double> WeightSpaceBasis::psi() const {
  std::vector<double> out;
  for (const auto& e : eigenspaces) out.push_back(gamma * e.first);
  return out;
}

WeightSpaceBasis w_space(int M, int N, int d) {
  check_split(M, N);
  const int D = M + N;
  const int dimV = D * D - 1;
  if (d < 1 || d > dimV) {
    throw std::invalid_argument("wedge level out of range");
  }
  WeightSpaceBasis w;
  w.M = M;
  w.N = N;
  w.d = d;
  w.gamma = gamma_rate(M, N);
  w.dimV = dimV;
  const VBasis vb = v_basis(M, N);
  w.subsets = lex_subsets(dimV, d);
  if (w.subsets.size() > 200000) {
    throw std::invalid_argument("wedge dimension too large");
  }
  std::map<int, std::vector<int>, std::greater<int>> spaces;
  for (size_t s = 0; s < w.subsets.size(); ++s) {
    int cls = 0;
    for (int idx : w.subsets[s]) cls += vb.chi_class[idx];
    w.chi_class.push_back(cls);
    spaces[cls].push_back(static_cast<int>(s));
    if (cls > 0) w.positive_indices.push_back(static_cast<int>(s));
  }
  for (auto& kv : spaces) w.eigenspaces.emplace_back(kv.first, kv.second);
  return w;
}

Eigen::MatrixXd Representation::operator()(const GroupElement& g) const {
  Eigen::MatrixXd A = adjoint_rep(g, basis);
  if (level > 1) A = compound_matrix(A, level);
  det_normalize(A);
  return A;
}

Representation make_representation(int M, int N, int d) {
  Representation r;
  r.level = d;
  r.basis = v_basis(M, N);
  r.wspace = w_space(M, N, d);
  return r;
}

BlockFormReport verify_block_form(const std::vector<GroupElement>& gens,
                                  const std::vector<double>& weights, int L,
                                  double tol) {
  if (gens.empty()) {
    throw std::invalid_argument("generator set is empty");
  }
  if (weights.size() != gens.size()) {
    throw std::invalid_argument("one weight per generator required");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1");
  }
  const int M = gens[0].M, N = gens[0].N;
  for (const auto& g : gens) {
    if (g.M != M || g.N != N) {
      throw std::invalid_argument("generators use different block splits");
    }
  }
  if (L < 1) throw std::invalid_argument("product length bound must be >= 1");

  BlockFormReport rep;
  rep.L = L;
  rep.all_in_P = true;
  for (const auto& g : gens) {
    AKUDecomposition d;
    std::string why;
    if (!aku_impl(g, tol, &d, &why)) {
      rep.all_in_P = false;
      rep.note = "a generator is outside the block group (" + why + ")";
      return rep;
    }
    rep.theta1.push_back(d.t);
  }
  for (size_t i = 0; i < gens.size(); ++i) {
    rep.c1 += weights[i] * rep.theta1[i];
  }
  rep.c1_positive = rep.c1 > 0.0;

  // Rank and witness probe over all products of length <= L, capped so the
  // enumeration stays small.
  size_t budget = 20000;
  std::vector<GroupElement> frontier = gens;
  std::vector<Eigen::MatrixXd> alphas;
  std::vector<double> ts;
  auto record = [&](const GroupElement& g) {
    AKUDecomposition d = aku_decompose(g, std::max(tol, 1e-6));
    alphas.push_back(d.alpha);
    ts.push_back(d.t);
  };
  for (const auto& g : frontier) record(g);
  for (int len = 2; len <= L; ++len) {
    if (frontier.size() * gens.size() > budget) {
      rep.note += "product enumeration capped before length " +
                  std::to_string(len) + "; ";
      break;
    }
    std::vector<GroupElement> next;
    next.reserve(frontier.size() * gens.size());
    for (const auto& p : frontier) {
      for (const auto& g : gens) {
        next.push_back(group_mul(g, p));
      }
    }
    for (const auto& g : next) record(g);
    frontier.swap(next);
  }

  Eigen::MatrixXd R(static_cast<int>(alphas.size()), M * N);
  for (size_t i = 0; i < alphas.size(); ++i) {
    Eigen::Map<const Eigen::VectorXd> v(alphas[i].data(), M * N);
    R.row(static_cast<int>(i)) = v.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-8 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++rep.lie_rank;
  }
  rep.rank_pass = rep.lie_rank == M * N;
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i].cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + std::abs(ts[i])) &&
        std::abs(ts[i]) > 1e-8) {
      rep.unipotent_witness = true;
      break;
    }
  }
  rep.proxy_pass = rep.rank_pass && rep.unipotent_witness;
  rep.note +=
      "membership and the mean a-part are decisive; the rank and trivial-u "
      "witness over short products are heuristic evidence, not a proof";
  return rep;
}

}  // namespace fw
