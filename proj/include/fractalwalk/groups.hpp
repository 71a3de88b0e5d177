#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fractalwalk/ifs.hpp"

namespace fw {

// Element of the projective linear group on R^D with the block split D = M+N.
// The stored representative always has |det| = 1; comparisons must allow a
// global sign flip.
struct GroupElement {
  Eigen::MatrixXd m;
  int M = 0;
  int N = 0;

  int dim() const { return M + N; }
};

// Normalizes |det| to 1. Throws std::invalid_argument on a singular or
// ill-shaped matrix.
GroupElement make_group_element(const Eigen::MatrixXd& m, int M, int N);

GroupElement group_mul(const GroupElement& a, const GroupElement& b);
GroupElement group_inv(const GroupElement& g);
GroupElement group_identity(int M, int N);

// True when A and B agree entrywise up to one global sign, within tol
// relative to the larger norm.
bool same_projective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     double tol = 1e-9);

// Expansion rate of the diagonal flow on the M x N block: 1/M + 1/N.
double gamma_rate(int M, int N);

// Diagonal flow element diag(e^{t/M} I_M, e^{-t/N} I_N).
GroupElement flow_a(double t, int M, int N);

// Unipotent element [[I_M, -alpha], [0, I_N]] for an M x N matrix alpha.
GroupElement unipotent_u(const Eigen::MatrixXd& alpha, int M, int N);

// Block-orthogonal element O1 (+) O2.
GroupElement block_k(const Eigen::MatrixXd& O1, const Eigen::MatrixXd& O2,
                     int M, int N);

// g = flow_a(t) * block_k(k) * unipotent_u(alpha), the unique factorization
// available inside the block group.
struct AKUDecomposition {
  double t = 0.0;
  Eigen::MatrixXd k;      // (M+N) x (M+N), block orthogonal
  Eigen::MatrixXd alpha;  // M x N
};

// True iff g lies in the block group within tol: vanishing lower-left block
// and conformal diagonal blocks.
bool in_block_group(const GroupElement& g, double tol = 1e-7);

// Throws std::domain_error when g is outside the block group.
AKUDecomposition aku_decompose(const GroupElement& g, double tol = 1e-7);

Eigen::MatrixXd aku_reconstruct(const AKUDecomposition& d, int M, int N);

// The group element whose projective action on M x N matrices is
// x |-> ratio * left * x * right + trans, namely
// unipotent_u(-trans)^{-1} ... i.e. u_{trans} * a_{log(ratio)/gamma} *
// (left (+) right^T). Throws std::invalid_argument on dimension mismatch.
GroupElement similarity_to_group(const AlgebraicSimilarity& map, int M, int N);

// Inverse of similarity_to_group: the factor the random walk multiplies by
// when the driving word emits this map.
GroupElement walk_generator(const AlgebraicSimilarity& map, int M, int N);

// Walk generators for every branch of the system, in branch order.
// Similarity systems are widened to one-column algebraic form (N = 1).
std::vector<GroupElement> walk_generators(const IFSDescription& ifs, int M,
                                          int N);

// Frobenius-orthonormal basis of traceless D x D matrices: off-diagonal
// units E_{ij} in lexicographic (i,j) order, then D-1 traceless diagonal
// vectors. chi_class holds the weight of each vector under conjugation by
// the diagonal flow, in units of gamma_rate (+1, 0, or -1).
struct VBasis {
  int M = 0;
  int N = 0;
  double gamma = 0.0;
  std::vector<Eigen::MatrixXd> mats;
  std::vector<int> chi_class;

  int D() const { return M + N; }
  int dim() const { return static_cast<int>(mats.size()); }
  std::vector<double> weights() const;
  // Indices of the weight +gamma vectors (the upper-right block units).
  std::vector<int> positive_indices() const;
};

VBasis v_basis(int M, int N);

// Matrix of v |-> g v g^{-1} on traceless matrices, in the v_basis
// coordinates. Well defined on projective classes.
Eigen::MatrixXd adjoint_rep(const GroupElement& g, const VBasis& basis);

// d-th compound matrix: entries are d x d minors det A[S, T] over
// lexicographically ordered index subsets. Multiplicative in A.
Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& A, int d);

// Action induced on the d-th wedge power by a linear map on V, in the
// lexicographic wedge basis. Identical to compound_matrix; named for the
// representation-level call sites.
Eigen::MatrixXd exterior_power_rep(const Eigen::MatrixXd& A_on_V, int d);

// Rescales A to |det| = 1 in place and returns log|det| of the input.
// Throws std::invalid_argument when A is numerically singular.
double det_normalize(Eigen::MatrixXd& A);

// Exact weight-space split of the d-th wedge power of the adjoint basis.
// Wedge coordinates are indexed by d-subsets of basis indices; the flow
// weight of a coordinate is the sum of the member classes, an integer
// multiple of gamma. Computed combinatorially, no numeric eigensolver.
struct WeightSpaceBasis {
  int M = 0;
  int N = 0;
  int d = 0;
  double gamma = 0.0;
  int dimV = 0;
  std::vector<std::vector<int>> subsets;  // lexicographic d-subsets
  std::vector<int> chi_class;             // per wedge coordinate
  // (class, wedge coordinate indices), sorted by class descending.
  std::vector<std::pair<int, std::vector<int>>> eigenspaces;
  std::vector<int> positive_indices;  // coordinates spanning the positive part

  int dim() const { return static_cast<int>(subsets.size()); }
  // Distinct weights in descending order.
  std::vector<double> psi() const;
};

WeightSpaceBasis w_space(int M, int N, int d);

// Representation at wedge level d: g -> compound of Ad(g), |det| pinned to 1.
struct Representation {
  int level = 1;
  VBasis basis;
  WeightSpaceBasis wspace;

  int dimension() const { return wspace.dim(); }
  Eigen::MatrixXd operator()(const GroupElement& g) const;
};

Representation make_representation(int M, int N, int d);

struct BlockFormReport {
  bool all_in_P = false;
  std::vector<double> theta1;  // per generator a-part
  double c1 = 0.0;             // weighted mean of theta1
  bool c1_positive = false;
  int lie_rank = 0;  // rank of the span of unipotent parts over short products
  bool rank_pass = false;
  bool unipotent_witness = false;  // some product has trivial u-part, t != 0
  bool proxy_pass = false;         // rank_pass && unipotent_witness
  int L = 3;                       // product length bound used
  std::string note;
};

// Checks the block-form hypotheses on a weighted generator set. Membership
// and the mean a-part are decisive; the rank and witness probe over products
// of length <= L is a heuristic and is labeled as such in the note.
BlockFormReport verify_block_form(const std::vector<GroupElement>& gens,
                                  const std::vector<double>& weights, int L = 3,
                                  double tol = 1e-7);

}  // namespace fw
