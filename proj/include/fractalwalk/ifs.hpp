#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fractalwalk/rational.hpp"

namespace fw {

// Similarity x -> ratio * orth * x + trans on R^d.
struct Similarity {
  double ratio;
  Eigen::MatrixXd orth;
  Eigen::VectorXd trans;
  int dim() const { return int(trans.size()); }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    return ratio * (orth * x) + trans;
  }
  static Similarity identity(int d);
};

// compose(f,g)(x) = f(g(x))
Similarity compose(const Similarity& f, const Similarity& g);

// Matrix-variable similarity A -> ratio * left * A * right + trans on
// M x N real matrices, with left (M x M) and right (N x N) orthogonal.
// R^d embeds as the d x 1 case with right = (1).
struct AlgebraicSimilarity {
  double ratio;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  Eigen::MatrixXd trans;
  int rows() const { return int(trans.rows()); }
  int cols() const { return int(trans.cols()); }
  Eigen::MatrixXd operator()(const Eigen::MatrixXd& x) const {
    return ratio * (left * x * right) + trans;
  }
  static AlgebraicSimilarity identity(int m, int n);
};

AlgebraicSimilarity compose(const AlgebraicSimilarity& f,
                            const AlgebraicSimilarity& g);
AlgebraicSimilarity widen(const Similarity& f);

// Exact 1-d affine map x -> a x + b with rational data.
struct RationalAffine {
  Rat a, b;
  Rat operator()(const Rat& x) const { return a * x + b; }
};

// Symbol word (b_1, ..., b_n) over the alphabet, 0-based indices.
// forward() is (b_1..b_n); reversed() is (b_n..b_1).  Keeping both as named
// accessors guards the one place an order mixup would be silent.
struct Word {
  std::vector<int> symbols;
  int length() const { return int(symbols.size()); }
  const std::vector<int>& forward() const { return symbols; }
  std::vector<int> reversed() const {
    return std::vector<int>(symbols.rbegin(), symbols.rend());
  }
};

enum class MapKind { similarity, algebraic, moebius_family };

struct IFSDescription {
  MapKind kind = MapKind::similarity;
  std::vector<Similarity> sims;            // kind == similarity
  std::vector<AlgebraicSimilarity> algs;   // kind == algebraic
  int moebius_branches = 0;                // kind == moebius_family
  std::vector<double> weights;             // positive, sums to 1
  std::vector<RationalAffine> exact1d;     // exact mirror when 1-d rational
  std::string name;                        // preset spec or file path
  std::string osc_note;                    // documented separation status

  int alphabet_size() const;
  int ambient_dim() const;                 // d, or M*N for algebraic kind
  bool has_exact1d() const { return !exact1d.empty(); }
  double ratio_of(int e) const;
  void validate() const;                   // throws std::invalid_argument
};

struct CodedPoint {
  Eigen::MatrixXd value;   // d x 1 for vector systems, M x N for matrix ones
  double error_radius;     // certified bound on the distance to the coded point
};

// Composite over the word in coding order: word (b_1..b_n) yields
// phi_{b_1} after phi_{b_2} after ... after phi_{b_n}.  Empty word ->
// identity with ratio 1 (documented, not an error).
Similarity compose_prefix(const IFSDescription& ifs, const Word& w);
AlgebraicSimilarity compose_prefix_algebraic(const IFSDescription& ifs,
                                             const Word& w);
RationalAffine compose_prefix_exact(const IFSDescription& ifs, const Word& w);

// Image of the anchor under the prefix composite, with error radius
// (prod of ratios) * (|anchor| + attractor radius).  Anchor defaults to 0.
CodedPoint coding_point(const IFSDescription& ifs, const Word& w);
CodedPoint coding_point(const IFSDescription& ifs, const Word& w,
                        const Eigen::MatrixXd& anchor);

// Exact interval [lo, hi] containing the attractor of a 1-d rational system.
std::pair<Rat, Rat> attractor_interval_exact(const IFSDescription& ifs);

// Radius of a ball about the origin containing the attractor:
// (sum over maps of |trans|) / (1 - max ratio).
double attractor_radius(const IFSDescription& ifs);

Word sample_word(const IFSDescription& ifs, int n, uint64_t seed,
                 uint64_t stream = 0);

// sum_e mu(e) * log(ratio_e); negative iff contracting on average.
double contraction_on_average(const IFSDescription& ifs);

struct DimensionResult {
  double s;                               // root of sum_e ratio_e^s = 1
  std::vector<double> natural_weights;    // ratio_e^s
  bool degenerate;                        // single-map system: s = 0
};
DimensionResult similarity_dimension(const IFSDescription& ifs);

// Advisory check: affine span of depth-k images of a generic point should
// have full dimension; returns warnings, never throws.
std::vector<std::string> irreducibility_probe(const IFSDescription& ifs,
                                              int depth = 3);

// Catalog: cantor3, middle_eps(<eps>), ex1314, koch, sierpinski,
// cantor_x_cantor, fN(<N>).  Parameters also accepted as "name:param".
IFSDescription preset(const std::string& spec);
IFSDescription load_ifs_file(const std::string& path);
// Accepts a preset spec or a path to a JSON description file.
IFSDescription resolve_system(const std::string& spec);

}  // namespace fw
