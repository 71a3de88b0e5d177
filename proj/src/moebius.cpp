#include "fractalwalk/moebius.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "fractalwalk/contfrac.hpp"

namespace fw {

std::optional<Rat> apply_moebius(const std::array<Int, 4>& g,
                                 const std::optional<Rat>& x) {
  const Int &a = g[0], &b = g[1], &c = g[2], &d = g[3];
  if (a * d - b * c == 0) throw std::invalid_argument("singular moebius matrix");
  if (!x.has_value()) {  // image of infinity is a/c
    if (c == 0) return std::nullopt;
    return Rat(a, c);
  }
  Rat num = Rat(a) * *x + Rat(b);
  Rat den = Rat(c) * *x + Rat(d);
  if (den == 0) return std::nullopt;
  return num / den;
}

double apply_moebius(const Eigen::Matrix2d& g, double x) {
  return (g(0, 0) * x + g(0, 1)) / (g(1, 0) * x + g(1, 1));
}

std::complex<double> apply_moebius_h(const Eigen::Matrix2d& g,
                                     std::complex<double> z) {
  if (g.determinant() < 0) z = std::conj(z);
  std::complex<double> num = g(0, 0) * z + g(0, 1);
  std::complex<double> den = g(1, 0) * z + g(1, 1);
  return num / den;
}

double hyperbolic_distance(std::complex<double> z, std::complex<double> w) {
  if (!(z.imag() > 0) || !(w.imag() > 0))
    throw std::invalid_argument("points must lie in the upper half plane");
  double q = std::norm(z - w) / (2.0 * z.imag() * w.imag());
  return std::acosh(1.0 + q);
}

std::vector<MoebiusMap> fn_preset(int N) {
  if (N < 1) throw std::invalid_argument("branch count must be >= 1");
  std::vector<MoebiusMap> out;
  for (int n = 1; n <= N; ++n) {
    MoebiusMap f;
    f.m << 0, 1, 1, double(n);
    f.integer_flag = true;
    f.int_entries = {0, 1, 1, (long long)n};
    out.push_back(f);
  }
  return out;
}

RatEnclosure fn_word_interval(const std::vector<int>& symbols, int N) {
  Rat lo(0), hi(1);
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) {
    int n = *it + 1;
    if (n < 1 || n > N) throw std::invalid_argument("symbol out of range");
    // x -> 1/(n+x) reverses orientation
    Rat nlo = Rat(1) / (Rat(n) + hi);
    Rat nhi = Rat(1) / (Rat(n) + lo);
    lo = nlo;
    hi = nhi;
  }
  return RatEnclosure{lo, hi};
}

std::vector<std::array<Int, 4>> integer_matrices(
    const std::vector<MoebiusMap>& maps) {
  std::vector<std::array<Int, 4>> out;
  for (auto& f : maps) {
    if (!f.integer_flag)
      throw std::invalid_argument("map lacks an exact integer representative");
    out.push_back({Int(f.int_entries[0]), Int(f.int_entries[1]),
                   Int(f.int_entries[2]), Int(f.int_entries[3])});
  }
  return out;
}

ReducedPoint reduce_to_fundamental_domain(std::complex<double> z,
                                          int max_steps) {
  if (!(z.imag() > 0))
    throw std::invalid_argument("point must lie in the upper half plane");
  ReducedPoint out;
  out.steps = 0;
  for (int it = 0; it < max_steps; ++it) {
    long long t = (long long)std::llround(z.real());
    if (t != 0) {
      z -= double(t);
      out.word.push_back(ReductionStep{'T', -t});
      out.steps += 1;
    }
    if (std::norm(z) < 1.0 - 1e-15) {
      z = -1.0 / z;
      out.word.push_back(ReductionStep{'S', 0});
      out.steps += 1;
    } else {
      break;
    }
  }
  out.z = z;
  return out;
}

namespace {

// exact upper half-plane point W(u) for a rational 2x2 matrix W and
// u = x + y i with rational x, y > 0
struct ExactPoint {
  Rat re, im;
};

// W(u) for u = x + yi; a determinant < 0 acts through the conjugate of u,
// which leaves the real part unchanged and flips the sign of the imaginary
// part, so orienting after the fact is exact
ExactPoint exact_apply(const std::array<Rat, 4>& w, const Rat& x, const Rat& y) {
  const Rat &a = w[0], &b = w[1], &c = w[2], &d = w[3];
  Rat cxd = c * x + d;
  Rat den = cxd * cxd + c * c * y * y;
  if (den == 0) throw std::runtime_error("orbit hit the pole");
  Rat re = ((a * x + b) * cxd + a * c * y * y) / den;
  Rat im = y * (a * d - b * c) / den;
  if (im < 0) im = -im;
  if (im == 0) throw std::runtime_error("orbit left the half plane");
  return ExactPoint{re, im};
}

Int round_rat(const Rat& r) { return floor_rat(r + Rat(1, 2)); }

// exact standard-domain reduction of W(u); returns the reduced point
ExactPoint exact_reduce(std::array<Rat, 4> w, const Rat& x, const Rat& y,
                        int max_steps = 100000) {
  ExactPoint z = exact_apply(w, x, y);
  for (int it = 0; it < max_steps; ++it) {
    Int t = round_rat(z.re);
    if (t != 0) {
      // left-multiply by the translation by -t
      w = {w[0] - Rat(t) * w[2], w[1] - Rat(t) * w[3], w[2], w[3]};
      z.re -= Rat(t);
    }
    if (z.re * z.re + z.im * z.im < 1) {
      // left-multiply by the inversion
      w = {-w[2], -w[3], w[0], w[1]};
      z = exact_apply(w, x, y);
    } else {
      break;
    }
  }
  return z;
}

}  // namespace

UrProbeResult ur_probe(const std::vector<MoebiusMap>& maps, const Word& word,
                       const Rat& conj_offset) {
  auto ints = integer_matrices(maps);
  UrProbeResult out;
  out.max_height = 0;
  // composite in coding order: m_{b_1} * m_{b_2} * ... * m_{b_k}
  std::array<Int, 4> m{1, 0, 0, 1};
  const Rat& c = conj_offset;
  for (int s : word.symbols) {
    if (s < 0 || s >= int(ints.size()))
      throw std::invalid_argument("symbol out of range");
    const auto& g = ints[size_t(s)];
    m = {m[0] * g[0] + m[1] * g[2], m[0] * g[1] + m[1] * g[3],
         m[2] * g[0] + m[3] * g[2], m[2] * g[1] + m[3] * g[3]};
    // conjugated orbit point: (T_c m T_{-c})(i) = (T_c m)(i - c); the
    // translations are isometries, so the offset costs no precision
    std::array<Rat, 4> w{Rat(m[0]) + c * Rat(m[2]), Rat(m[1]) + c * Rat(m[3]),
                         Rat(m[2]), Rat(m[3])};
    ExactPoint z = exact_reduce(w, -c, Rat(1));
    double re = to_double(z.re), im = to_double(z.im);
    double q = (re * re + (im - 1.0) * (im - 1.0)) / (2.0 * im);
    double h = std::acosh(1.0 + q);
    out.heights.push_back(h);
    out.max_height = std::max(out.max_height, h);
  }
  return out;
}

QuotientCheckResult bounded_quotient_check(const Word& word, int N, int depth) {
  if (N < 1) throw std::invalid_argument("branch count must be >= 1");
  std::vector<int> symbols(
      word.symbols.begin(),
      word.symbols.begin() +
          std::min<size_t>(word.symbols.size(), size_t(std::max(depth, 0))));
  RatEnclosure enc = fn_word_interval(symbols, N);
  CFExpansion cf = cf_validated(enc, int(symbols.size()) + 2);
  QuotientCheckResult out;
  out.digits = cf.digits;
  out.certified = cf.certified_length();
  out.digits_match_word = true;
  out.all_within_branch_count = true;
  for (size_t i = 0; i < cf.digits.size(); ++i) {
    long long expect = i < symbols.size() ? symbols[i] + 1 : -1;
    if (cf.digits[i] != expect) out.digits_match_word = false;
    if (cf.digits[i] > N) out.all_within_branch_count = false;
  }
  out.shortfall = !symbols.empty() && out.certified == 0;
  return out;
}

std::vector<MoebiusMap> load_moebius_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open moebius file: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  std::vector<MoebiusMap> out;
  for (auto& jm : j.at("maps")) {
    MoebiusMap g;
    auto& rows = jm.at("matrix");
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        g.m(r, c) = rows.at(size_t(r)).at(size_t(c)).get<double>();
    if (jm.contains("integer") && jm.at("integer").get<bool>()) {
      g.integer_flag = true;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          double v = g.m(r, c);
          if (std::abs(v - std::round(v)) > 1e-9)
            throw std::invalid_argument("integer marker on non-integer matrix");
          g.int_entries[size_t(2 * r + c)] = (long long)std::llround(v);
        }
      long long det = g.int_entries[0] * g.int_entries[3] -
                      g.int_entries[1] * g.int_entries[2];
      if (det != 1 && det != -1)
        throw std::invalid_argument("integer moebius map must have det +-1");
    }
    if (g.m.determinant() == 0)
      throw std::invalid_argument("singular moebius matrix");
    out.push_back(g);
  }
  return out;
}

}  // namespace fw
