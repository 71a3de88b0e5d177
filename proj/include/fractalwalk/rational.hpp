#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fw {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(const Int& n) { return n.convert_to<double>(); }

Int floor_div(const Int& a, const Int& b);  // floor(a/b), b > 0
Int floor_rat(const Rat& r);

// A certified interval lo <= x <= hi holding an exactly represented or
// irrational target.  exact() means the two endpoints coincide.
struct RatEnclosure {
  Rat lo, hi;
  bool exact() const { return lo == hi; }
  Rat width() const { return hi - lo; }
  double mid() const { return to_double((lo + hi) / 2); }
  bool contains(const Rat& x) const { return lo <= x && x <= hi; }
};

RatEnclosure exact_enclosure(const Rat& x);
// enclosure of (p + q*sqrt(d)) / r with width <= 10^-prec_digits, d >= 0
RatEnclosure quadratic_enclosure(const Int& p, const Int& q, const Int& d,
                                 const Int& r, int prec_digits);

// Parse "p/q", a decimal string, or an integer into an exact rational.
Rat parse_rational(const std::string& s);

// Parse a target number: named constants ("golden", "sqrt2", "sqrt3"),
// "cf:a1,a2,..." (finite continued fraction [0; a1, a2, ...]), or any
// parse_rational form.  Named irrationals come back as tight enclosures.
struct ParsedAlpha {
  RatEnclosure enc;
  bool is_rational;
  std::string canonical;  // normalized description for manifests
};
ParsedAlpha parse_alpha(const std::string& s, int prec_digits = 60);

// continuants: digits (a1..an) of [0; a1, a2, ...] -> convergents (p_k, q_k)
std::vector<std::pair<Int, Int>> convergents_from_digits(
    const std::vector<long long>& digits);

}  // namespace fw
