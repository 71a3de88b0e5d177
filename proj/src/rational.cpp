#include "fractalwalk/rational.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace fw {

Int floor_div(const Int& a, const Int& b) {
  Int q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

Int floor_rat(const Rat& r) {
  return floor_div(boost::multiprecision::numerator(r),
                   boost::multiprecision::denominator(r));
}

RatEnclosure exact_enclosure(const Rat& x) { return RatEnclosure{x, x}; }

RatEnclosure quadratic_enclosure(const Int& p, const Int& q, const Int& d,
                                 const Int& r, int prec_digits) {
  if (r == 0) throw std::invalid_argument("quadratic_enclosure: zero denominator");
  if (d < 0) throw std::invalid_argument("quadratic_enclosure: negative radicand");
  // scale sqrt(d) by 10^prec so the integer square root carries the digits
  Int scale = 1;
  for (int i = 0; i < prec_digits; ++i) scale *= 10;
  Int s = boost::multiprecision::sqrt(Int(d * scale * scale));  // floor sqrt
  Rat lo_s(s, scale), hi_s(s + 1, scale);                  // lo_s <= sqrt(d) <= hi_s
  Rat a, b;
  if (q >= 0) {
    a = (Rat(p) + Rat(q) * lo_s) / Rat(r);
    b = (Rat(p) + Rat(q) * hi_s) / Rat(r);
  } else {
    a = (Rat(p) + Rat(q) * hi_s) / Rat(r);
    b = (Rat(p) + Rat(q) * lo_s) / Rat(r);
  }
  if (r < 0) std::swap(a, b);
  return RatEnclosure{a, b};
}

Rat parse_rational(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw std::invalid_argument("empty number");
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    Int p(t.substr(0, slash)), q(t.substr(slash + 1));
    if (q == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rat(p, q);
  }
  bool neg = false;
  size_t i = 0;
  if (t[0] == '+' || t[0] == '-') {
    neg = t[0] == '-';
    i = 1;
  }
  Int num = 0, den = 1;
  bool seen_dot = false, seen_digit = false;
  for (; i < t.size(); ++i) {
    char c = t[i];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("bad number: " + s);
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      num = num * 10 + (c - '0');
      if (seen_dot) den *= 10;
      seen_digit = true;
    } else {
      throw std::invalid_argument("bad number: " + s);
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad number: " + s);
  Rat r(num, den);
  return neg ? -r : r;
}

std::vector<std::pair<Int, Int>> convergents_from_digits(
    const std::vector<long long>& digits) {
  std::vector<std::pair<Int, Int>> out;
  Int pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
  Int p0 = 0, q0 = 1;    // p_0, q_0  (value [0;...])
  for (long long a : digits) {
    if (a < 1) throw std::invalid_argument("continued fraction digit < 1");
    Int p = Int(a) * p0 + pm1;
    Int q = Int(a) * q0 + qm1;
    out.emplace_back(p, q);
    pm1 = p0;
    qm1 = q0;
    p0 = p;
    q0 = q;
  }
  return out;
}

ParsedAlpha parse_alpha(const std::string& s, int prec_digits) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t == "golden") {  // (sqrt(5)-1)/2, the fractional part of the golden ratio
    return ParsedAlpha{quadratic_enclosure(-1, 1, 5, 2, prec_digits), false,
                       "golden"};
  }
  if (t == "sqrt2") {  // sqrt(2)-1
    return ParsedAlpha{quadratic_enclosure(-1, 1, 2, 1, prec_digits), false,
                       "sqrt2"};
  }
  if (t == "sqrt3") {  // sqrt(3)-1
    return ParsedAlpha{quadratic_enclosure(-1, 1, 3, 1, prec_digits), false,
                       "sqrt3"};
  }
  if (t.rfind("cf:", 0) == 0) {
    std::vector<long long> digits;
    std::stringstream ss(t.substr(3));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      digits.push_back(std::stoll(item));
      if (digits.back() < 1)
        throw std::invalid_argument("cf digit must be >= 1: " + s);
    }
    if (digits.empty()) throw std::invalid_argument("empty cf: " + s);
    auto conv = convergents_from_digits(digits);
    Rat v(conv.back().first, conv.back().second);
    std::string canon = "cf:";
    for (size_t i = 0; i < digits.size(); ++i) {
      if (i) canon += ',';
      canon += std::to_string(digits[i]);
    }
    return ParsedAlpha{exact_enclosure(v), true, canon};
  }
  Rat v = parse_rational(t);
  std::ostringstream canon;
  canon << boost::multiprecision::numerator(v) << "/"
        << boost::multiprecision::denominator(v);
  return ParsedAlpha{exact_enclosure(v), true, canon.str()};
}

}  // namespace fw
