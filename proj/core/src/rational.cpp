#include "freqdim/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "freqdim/errors.hpp"

namespace freqdim {

static BigInt parse_bigint(const std::string& s) {
  if (s.empty()) throw ConfigError("empty integer literal");
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) throw ConfigError("bad integer literal: " + s);
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      throw ConfigError("bad integer literal: " + s);
  return BigInt(s);
}

Rational parse_rational(const std::string& raw) {
  // tolerate surrounding whitespace; config values arrive as quoted strings
  const auto lo = raw.find_first_not_of(" \t\r\n");
  if (lo == std::string::npos) throw ConfigError("empty numeric literal");
  const std::string s = raw.substr(lo, raw.find_last_not_of(" \t\r\n") - lo + 1);
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_bigint(s.substr(0, slash));
    BigInt den = parse_bigint(s.substr(slash + 1));
    if (den == 0) throw ConfigError("zero denominator: " + s);
    return Rational(num, den);
  }
  // decimal with optional exponent
  std::string t = s;
  long expo = 0;
  auto epos = t.find_first_of("eE");
  if (epos != std::string::npos) {
    expo = std::strtol(t.c_str() + epos + 1, nullptr, 10);
    t = t.substr(0, epos);
  }
  bool neg = false;
  std::size_t i = 0;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    neg = t[0] == '-';
    i = 1;
  }
  BigInt digits = 0;
  long frac_len = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < t.size(); ++i) {
    char c = t[i];
    if (c == '.') {
      if (seen_dot) throw ConfigError("bad numeric literal: " + s);
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_dot) ++frac_len;
      seen_digit = true;
    } else {
      throw ConfigError("bad numeric literal: " + s);
    }
  }
  if (!seen_digit) throw ConfigError("bad numeric literal: " + s);
  Rational r(digits);
  long shift = expo - frac_len;
  BigInt p10 = 1;
  for (long k = 0; k < std::labs(shift); ++k) p10 *= 10;
  if (shift >= 0)
    r *= Rational(p10);
  else
    r /= Rational(p10);
  return neg ? -r : r;
}

std::string format_rational(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational pow_rational(const Rational& base, unsigned e) {
  Rational acc = 1, b = base;
  while (e) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

double ln_bigint(const BigInt& n) {
  if (n <= 0) throw ValidationError("ln of non-positive integer");
  const std::size_t bits = boost::multiprecision::msb(n) + 1;
  if (bits <= 62) return std::log(n.convert_to<double>());
  // keep the top 62 bits as a double mantissa
  const std::size_t drop = bits - 62;
  const double top = (n >> drop).convert_to<double>();
  return std::log(top) + static_cast<double>(drop) * std::log(2.0);
}

double ln_rational(const Rational& r) {
  if (r <= 0) throw ValidationError("ln of non-positive rational");
  return ln_bigint(boost::multiprecision::numerator(r)) -
         ln_bigint(boost::multiprecision::denominator(r));
}

}  // namespace freqdim
