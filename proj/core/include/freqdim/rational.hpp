#pragma once
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace freqdim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "3", "-2", "p/q" and plain decimals like "0.25" or "1.5e-3".
// Decimals are read digit-by-digit, so "0.1" means exactly 1/10.
Rational parse_rational(const std::string& s);

// "p/q" for non-integers, plain integer string otherwise. parse_rational inverse.
std::string format_rational(const Rational& r);

double to_double(const Rational& r);

Rational pow_rational(const Rational& base, unsigned e);

// Natural log of a huge positive integer via its top bits; relative error ~1e-15.
double ln_bigint(const BigInt& n);

// Natural log of a positive rational.
double ln_rational(const Rational& r);

}  // namespace freqdim
