#include <doctest.h>

#include <cmath>

#include "freqdim/errors.hpp"
#include "freqdim/rational.hpp"

using namespace freqdim;

TEST_SUITE_BEGIN("rational");

TEST_CASE("parse accepts integers, fractions, decimals") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("-2") == Rational(-2));
  CHECK(parse_rational("7/16") == Rational(7, 16));
  CHECK(parse_rational("-3/9") == Rational(-1, 3));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("0.1") == Rational(1, 10));  // exact, not the double 0.1
  CHECK(parse_rational("1.5e-3") == Rational(3, 2000));
  CHECK(parse_rational("2e3") == Rational(2000));
  CHECK(parse_rational("  1/2 ") == Rational(1, 2));
}

TEST_CASE("parse rejects junk") {
  CHECK_THROWS_AS(parse_rational("abc"), ConfigError);
  CHECK_THROWS_AS(parse_rational(""), ConfigError);
  CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rational("1.2.3"), ConfigError);
}

TEST_CASE("format round trips") {
  for (const char* s : {"0", "1", "-5", "1/2", "-7/3", "355/113"}) {
    Rational r = parse_rational(s);
    CHECK(format_rational(r) == s);
    CHECK(parse_rational(format_rational(r)) == r);
  }
  CHECK(format_rational(parse_rational("0.2")) == "1/5");
}

TEST_CASE("pow and to_double") {
  CHECK(pow_rational(Rational(2, 3), 5) == Rational(32, 243));
  CHECK(pow_rational(Rational(7, 2), 0) == Rational(1));
  CHECK(to_double(Rational(1, 2)) == 0.5);
  CHECK(to_double(Rational(1, 4)) == 0.25);
}

TEST_CASE("ln of big integers and rationals") {
  BigInt p = BigInt(1) << 64;
  CHECK(std::abs(ln_bigint(p) - 64 * std::log(2.0)) < 1e-12 * 64 * std::log(2.0));
  BigInt t = 1;
  for (int i = 0; i < 50; ++i) t *= 10;
  CHECK(std::abs(ln_bigint(t) - 50 * std::log(10.0)) < 1e-12 * 50 * std::log(10.0));
  CHECK(std::abs(ln_rational(Rational(1, 3)) + std::log(3.0)) < 1e-14);
  CHECK(std::abs(ln_rational(Rational(8)) - 3 * std::log(2.0)) < 1e-14);
  CHECK(ln_rational(Rational(1)) == 0.0);
}

TEST_SUITE_END();
