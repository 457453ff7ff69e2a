#include <doctest.h>

#include <cstdint>
#include <sstream>
#include <vector>

#include "freqdim/digits.hpp"
#include "freqdim/errors.hpp"
#include "freqdim/rng.hpp"

using namespace freqdim;
using namespace freqdim::digits;

namespace {

// independent long-division oracle for base-m expansions
std::vector<Digit> long_division(BigInt num, const BigInt& den, Digit base, std::size_t count) {
  std::vector<Digit> out;
  for (std::size_t i = 0; i < count; ++i) {
    num *= base;
    BigInt d = num / den;
    out.push_back(static_cast<Digit>(d));
    num -= d * den;
  }
  return out;
}

// independent Euclid oracle for continued-fraction digits of num/den in (0,1)
std::vector<Digit> euclid_cf(BigInt num, BigInt den) {
  std::vector<Digit> out;
  while (num != 0) {
    BigInt a = den / num;
    out.push_back(static_cast<Digit>(a));
    BigInt r = den - a * num;
    den = num;
    num = r;
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("digits");

TEST_CASE("binary expansion of 1/3 alternates") {
  // 1/3 = 0.010101..._2: digit at even index 0, odd index 1
  std::vector<Digit> d = expand_rational(1, 3, 2, 16);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == Digit(k % 2));
}

TEST_CASE("expansions match long division") {
  struct Case { int num, den; Digit base; };
  for (Case c : {Case{1, 7, 10}, Case{3, 8, 2}, Case{5, 12, 3}, Case{22, 113, 7}}) {
    auto got = expand_rational(c.num, c.den, c.base, 40);
    auto want = long_division(c.num, c.den, c.base, 40);
    CHECK(got == want);
  }
}

TEST_CASE("rational streams are eventually periodic and O(1) at large indices") {
  DigitStream s = DigitStream::rational_expansion(1, 7, 10);
  // 1/7 = 0.(142857): cycle length 6, no preperiod
  const Digit cycle[6] = {1, 4, 2, 8, 5, 7};
  for (std::uint64_t i : {0ull, 5ull, 6ull, 1000ull, 999999999999ull})
    CHECK(s.at(i) == cycle[i % 6]);
  CHECK(!s.length().has_value());
  // terminating fraction: zero tail
  DigitStream t = DigitStream::rational_expansion(3, 8, 2);
  CHECK(t.at(0) == 0);
  CHECK(t.at(1) == 1);
  CHECK(t.at(2) == 1);
  CHECK(t.at(3) == 0);
  CHECK(t.at(5000) == 0);
}

TEST_CASE("cf expansion matches Euclid") {
  struct Case { int num, den; };
  for (Case c : {Case{7, 16}, Case{5, 8}, Case{1, 2}, Case{355, 1000}, Case{89, 144}}) {
    CfExpansion e = expand_cf(c.num, c.den, 100);
    CHECK(e.terminated);
    CHECK(e.digits == euclid_cf(c.num, c.den));
  }
  CHECK(expand_cf(7, 16, 100).digits == std::vector<Digit>{2, 3, 2});
}

TEST_CASE("cf stream reports its length") {
  DigitStream s = DigitStream::cf_expansion(7, 16);
  REQUIRE(s.length().has_value());
  CHECK(*s.length() == 3);
  CHECK(s.at(0) == 2);
  CHECK(s.at(1) == 3);
  CHECK(s.at(2) == 2);
  CHECK_THROWS_AS(s.at(3), ValidationError);
}

TEST_CASE("continuants of all-ones digits are Fibonacci") {
  std::vector<Digit> ones(10, 1);
  auto pq = continuants(ones);
  REQUIRE(pq.size() == 10);
  // p: 1 1 2 3 5 ..., q: 1 2 3 5 8 ...
  CHECK(pq[0] == std::pair<BigInt, BigInt>(1, 1));
  CHECK(pq[1] == std::pair<BigInt, BigInt>(1, 2));
  CHECK(pq[9].first == 55);
  CHECK(pq[9].second == 89);
}

TEST_CASE("continuants satisfy the determinant identity") {
  std::vector<Digit> a = {2, 3, 1, 4, 1, 6, 2, 5};
  auto pq = continuants(a);
  BigInt pprev = 0, qprev = 1;  // (p_0, q_0) convention shifted by one step
  for (std::size_t n = 0; n < pq.size(); ++n) {
    BigInt det = pq[n].first * qprev - pprev * pq[n].second;
    CHECK((det == 1 || det == -1));
    pprev = pq[n].first;
    qprev = pq[n].second;
  }
  // convergents approach the value: p_n/q_n recovers num/den at the end
  auto full = euclid_cf(355, 1000);
  auto cc = continuants(full);
  CHECK(cc.back().first * 1000 == cc.back().second * 355);
}

TEST_CASE("cylinder intervals") {
  CylinderInterval c = cylinder(2, std::vector<Digit>{1, 0, 1});
  CHECK(c.left() == Rational(5, 8));
  CHECK(c.length() == Rational(1, 8));
  CHECK(c.depth() == 3);
  CHECK(c.contains_point(Rational(5, 8)));
  CHECK(c.contains_point(Rational(11, 16)));
  CHECK(!c.contains_point(Rational(3, 4)));  // right endpoint excluded
  CylinderInterval fine = cylinder(2, std::vector<Digit>{1, 0, 1, 1});
  CylinderInterval other = cylinder(2, std::vector<Digit>{1, 1, 0, 1});
  CHECK(c.contains(fine));
  CHECK(!c.contains(other));
  CHECK(!fine.contains(c));
}

TEST_CASE("shift composes and drops digits") {
  DigitStream s = DigitStream::rational_expansion(1, 7, 10);
  DigitStream s3 = shift(s, 3);
  CHECK(s3.at(0) == s.at(3));
  CHECK(s3.at(10) == s.at(13));
  DigitStream s5 = shift(s3, 2);
  CHECK(s5.at(0) == s.at(5));
  DigitStream w = DigitStream::materialized(Alphabet::base(2), {1, 0, 1, 1});
  CHECK(*shift(w, 1).length() == 3);
}

TEST_CASE("overrides replace exactly the named indices") {
  DigitStream base = DigitStream::rational_expansion(1, 3, 2);  // 0 1 0 1 ...
  DigitStream o = DigitStream::with_overrides(base, {{2, 1}, {5, 0}});
  CHECK(o.at(0) == 0);
  CHECK(o.at(1) == 1);
  CHECK(o.at(2) == 1);  // overridden
  CHECK(o.at(3) == 1);
  CHECK(o.at(5) == 0);  // overridden
  CHECK(o.at(7) == 1);
  CHECK_THROWS_AS(DigitStream::with_overrides(base, {{0, 7}}), ValidationError);
}

TEST_CASE("materialized words are bounds checked") {
  DigitStream w = DigitStream::materialized(Alphabet::base(3), {0, 2, 1});
  CHECK(*w.length() == 3);
  CHECK(w.at(2) == 1);
  CHECK_THROWS_AS(w.at(3), ValidationError);
  CHECK_THROWS_AS(DigitStream::materialized(Alphabet::base(2), {0, 2}), ValidationError);
}

TEST_CASE("sequential generators buffer and respect the cap") {
  int calls = 0;
  DigitStream s = DigitStream::sequential_generator(
      Alphabet::base(10), [&calls]() { return Digit(calls++ % 10); }, 100);
  CHECK(s.at(10) == 0);
  CHECK(calls == 11);  // indices 0..10 produced once
  CHECK(s.at(3) == 3); // served from the buffer
  CHECK(calls == 11);
  CHECK_THROWS_AS(s.at(100), ResourceCapError);
}

TEST_CASE("digit words serialize and parse") {
  std::vector<Digit> word = {3, 1, 4, 1, 5};
  std::stringstream ss;
  write_digit_word(ss, Alphabet::base(6), word);
  auto [a, back] = read_digit_word(ss);
  CHECK(a == Alphabet::base(6));
  CHECK(back == word);

  std::stringstream ss2;
  std::vector<Digit> big = {1, 99, 1000000007};
  write_digit_word(ss2, Alphabet::positive_integers(), big);
  auto [a2, b2] = read_digit_word(ss2);
  CHECK(!a2.finite);
  CHECK(b2 == std::vector<Digit>{1, 99, 1000000007});
}

TEST_SUITE_END();
