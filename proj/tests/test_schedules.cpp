#include <doctest.h>

#include <cstdint>

#include "freqdim/errors.hpp"
#include "freqdim/schedules.hpp"

using namespace freqdim;
using namespace freqdim::schedules;

namespace {

Schedule three_term() {
  // (n, 2n, n^2 + 2n)
  Schedule s;
  s.q = {ScheduleFn::poly({0, 1}), ScheduleFn::poly({0, 2}), ScheduleFn::poly({0, 2, 1})};
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("schedules");

TEST_CASE("polynomials and exponentials evaluate") {
  ScheduleFn p = ScheduleFn::poly({3, -1, 2});  // 3 - n + 2n^2
  CHECK(p.eval(0) == 3);
  CHECK(p.eval(1) == 4);
  CHECK(p.eval(5) == 48);
  ScheduleFn e = ScheduleFn::exponential(2, Rational(3, 2));  // floor(3/2 * 2^n)
  CHECK(e.eval(1) == 3);
  CHECK(e.eval(2) == 6);
  CHECK(e.eval(3) == 12);
  CHECK(e.eval(10) == 1536);
  CHECK(!p.describe().empty());
  CHECK(!e.describe().empty());
}

TEST_CASE("evaluation refuses to overflow the index space") {
  ScheduleFn sq = ScheduleFn::poly({0, 0, 1});  // n^2
  CHECK(sq.eval(1ll << 30) == (1ll << 60));
  CHECK_THROWS_AS(sq.eval(1ll << 32), ResourceCapError);  // 2^64 > 2^62
  ScheduleFn e = ScheduleFn::exponential(2, 1);
  CHECK_THROWS_AS(e.eval(70), ResourceCapError);
  // big-integer evaluation still works past the cap
  CHECK(sq.eval_big(1ll << 32) == BigInt(1) << 64);
}

TEST_CASE("the three-term schedule is admissible at eps = 1/2") {
  Schedule s = three_term();
  CHECK(s.epsilon == Rational(1, 2));
  ValidationReport r = validate(s, 1000);
  CHECK(r.ok);
  CHECK(r.reason.empty());
  // gaps: q2-q1 = n >= n/2, q3-q2 = n^2 >= n/2, growth >= 1 >= 1/2
  CHECK(r.max_epsilon == Rational(1));  // min over n of n/(n) = 1 caps the gap side
}

TEST_CASE("order violations are localized") {
  Schedule bad;
  bad.q = {ScheduleFn::poly({0, 2}), ScheduleFn::poly({0, 1})};  // (2n, n): reversed
  ValidationReport r = validate(bad, 100);
  CHECK(!r.ok);
  CHECK(r.violating_i == 2);
  CHECK(r.violating_n == 1);
  CHECK(!r.reason.empty());
  CHECK(r.max_epsilon == Rational(0));
}

TEST_CASE("gap failures report the first offending n") {
  Schedule s;
  s.q = {ScheduleFn::poly({0, 1}), ScheduleFn::poly({1, 1})};  // (n, n+1): gap 1
  s.epsilon = Rational(1);
  ValidationReport r = validate(s, 100);
  // needs q2 - q1 = 1 >= eps*n = n: holds at n=1, fails at n=2
  CHECK(!r.ok);
  CHECK(r.violating_i == 2);
  CHECK(r.violating_n == 2);
}

TEST_CASE("max_epsilon is the exact binding constraint") {
  Schedule s;
  s.q = {ScheduleFn::poly({0, 1}), ScheduleFn::poly({10, 1})};  // (n, n+10)
  s.epsilon = Rational(1, 100);
  ValidationReport r = validate(s, 100);
  CHECK(r.ok);
  // gap/n = 10/n, minimized at n=100
  CHECK(r.max_epsilon == Rational(1, 10));
}

TEST_CASE("growth condition catches stalled schedules") {
  Schedule s;
  s.q = {ScheduleFn::poly({5})};  // constant
  ValidationReport r = validate(s, 10);
  CHECK(!r.ok);
  CHECK(r.violating_i == 1);
}

TEST_CASE("positivity is required") {
  Schedule s;
  s.q = {ScheduleFn::poly({-3, 1})};  // n - 3 nonpositive at n <= 3
  ValidationReport r = validate(s, 10);
  CHECK(!r.ok);
  CHECK(r.violating_n == 1);
}

TEST_CASE("max_index is the top of the last component") {
  Schedule s = three_term();
  CHECK(max_index(s, 100) == 100 * 100 + 200);
}

TEST_SUITE_END();
