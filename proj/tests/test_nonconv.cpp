#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "freqdim/errors.hpp"
#include "freqdim/nonconv.hpp"

using namespace freqdim;
using namespace freqdim::nonconv;
using digits::Alphabet;
using digits::Digit;
using digits::DigitStream;
using measures::BernoulliLaw;
using measures::Law;
using observables::Observable;
using schedules::Schedule;
using schedules::ScheduleFn;

namespace {

Schedule two_term() {
  Schedule s;
  s.q = {ScheduleFn::poly({0, 1}), ScheduleFn::poly({0, 2})};
  return s;
}

Law coin() {
  return Law{BernoulliLaw::from_weights({Rational(1, 2), Rational(1, 2)})};
}

}  // namespace

TEST_SUITE_BEGIN("nonconv");

TEST_CASE("hand-checkable deterministic sum") {
  // stream 0101... (binary 1/3); schedule (n, 2n); F = 1{(x,y)=(1,0)}.
  // digit(n) = n mod 2 and digit(2n) = 0, so the tuple hits exactly at odd n:
  // S(10) = 5 and the average is exactly 1/2.
  DigitStream s = DigitStream::rational_expansion(1, 3, 2);
  Observable f = Observable::indicator_product(Alphabet::base(2), {1, 0});
  ConvergenceTrace tr = run_slln(s, two_term(), f, coin(), 10, {2, 4, 10});
  CHECK(tr.checkpoints == std::vector<std::uint64_t>{2, 4, 10});
  CHECK(tr.averages.back() == 0.5);
  CHECK(tr.averages[0] == 0.5);  // n=1 hits, n=2 misses
  CHECK(tr.target == 0.25);
  CHECK(tr.target_exact);
  CHECK(tr.final_deviation() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("checkpoints default to powers of two ending at N") {
  CHECK(dyadic_checkpoints(5000) ==
        std::vector<std::uint64_t>{1024, 2048, 4096, 5000});
  // below the first power of two the halfway fallback keeps two checkpoints
  CHECK(dyadic_checkpoints(1024) == std::vector<std::uint64_t>{512, 1024});
  CHECK(dyadic_checkpoints(100) == std::vector<std::uint64_t>{50, 100});
}

TEST_CASE("inadmissible schedules are refused") {
  Schedule bad;
  bad.q = {ScheduleFn::poly({0, 2}), ScheduleFn::poly({0, 1})};
  DigitStream s = DigitStream::rational_expansion(1, 3, 2);
  Observable f = Observable::indicator_product(Alphabet::base(2), {1, 0});
  CHECK_THROWS_AS(run_slln(s, bad, f, coin(), 10), ValidationError);
}

TEST_CASE("component sums reconcile against the direct sum") {
  // run_components cross-checks N*mean + sum_i S_i(N) == S(N) in exact
  // arithmetic at every checkpoint and throws on mismatch, so surviving the
  // call is the assertion; then compare the traced averages for consistency.
  auto law = BernoulliLaw::from_weights({Rational(1, 3), Rational(2, 3)});
  auto mu = *measures::finite_marginal(Law{law});
  std::vector<Rational> vals = {Rational(2), Rational(-1), Rational(1, 2), Rational(3)};
  Observable f = Observable::table(Alphabet::base(2), 2, vals);
  auto d = observables::decompose(f, mu);

  DigitStream s = measures::sample_stream(Law{law}, {21, 0});
  ConvergenceTrace via_f = run_slln(s, two_term(), f, Law{law}, 4096);
  ConvergenceTrace via_comp = run_components(s, two_term(), d, f, 4096);
  REQUIRE(via_f.checkpoints == via_comp.checkpoints);
  REQUIRE(via_comp.component_averages.size() == 2);
  for (std::size_t c = 0; c < via_f.checkpoints.size(); ++c) {
    double rebuilt = via_comp.target;
    for (const auto& comp : via_comp.component_averages) rebuilt += comp[c];
    CHECK(rebuilt == doctest::Approx(via_f.averages[c]).epsilon(1e-12));
  }
}

TEST_CASE("occurrence counts cover and zero-fill") {
  std::vector<Digit> w = {0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1};
  DigitStream s = DigitStream::materialized(Alphabet::base(2), w);
  Schedule one;
  one.q = {ScheduleFn::poly({0, 1})};

  // full-alphabet counts sum to N; digits at indices q(n)=n for n=1..6
  auto all = count_frequencies(s, one, {}, 6);
  std::uint64_t total = 0;
  for (auto& [word, c] : all) total += c;
  CHECK(total == 6);
  CHECK(all.at({1}) == 3);  // indices 1,2,4 hold 1; 3,5,6 hold 0
  CHECK(all.at({0}) == 3);

  // requested words appear even at count zero
  std::vector<Word> req = {{0}, {1}};
  Schedule sq;
  sq.q = {ScheduleFn::poly({0, 0, 1})};  // n^2: indices 1, 4, 9
  auto counted = count_frequencies(s, sq, req, 3);
  CHECK(counted.at({1}) == 3);  // w[1], w[4], w[9] are all 1
  CHECK(counted.at({0}) == 0);
}

TEST_CASE("pair counts look one index ahead") {
  std::vector<Digit> w = {0, 1, 1, 0, 1, 0, 0, 1};
  DigitStream s = DigitStream::materialized(Alphabet::base(2), w);
  Schedule one;
  one.q = {ScheduleFn::poly({0, 1})};
  auto pairs = count_pair_frequencies(s, one, 4);
  // n=1: (w1,w2)=(1,1); n=2: (1,0); n=3: (0,1); n=4: (1,0)
  CHECK(pairs.at({{1}, {1}}) == 1);
  CHECK(pairs.at({{1}, {0}}) == 2);
  CHECK(pairs.at({{0}, {1}}) == 1);
}

TEST_CASE("frequency specs validate and report deviations") {
  FrequencySpec spec = FrequencySpec::product_form({0.25, 0.75}, 0, 2);
  CHECK(spec.word_len == 2);
  CHECK(spec.target.at({0, 0}) == doctest::Approx(0.0625));
  CHECK(spec.target.at({1, 1}) == doctest::Approx(0.5625));
  spec.validate();

  FrequencySpec bad;
  bad.word_len = 1;
  bad.target[{0}] = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);  // mass 0.5

  std::map<Word, std::uint64_t> counts = {{{0, 0}, 1}, {{1, 1}, 9}};
  MembershipReport rep = check_membership(counts, 10, spec);
  CHECK(rep.N == 10);
  // |1/10 - 1/16| = 0.0375, |9/10 - 9/16| = 0.3375, missing words contribute targets
  CHECK(rep.sup_deviation == doctest::Approx(0.3375));
  CHECK(rep.rows.size() == 4);
}

TEST_CASE("infinite-alphabet runs take the indicator path") {
  measures::GaussMarginalLaw g;
  DigitStream s = measures::sample_stream(Law{g}, {31, 0});
  Schedule one;
  one.q = {ScheduleFn::poly({0, 1})};
  Observable f = Observable::indicator_product(Alphabet::positive_integers(), {1});
  ConvergenceTrace tr = run_slln(s, one, f, Law{g}, 4096);
  CHECK(tr.target == doctest::Approx(std::log2(4.0 / 3.0)).epsilon(1e-12));
  CHECK(!tr.target_exact);
  CHECK(std::abs(tr.final_average() - tr.target) < 0.03);
}

TEST_SUITE_END();
