#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "freqdim/errors.hpp"
#include "freqdim/measures.hpp"

using namespace freqdim;
using namespace freqdim::measures;
using digits::Digit;
using digits::DigitStream;

TEST_SUITE_BEGIN("measures");

TEST_CASE("bernoulli law validates and samples by cdf") {
  auto law = BernoulliLaw::from_weights({Rational(1, 2), Rational(1, 3), Rational(1, 6)});
  CHECK(law.exact);
  CHECK(law.weight(1) == Rational(1, 3));
  CHECK(law.weight_d(2) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(law.sample(0.0) == 0);
  CHECK(law.sample(0.49) == 0);
  CHECK(law.sample(0.51) == 1);
  CHECK(law.sample(0.99) == 2);
  CHECK_THROWS_AS(BernoulliLaw::from_weights({Rational(1)}, 0).weight(1),
                  ValidationError);  // digit outside the one-symbol alphabet
  CHECK_THROWS_AS(BernoulliLaw::from_weights({Rational(1, 2), Rational(1, 3)}),
                  ValidationError);  // sums to 5/6
  CHECK_THROWS_AS(BernoulliLaw::from_weights({Rational(3, 2), Rational(-1, 2)}),
                  ValidationError);
}

TEST_CASE("markov law from a consistent joint matrix") {
  // R = pi_i P_ij for the two-state chain with P=[[3/4,1/4],[1/4,3/4]], pi=(1/2,1/2)
  std::vector<std::vector<Rational>> R = {{Rational(3, 8), Rational(1, 8)},
                                          {Rational(1, 8), Rational(3, 8)}};
  MarkovLaw law = MarkovLaw::from_joint(R);
  CHECK(law.m == 2);
  CHECK(law.q[0] == Rational(1, 2));
  CHECK(law.q[1] == Rational(1, 2));
  CHECK(law.Q[0][0] == Rational(3, 4));
  CHECK(law.Q[0][1] == Rational(1, 4));
  CHECK(law.Q[1][0] == Rational(1, 4));
}

TEST_CASE("markov law rejects bad joints by name") {
  // inconsistent marginals: row sums (1/2,1/2), column sums (3/4,1/4)
  std::vector<std::vector<Rational>> bad = {{Rational(1, 2), Rational(0)},
                                            {Rational(1, 4), Rational(1, 4)}};
  CHECK_THROWS_WITH_AS(MarkovLaw::from_joint(bad),
                       doctest::Contains("inconsistent"), ValidationError);
  // consistent but reducible: block diagonal
  std::vector<std::vector<Rational>> red = {{Rational(1, 2), Rational(0)},
                                            {Rational(0), Rational(1, 2)}};
  CHECK_THROWS_WITH_AS(MarkovLaw::from_joint(red),
                       doctest::Contains("primitive"), ValidationError);
  std::vector<std::vector<Rational>> neg = {{Rational(5, 4), Rational(-1, 8)},
                                            {Rational(-1, 8), Rational(0)}};
  CHECK_THROWS_AS(MarkovLaw::from_joint(neg), ValidationError);
  std::vector<std::vector<Rational>> off = {{Rational(1, 4), Rational(1, 4)},
                                            {Rational(1, 4), Rational(1, 8)}};
  CHECK_THROWS_AS(MarkovLaw::from_joint(off), ValidationError);
}

TEST_CASE("finite chains expose an exact stationary vector") {
  // P(0->1)=a, P(1->0)=b: pi = (b, a)/(a+b)
  std::vector<std::vector<Rational>> P = {{Rational(1, 2), Rational(1, 2)},
                                          {Rational(1, 4), Rational(3, 4)}};
  FiniteMarkovChain c = FiniteMarkovChain::from_transition(P);
  CHECK(c.pi[0] == Rational(1, 3));
  CHECK(c.pi[1] == Rational(2, 3));
  CHECK(c.primitive);
  CHECK(c.obs == std::vector<Digit>{0, 1});

  // a two-cycle is irreducible but not primitive; still has a stationary law
  std::vector<std::vector<Rational>> flip = {{Rational(0), Rational(1)},
                                             {Rational(1), Rational(0)}};
  FiniteMarkovChain f = FiniteMarkovChain::from_transition(flip);
  CHECK(!f.primitive);
  CHECK(f.pi[0] == Rational(1, 2));

  FiniteMarkovChain relabeled = FiniteMarkovChain::from_transition(P, {5, 9});
  CHECK(relabeled.obs_alpha.contains(5));
  CHECK(relabeled.obs_alpha.contains(9));
}

TEST_CASE("gauss marginal closed forms") {
  GaussMarginalLaw g;
  CHECK(g.weight(1) == doctest::Approx(std::log2(4.0 / 3.0)).epsilon(1e-15));
  CHECK(g.weight(2) == doctest::Approx(std::log2(9.0 / 8.0)).epsilon(1e-15));
  // telescoped cdf: P(digit <= j) = 1 - log2(1 + 1/(j+1))
  for (Digit j = 1; j <= 30; ++j) {
    double direct = 0;
    for (Digit k = 1; k <= j; ++k) direct += g.weight(k);
    CHECK(g.cdf(j) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(g.cdf(j) == doctest::Approx(1 - std::log2(1.0 + 1.0 / (j + 1))).epsilon(1e-15));
  }
  // sampling inverts the cdf
  for (Digit j = 1; j <= 10; ++j) {
    CHECK(g.sample(g.cdf(j) - 1e-12) == j);
    CHECK(g.sample(g.cdf(j) + 1e-12) == j + 1);
  }
  CHECK(g.sample(0.0) == 1);
}

TEST_CASE("sampled streams are reproducible and law-shaped") {
  auto law = BernoulliLaw::from_weights({Rational(1, 4), Rational(3, 4)});
  DigitStream s1 = sample_stream(law, {11, 0});
  DigitStream s2 = sample_stream(law, {11, 0});
  DigitStream s3 = sample_stream(law, {12, 0});
  bool all_equal = true, any_diff = false;
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    all_equal = all_equal && s1.at(i) == s2.at(i);
    any_diff = any_diff || s1.at(i) != s3.at(i);
    ones += s1.at(i) == 1;
  }
  CHECK(all_equal);
  CHECK(any_diff);
  CHECK(std::abs(ones / double(n) - 0.75) < 0.02);
}

TEST_CASE("chain streams respect the sequential cap") {
  std::vector<std::vector<Rational>> P = {{Rational(1, 2), Rational(1, 2)},
                                          {Rational(1, 2), Rational(1, 2)}};
  FiniteMarkovChain c = FiniteMarkovChain::from_transition(P);
  DigitStream s = sample_stream(Law{c}, {0, 0}, 64);
  (void)s.at(63);
  CHECK_THROWS_AS(s.at(64), ResourceCapError);
}

TEST_CASE("cylinder masses multiply out exactly") {
  auto law = BernoulliLaw::from_weights({Rational(1, 2), Rational(1, 3), Rational(1, 6)});
  MassResult mr = cylinder_mass(Law{law}, std::vector<Digit>{0, 1, 2, 1});
  CHECK(mr.exact);
  CHECK(!mr.zero);
  CHECK(mr.mass == Rational(1, 2) * Rational(1, 3) * Rational(1, 6) * Rational(1, 3));
  CHECK(mr.log_mass == doctest::Approx(std::log(to_double(mr.mass))).epsilon(1e-12));

  std::vector<std::vector<Rational>> R = {{Rational(3, 8), Rational(1, 8)},
                                          {Rational(1, 8), Rational(3, 8)}};
  MarkovLaw mk = MarkovLaw::from_joint(R);
  MassResult mm = cylinder_mass(Law{mk}, std::vector<Digit>{0, 0, 1});
  // q_0 * Q_00 * Q_01 = 1/2 * 3/4 * 1/4
  CHECK(mm.mass == Rational(3, 32));

  auto point = BernoulliLaw::from_weights({Rational(1), Rational(0)});
  MassResult z = cylinder_mass(Law{point}, std::vector<Digit>{0, 1});
  CHECK(z.zero);
  CHECK(z.log_mass == -std::numeric_limits<double>::infinity());
}

TEST_CASE("finite marginals agree with the defining law") {
  auto law = BernoulliLaw::from_weights({Rational(2, 5), Rational(3, 5)});
  auto fm = finite_marginal(Law{law});
  REQUIRE(fm.has_value());
  CHECK(fm->w == law.w);

  std::vector<std::vector<Rational>> R = {{Rational(2, 5), Rational(1, 10)},
                                          {Rational(1, 10), Rational(2, 5)}};
  auto fr = finite_marginal(Law{MarkovLaw::from_joint(R)});
  REQUIRE(fr.has_value());
  CHECK(fr->w[0] == Rational(1, 2));

  CHECK(!finite_marginal(Law{GaussMarginalLaw{}}).has_value());
}

TEST_CASE("truncated digit law at small index") {
  // point mass on digit 1, truncation at n=2:
  // w_k = (r_k + n^-3)/(S_n + n^-2) -> ((1 + 1/8)/(5/4), (0 + 1/8)/(5/4)) = (9/10, 1/10)
  auto rbar = DigitWeightSeq::finite({Rational(1)});
  BernoulliLaw t2 = truncated_bernoulli(rbar, 2);
  CHECK(t2.exact);
  CHECK(t2.alpha.first == 1);
  CHECK(t2.weight(1) == Rational(9, 10));
  CHECK(t2.weight(2) == Rational(1, 10));
  BernoulliLaw t1 = truncated_bernoulli(rbar, 1);
  CHECK(t1.weight(1) == Rational(1));
}

TEST_CASE("truncated stream digit at index i never exceeds i+1") {
  auto rbar = DigitWeightSeq::finite({Rational(1, 2), Rational(1, 2)});
  DigitStream s = truncated_cf_stream(rbar, {5, 1});
  for (std::uint64_t i = 0; i < 200; ++i) {
    CHECK(s.at(i) >= 1);
    CHECK(s.at(i) <= Digit(i) + 1);
  }
}

TEST_CASE("iid cf streams follow the weight sequence") {
  auto rbar = DigitWeightSeq::finite({Rational(1, 2), Rational(1, 2)});
  DigitStream s = iid_cf_stream(rbar, {6, 2});
  std::map<Digit, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[s.at(i)];
  CHECK(counts.size() == 2);
  CHECK(std::abs(counts[1] / 10000.0 - 0.5) < 0.03);

  DigitStream g = iid_cf_stream(DigitWeightSeq::gauss(), {6, 3});
  std::map<Digit, int> gc;
  for (int i = 0; i < 20000; ++i) ++gc[g.at(i)];
  // digit 1 has weight log2(4/3) ~ 0.415
  CHECK(std::abs(gc[1] / 20000.0 - std::log2(4.0 / 3.0)) < 0.02);
  CHECK(gc.rbegin()->first > 10);  // heavy tail shows up in 20k draws
}

TEST_CASE("weight sequences validate") {
  CHECK_THROWS_AS(DigitWeightSeq::finite({Rational(1, 2)}), ValidationError);
  auto ok = DigitWeightSeq::finite({Rational(1, 3), Rational(2, 3)});
  CHECK(ok.weight(1) == Rational(1, 3));
  CHECK(ok.weight(3) == Rational(0));
  CHECK(ok.prefix_sum(1) == Rational(1, 3));
  CHECK(ok.prefix_sum(5) == Rational(1));
}

TEST_SUITE_END();
